use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hybridlab"));
    c.env_remove("HYBRIDLAB_SEED");
    c
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    bin().arg("--out-dir").arg(out).args(args).output().unwrap()
}

fn ok(out: &Path, args: &[&str]) -> Output {
    let o = run(out, args);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn bad_position_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let f = write(
        tmp.path(),
        "r.json",
        r#"{"kind":"twrc_gaussian","version":1,"channel":{"position":{"r":1.2,"power":10,"path_loss_exp":3}}}"#,
    );
    let o = run(&tmp.path().join("o"), &["bounds-twrc", &f]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn schema_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write(tmp.path(), "u.json", r#"{"kind":"diamond","version":1,"chanel":{}}"#);
    let version = write(
        tmp.path(),
        "v.json",
        r#"{"kind":"twrc_gaussian","version":7,"channel":{"snr":[1,1,1,1]}}"#,
    );
    for f in [unknown, version, "/nonexistent/x.json".to_string()] {
        assert_eq!(run(&tmp.path().join("o"), &["bounds-diamond", &f]).status.code(), Some(2), "{f}");
    }
}

#[test]
fn empty_csv_cannot_be_plotted() {
    let tmp = tempfile::tempdir().unwrap();
    let f = write(tmp.path(), "e.csv", "");
    assert_eq!(run(&tmp.path().join("o"), &["plot", &f]).status.code(), Some(2));
    let g = write(tmp.path(), "h.csv", "r,a\n");
    assert_eq!(run(&tmp.path().join("o"), &["plot", &g]).status.code(), Some(2));
}

#[test]
fn noisy_diamond_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let f = write(
        tmp.path(),
        "n.json",
        r#"{"kind":"diamond","version":1,"channel":{"kernels":{
            "relay_output_sizes":[2,1],
            "broadcast":[[0.9,0.1],[0.1,0.9]],
            "relay_input_sizes":[2,1],
            "mac":[[1,0],[0,1]]}}}"#,
    );
    let o = run(&tmp.path().join("o"), &["bounds-diamond", &f]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oversized_simulation_hits_the_cap() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &tmp.path().join("o"),
        &["simulate", scenario("p2p_hybrid_trend.json").to_str().unwrap(), "--n", "8,400"],
    );
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    // the cap is checked for every n before any work
    assert!(!tmp.path().join("o").join("simulate.json").exists());
}

#[test]
fn zero_jobs_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &tmp.path().join("o"),
        &["--jobs", "0", "bounds-diamond", scenario("example1.json").to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn symmetric_position_gives_equal_rates() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    ok(&out, &["bounds-twrc", scenario("fig8.json").to_str().unwrap()]);
    let report = json(&out.join("twrc.json"));
    for s in report["schemes"].as_array().unwrap() {
        let (r1, r2) = (s["point"]["r1"].as_f64().unwrap(), s["point"]["r2"].as_f64().unwrap());
        assert!((r1 - r2).abs() < 1e-6, "{s}");
    }
    let csv = std::fs::read_to_string(out.join("twrc.csv")).unwrap();
    assert!(csv.starts_with("scheme,r1,r2,sum,alpha,beta,sigma2\n"));
}

#[test]
fn single_relay_diamond_carries_one_bit() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    ok(&out, &["bounds-diamond", scenario("diamond_single_relay.json").to_str().unwrap()]);
    let d = json(&out.join("diamond.json"));
    for key in ["hybrid", "adt", "cutset"] {
        assert!((d[key].as_f64().unwrap() - 1.0).abs() < 1e-9, "{key}: {d}");
    }
}

#[test]
fn thm1_search_is_deterministic_across_jobs() {
    let tmp = tempfile::tempdir().unwrap();
    let f = scenario("bsc_uncoded.json");
    let args = |jobs: &'static str| {
        vec![
            "--jobs",
            jobs,
            "check-thm1",
            f.to_str().unwrap(),
            "--optimize",
            "--aux-cap",
            "2",
            "--grid",
            "8",
            "--target",
            "0.2",
        ]
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&a, &args("1"));
    ok(&b, &args("4"));
    let (ja, jb) = (
        std::fs::read(a.join("thm1.json")).unwrap(),
        std::fs::read(b.join("thm1.json")).unwrap(),
    );
    assert_eq!(ja, jb);
    assert_eq!(json(&a.join("thm1.json"))["feasible"], Value::Bool(true));
}

#[test]
fn replay_reproduces_and_detects_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    ok(&out, &["simulate", scenario("bsc_uncoded.json").to_str().unwrap(), "--trials", "20"]);
    let manifest = out.join("manifest.json");
    let m = json(&manifest);
    assert_eq!(m["seed"], 1);
    assert!(!m["outputs"].as_array().unwrap().is_empty());

    let o = ok(&out, &["--jobs", "3", "replay", manifest.to_str().unwrap()]);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["identical"], Value::Bool(true), "{report}");

    // A different seed changes the outputs, so the replay must fail.
    let o = bin()
        .env("HYBRIDLAB_SEED", "2")
        .args(["--out-dir", out.to_str().unwrap(), "replay", manifest.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn seed_flag_beats_environment_and_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let f = scenario("bsc_uncoded.json");
    let out = tmp.path().join("o");
    let o = bin()
        .env("HYBRIDLAB_SEED", "77")
        .args(["--out-dir", out.to_str().unwrap(), "--seed", "5", "simulate", f.to_str().unwrap(), "--trials", "2"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(json(&out.join("manifest.json"))["seed"], 5);
    let o = bin()
        .env("HYBRIDLAB_SEED", "77")
        .args(["--out-dir", out.to_str().unwrap(), "simulate", f.to_str().unwrap(), "--trials", "2"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(json(&out.join("manifest.json"))["seed"], 77);
}

#[test]
fn plot_renders_sweep_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    ok(&out, &["bounds-twrc", "--sweep", scenario("fig8.json").to_str().unwrap()]);
    let csv = out.join("fig8.csv");
    ok(&out, &["plot", csv.to_str().unwrap(), "--output", "fig8.svg"]);
    let svg = std::fs::read_to_string(out.join("fig8.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 4);
    assert_eq!(run(&out, &["plot", csv.to_str().unwrap(), "--output", "../x.svg"]).status.code(), Some(2));
}
