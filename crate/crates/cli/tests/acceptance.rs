//! Acceptance suite: one PASS/FAIL line per criterion on stderr, then a
//! single assertion over all of them. Run with
//! `cargo test -p hybridlab-cli --test acceptance -- --nocapture`.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use hybridlab_core::bounds::{capacity, rd_function};
use hybridlab_core::gaussian::{
    af_rates, hc_general_rates, hc_special_rates, nnc_rates, GaussianTwrcParams, HcVariant, SchemeParams,
};
use hybridlab_core::infotheory::{ConditionalPmf, DistortionMeasure, JointPmf, Pmf};
use hybridlab_core::search::stream_rng;
use hybridlab_core::sim::{lemma1_check, Lemma1Config};
use rand::Rng;
use serde_json::Value;

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

/// Runs the binary, returning the wall time; panics on a nonzero exit.
fn cli(out: &Path, args: &[&str]) -> Duration {
    let t = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_hybridlab"))
        .env_remove("HYBRIDLAB_SEED")
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap();
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    t.elapsed()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn example1_exact(tmp: &Path) -> Outcome {
    let out = tmp.join("c1");
    let t = cli(&out, &["bounds-diamond", s(&scenario("example1.json"))]);
    let d = json(&out.join("diamond.json"));
    let (h, a, c) = (f(&d["hybrid"]), f(&d["adt"]), f(&d["cutset"]));
    let pass = (h - 3f64.log2()).abs() <= 1e-9 && (a - 1.5).abs() <= 1e-6 && c >= h - 1e-12 && t.as_secs_f64() < 5.0;
    outcome(
        pass,
        format!("hybrid {h:.12} (log2 3 = {:.12}), adt {a:.9}, cutset {c:.12}, {:.2}s", 3f64.log2(), t.as_secs_f64()),
    )
}

fn fig8_ordering(tmp: &Path) -> Outcome {
    let out = tmp.join("c2");
    let t = cli(&out, &["bounds-twrc", "--sweep", s(&scenario("fig8.json"))]);
    let rows = json(&out.join("twrc.json"))["sweep"].as_array().unwrap().clone();
    let mut left = 0;
    let mut min_margin = f64::INFINITY;
    let mut ordered = true;
    let mut dominated = true;
    for row in &rows {
        let (r, cs, af, nnc, hc) = (f(&row["r"]), f(&row["cutset"]), f(&row["af"]), f(&row["nnc"]), f(&row["hc"]));
        dominated &= [af, nnc, hc].iter().all(|&v| cs >= v - 1e-9);
        if r <= 0.45 + 1e-9 {
            left += 1;
            let m = (hc - nnc).min(hc - af);
            min_margin = min_margin.min(m);
            ordered &= m >= 1e-3;
        }
    }
    let pass = left == 9 && ordered && dominated && t.as_secs_f64() < 30.0;
    outcome(
        pass,
        format!(
            "{left} points with r <= 0.45, min HC margin {min_margin:.4} bits, cutset dominates: {dominated}, {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn special_cases() -> Outcome {
    let t = Instant::now();
    let mut rng = stream_rng(0xACC3, 0, 0);
    let mut worst = [0f64; 3];
    for _ in 0..100 {
        let mut snr = || 10f64.powf(rng.gen_range(-1.0..4.0));
        let ch = GaussianTwrcParams::new(snr(), snr(), snr(), snr()).unwrap();
        let sigma2 = 10f64.powf(rng.gen_range(-2.0..3.0));
        let diff = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).abs().max((a.1 - b.1).abs());
        let g = |al, be, s2| {
            let p = hc_general_rates(&ch, &SchemeParams::new(al, be, s2).unwrap(), HcVariant::AsPrinted).unwrap();
            (p.r1, p.r2)
        };
        let n = nnc_rates(&ch, sigma2).unwrap();
        let h = hc_special_rates(&ch, sigma2).unwrap();
        let a = af_rates(&ch).unwrap();
        worst[0] = worst[0].max(diff(g(0.0, 0.0, sigma2), (n.r1, n.r2)));
        worst[1] = worst[1].max(diff(g(0.0, 1.0, sigma2), (h.r1, h.r2)));
        worst[2] = worst[2].max(diff(g(1.0, 0.0, 1e8), (a.r1, a.r2)));
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = worst[0] <= 1e-9 && worst[1] <= 1e-9 && worst[2] <= 1e-3 && secs < 5.0;
    outcome(
        pass,
        format!(
            "max |diff| nnc {:.1e}, hc_special {:.1e}, af {:.1e} over 100 tuples, {secs:.2}s",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn separation_boundary(tmp: &Path) -> Outcome {
    let out = tmp.join("c4");
    let t = cli(
        &out,
        &["check-thm1", s(&scenario("bsc_uncoded.json")), "--optimize", "--aux-cap", "4", "--grid", "12", "--target", "0.1"],
    );
    let found = json(&out.join("thm1.json"))["min_feasible_distortion"].as_f64();
    // D* solves R(D) = C.
    let source = Pmf::new(vec![0.5, 0.5]).unwrap();
    let ham = DistortionMeasure::hamming(2);
    let cap = capacity(&ConditionalPmf::bsc(0.1).unwrap()).value;
    let (mut lo, mut hi) = (1e-6, 0.5 - 1e-6);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if rd_function(&source, &ham, mid).unwrap().value < cap {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let d_star = 0.5 * (lo + hi);
    let pass = found.is_some_and(|d| (d - d_star).abs() <= 0.02) && t.as_secs_f64() < 60.0;
    outcome(
        pass,
        format!("search boundary {found:?} vs R(D) < C boundary {d_star:.6}, {:.2}s", t.as_secs_f64()),
    )
}

fn specialization_identities(tmp: &Path) -> Outcome {
    let mut worst = 0f64;
    let mut checked = 0;
    let mut total = Duration::ZERO;
    for (i, name) in ["mac_adder_dsbs.json", "mac_noiseless_dsbs.json", "mac_noiseless_asym.json"].iter().enumerate() {
        let doc = json(&scenario(name));
        let mut args = vec!["region-mac".to_string(), s(&scenario(name)).to_string()];
        for flag in ["cor1", "cor2"] {
            if !doc[flag].is_null() {
                args.push(format!("--{flag}"));
            }
        }
        let out = tmp.join(format!("c5_{i}"));
        total += cli(&out, &args.iter().map(String::as_str).collect::<Vec<_>>());
        let r = json(&out.join("mac_region.json"));
        for key in ["lossless", "distributed"] {
            if let Some(d) = r[key]["max_abs_diff"].as_f64() {
                worst = worst.max(d);
                checked += 1;
            }
        }
    }
    let pass = checked >= 3 && worst <= 1e-12 && total.as_secs_f64() < 10.0;
    outcome(
        pass,
        format!("{checked} reductions, max |diff| {worst:.1e}, {:.2}s", total.as_secs_f64()),
    )
}

fn uncoded_distortion(tmp: &Path) -> Outcome {
    let out = tmp.join("c6");
    let t = cli(&out, &["simulate", s(&scenario("bsc_uncoded.json")), "--n", "1000", "--trials", "100"]);
    let row = &json(&out.join("simulate.json"))["rows"][0];
    let (m, se) = (f(&row["mean_distortion"]["mean"]), f(&row["mean_distortion"]["std_error"]));
    let pass = (m - 0.1).abs() <= 3.0 * se && t.as_secs_f64() < 10.0;
    outcome(pass, format!("mean distortion {m:.5}, se {se:.5}, {:.2}s", t.as_secs_f64()))
}

fn hybrid_trend(tmp: &Path) -> Outcome {
    let start = Instant::now();
    let trend = scenario("p2p_hybrid_trend.json");
    let out = tmp.join("c7_gap");
    cli(&out, &["check-thm1", s(&trend)]);
    let c = &json(&out.join("thm1.json"))["constraints"][0];
    let gap = f(&c["rhs"]) - f(&c["lhs"]);

    let out = tmp.join("c7_trend");
    cli(&out, &["simulate", s(&trend), "--n", "8,12,16,20", "--trials", "2000"]);
    let rows = json(&out.join("simulate.json"))["rows"].as_array().unwrap().clone();
    let pe: Vec<(f64, f64)> = rows.iter().map(|r| (f(&r["p_error"]["mean"]), f(&r["p_error"]["half_width"]))).collect();
    let nonincreasing = pe.windows(2).all(|w| w[1].0 <= w[0].0 + w[0].1 + w[1].1);

    let out = tmp.join("c7_under");
    cli(&out, &["simulate", s(&scenario("p2p_under_rate.json")), "--n", "8,12,16,20", "--trials", "2000"]);
    let rows = json(&out.join("simulate.json"))["rows"].as_array().unwrap().clone();
    let e1: Vec<(f64, f64)> = rows.iter().map(|r| (f(&r["p_e1"]["mean"]), f(&r["p_e1"]["half_width"]))).collect();
    let toward_one = e1.iter().all(|&(m, _)| m >= 0.95) && e1.windows(2).all(|w| w[1].0 >= w[0].0 - w[0].1 - w[1].1);

    let secs = start.elapsed().as_secs_f64();
    let pass = gap >= 0.15 && nonincreasing && toward_one && secs < 300.0;
    let fmt = |v: &[(f64, f64)]| v.iter().map(|(m, h)| format!("{m:.4}±{h:.4}")).collect::<Vec<_>>().join(" ");
    outcome(
        pass,
        format!(
            "I(U;Y)-I(U;S) {gap:.3}; P(E) {}; under-rate P(E1) {}; {secs:.1}s",
            fmt(&pe),
            fmt(&e1)
        ),
    )
}

/// Strict typicality of a binary pair on its count table.
fn typical(a: &[usize], b: &[usize], p: &[[f64; 2]; 2], eps: f64) -> bool {
    let n = a.len() as f64;
    (0..2).all(|x| {
        (0..2).all(|y| {
            let c = a.iter().zip(b).filter(|&(&u, &v)| u == x && v == y).count() as f64;
            (c - n * p[x][y]).abs() <= eps * n * p[x][y] + 1e-9
        })
    })
}

/// Exact `P(U^n(2) = u | U^n(1), S^n, M = 1)` for a two-word codebook,
/// rows indexed `u_tilde * 2^n + s`.
fn exact_conditional(p: [[f64; 2]; 2], n: usize, eps: f64) -> Vec<Vec<f64>> {
    let pu = [p[0][0] + p[0][1], p[1][0] + p[1][1]];
    let ps = [p[0][0] + p[1][0], p[0][1] + p[1][1]];
    let all: Vec<Vec<usize>> = (0..1usize << n).map(|i| (0..n).rev().map(|b| (i >> b) & 1).collect()).collect();
    let prob = |x: &[usize], q: &[f64; 2]| x.iter().map(|&v| q[v]).product::<f64>();
    let k = all.len();
    let mut mass = vec![vec![0.0; k]; k * k];
    for (si, sq) in all.iter().enumerate() {
        for (ai, a) in all.iter().enumerate() {
            for (bi, b) in all.iter().enumerate() {
                let pick_first = match (typical(a, sq, &p, eps), typical(b, sq, &p, eps)) {
                    (true, false) => 1.0,
                    (false, true) => 0.0,
                    _ => 0.5,
                };
                mass[ai * k + si][bi] += prob(sq, &ps) * prob(a, &pu) * prob(b, &pu) * pick_first;
            }
        }
    }
    mass.into_iter()
        .map(|row| {
            let t: f64 = row.iter().sum();
            row.iter().map(|v| if t > 0.0 { v / t } else { 0.0 }).collect()
        })
        .collect()
}

fn lemma1_dependence(tmp: &Path) -> Outcome {
    let start = Instant::now();
    let file = scenario("p2p_lemma1.json");
    let sec = &json(&file)["lemma1"];
    let probs: Vec<f64> = sec["joint"]["probs"].as_array().unwrap().iter().map(f).collect();
    let p = [[probs[0], probs[1]], [probs[2], probs[3]]];
    let eps = f(&sec["epsilon_prime"]);
    let pu = [p[0][0] + p[0][1], p[1][0] + p[1][1]];

    let exact = exact_conditional(p, 2, eps);
    let report = lemma1_check(&Lemma1Config {
        n: 2,
        rate: f(&sec["rate"]),
        joint: JointPmf::new(vec![2, 2], probs.clone()).unwrap(),
        epsilon_prime: eps,
        outer_trials: 200_000,
        min_count: 1,
        seed: 0xACC8,
    })
    .unwrap();
    let mut worst_z = 0f64;
    for cell in &report.cells {
        let row = &exact[(cell.u_tilde[0] * 2 + cell.u_tilde[1]) * 4 + cell.s[0] * 2 + cell.s[1]];
        for (u, &pe) in row.iter().enumerate() {
            let ph = cell.counts[u] as f64 / cell.total as f64;
            let se = (pe * (1.0 - pe) / cell.total as f64).sqrt();
            let z = if se > 0.0 { (ph - pe).abs() / se } else if ph == pe { 0.0 } else { f64::INFINITY };
            worst_z = worst_z.max(z);
        }
    }
    // The threshold is the largest exact ratio to the product pmf at n = 2.
    let threshold = exact
        .iter()
        .filter(|row| row.iter().sum::<f64>() > 0.0)
        .flat_map(|row| {
            row.iter().enumerate().filter_map(move |(u, &v)| {
                let prod = pu[u >> 1] * pu[u & 1];
                (prod > 0.0).then_some(v / prod)
            })
        })
        .fold(0f64, f64::max);

    let out = tmp.join("c8");
    cli(&out, &["simulate", "--lemma1", s(&file)]);
    let r4 = json(&out.join("lemma1.json"));
    let r4 = if r4["report"].is_object() { r4["report"].clone() } else { r4 };
    let lower = r4["max_ratio_lower"].as_f64();
    let point = r4["max_ratio"].as_f64();
    let secs = start.elapsed().as_secs_f64();
    let pass = !report.cells.is_empty()
        && worst_z <= 3.0
        && lower.is_some_and(|l| l <= threshold)
        && r4["inconclusive"] == Value::Bool(false)
        && secs < 120.0;
    outcome(
        pass,
        format!(
            "n=2: {} cells, max |z| {worst_z:.2}; n=4: max ratio - 3se {lower:?} (point {point:?}) vs n=2 threshold {threshold:.4}; {secs:.1}s",
            report.cells.len()
        ),
    )
}

fn determinism(tmp: &Path) -> Outcome {
    let fig8_csv = tmp.join("c9_0").join("fig8.csv");
    let runs: Vec<Vec<String>> = vec![
        vec!["bounds-twrc".into(), "--sweep".into(), s(&scenario("fig8.json")).into()],
        vec!["bounds-diamond".into(), s(&scenario("example1.json")).into()],
        vec![
            "region-mac".into(),
            s(&scenario("mac_noiseless_dsbs.json")).into(),
            "--cor1".into(),
            "--cor2".into(),
        ],
        vec![
            "check-thm1".into(),
            s(&scenario("bsc_uncoded.json")).into(),
            "--optimize".into(),
            "--aux-cap".into(),
            "3".into(),
            "--grid".into(),
            "8".into(),
        ],
        vec!["check-thm3".into(), s(&scenario("twrc_binary_af.json")).into()],
        vec![
            "simulate".into(),
            s(&scenario("p2p_hybrid_trend.json")).into(),
            "--trials".into(),
            "300".into(),
            "--per-trial".into(),
        ],
        vec!["simulate".into(), s(&scenario("mac_noiseless_dsbs.json")).into(), "--trials".into(), "100".into()],
        vec!["simulate".into(), "--lemma1".into(), s(&scenario("p2p_lemma1.json")).into()],
        vec!["plot".into(), s(&fig8_csv).into()],
    ];
    let mut failures = Vec::new();
    let mut files = 0;
    for (i, args) in runs.iter().enumerate() {
        let out = tmp.join(format!("c9_{i}"));
        let mut first = vec!["--jobs".to_string(), "1".into()];
        first.extend(args.iter().cloned());
        cli(&out, &first.iter().map(String::as_str).collect::<Vec<_>>());
        let manifest = out.join("manifest.json");
        let replay = tmp.join(format!("c9_{i}_replay"));
        let o = Command::new(env!("CARGO_BIN_EXE_hybridlab"))
            .env_remove("HYBRIDLAB_SEED")
            .args(["--jobs", "4", "replay", s(&manifest), "--replay-dir", s(&replay)])
            .output()
            .unwrap();
        if !o.status.success() {
            failures.push(format!("{}: {}", args[0], String::from_utf8_lossy(&o.stderr).trim()));
            continue;
        }
        for d in json(&manifest)["outputs"].as_array().unwrap() {
            let name = d["path"].as_str().unwrap();
            files += 1;
            if std::fs::read(out.join(name)).unwrap() != std::fs::read(replay.join(name)).unwrap() {
                failures.push(format!("{}: {name} differs", args[0]));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{} runs, {files} files byte-identical under --jobs 1 vs 4; {failures:?}", runs.len()),
    )
}

#[test]
fn acceptance() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let criteria: Vec<(&str, Check)> = vec![
        ("1 example1 exact values", Box::new(|| example1_exact(t))),
        ("2 fig8 ordering", Box::new(|| fig8_ordering(t))),
        ("3 general-scheme special cases", Box::new(special_cases)),
        ("4 separation recovery", Box::new(|| separation_boundary(t))),
        ("5 MAC specialization identities", Box::new(|| specialization_identities(t))),
        ("6 uncoded distortion", Box::new(|| uncoded_distortion(t))),
        ("7 hybrid trend and under-rate", Box::new(|| hybrid_trend(t))),
        ("8 codebook dependence", Box::new(|| lemma1_dependence(t))),
        ("9 replay determinism", Box::new(|| determinism(t))),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (name, check) in &criteria {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(err, "{tag} criterion {name}: {}", o.detail);
        if !o.pass {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
