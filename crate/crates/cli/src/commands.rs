//! Subcommand bodies. Each reads one input, writes its outputs through an
//! [`OutputSet`] and returns the manifest of the run.

use std::path::{Path, PathBuf};
use std::time::Instant;

use hybridlab_core::bounds::diamond::{det_diamond_bounds, thm4_bound, DetBound};
use hybridlab_core::bounds::mac::{
    distributed_report, distributed_spec, lossless_constraints, lossless_spec, thm2_region_check,
};
use hybridlab_core::bounds::p2p::{check_thm1, thm1_optimize};
use hybridlab_core::bounds::twrc::{thm3_region_check, Thm3Variant};
use hybridlab_core::bounds::{BoundReport, Constraint, DEFAULT_MARGIN};
use hybridlab_core::gaussian::{
    fig8_sweep, optimize_scheme, sweep_csv, GaussianTwrcParams, HcVariant, OptimizedScheme, Scheme, SweepRow,
};
use hybridlab_core::sim::{
    codebook_size, lemma1_check, run_mac, run_p2p, Lemma1Config, Lemma1Report, MacReport, P2pReport,
};
use serde::Serialize;

use crate::cli::{resolve_seed, Command, Thm3Arg, VariantArg, DEFAULT_SEED};
use crate::error::{CliError, Result};
use crate::manifest::{compare, read_manifest, sha256_hex, InputDigest, OutputSet, RunManifest, MANIFEST_FILE};
use crate::plot::{parse_csv, render_svg};
use crate::scenario::{self, GaussFile, MacFile, P2pFile, Scenario};

impl From<VariantArg> for HcVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::AsPrinted => HcVariant::AsPrinted,
            VariantArg::BetaSubstituted => HcVariant::BetaSubstituted,
            VariantArg::Rederived => HcVariant::Rederived,
        }
    }
}

impl From<Thm3Arg> for Thm3Variant {
    fn from(v: Thm3Arg) -> Self {
        match v {
            Thm3Arg::AsPrinted => Thm3Variant::AsPrinted,
            Thm3Arg::Mirrored => Thm3Variant::Mirrored,
        }
    }
}

/// Runs `f` on a pool of `jobs` workers (the default pool when `None`).
pub fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(CliError::Input("--jobs must be at least 1".into())),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| CliError::Internal(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

pub struct RunOutcome {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
    /// One-line summary for the terminal.
    pub summary: String,
}

fn input_error(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn wrong_kind(cmd: &str, got: &str, want: &str) -> CliError {
    input_error(format!("{cmd} needs a {want} scenario, got kind {got}"))
}

/// Executes every subcommand except `replay`. `seed_flag` follows the
/// precedence of [`resolve_seed`].
pub fn execute(cmd: &Command, out_dir: &Path, jobs: Option<usize>, seed_flag: Option<u64>) -> Result<RunOutcome> {
    let started = Instant::now();
    let mut cmd = cmd.clone();
    let input_path = cmd
        .input()
        .cloned()
        .ok_or_else(|| CliError::Internal("replay cannot be executed as a run".into()))?;
    let input_path = std::fs::canonicalize(&input_path).map_err(|source| CliError::Read {
        path: input_path.display().to_string(),
        source,
    })?;
    if let Some(p) = cmd.input_mut() {
        *p = input_path.clone();
    }
    let bytes = std::fs::read(&input_path).map_err(|source| CliError::Read {
        path: input_path.display().to_string(),
        source,
    })?;
    let input = InputDigest {
        path: input_path.display().to_string(),
        sha256: sha256_hex(&bytes),
    };

    let scn = match &cmd {
        Command::Plot { .. } => None,
        _ => Some(scenario::load(&input_path)?.0),
    };
    let fallback = match (&cmd, &scn) {
        (Command::Simulate { .. }, Some(Scenario::P2p(f))) => f.simulation.as_ref().and_then(|s| s.seed),
        (Command::Simulate { .. }, Some(Scenario::Mac(f))) => f.simulation.as_ref().and_then(|s| s.seed),
        _ => None,
    }
    .unwrap_or(DEFAULT_SEED);
    let seed = resolve_seed(seed_flag, fallback).map_err(CliError::Input)?;

    let mut out = OutputSet::new(out_dir)?;
    let summary = with_pool(jobs, || -> Result<String> {
        match (&cmd, scn.as_ref()) {
            (Command::BoundsTwrc { sweep, variant, .. }, Some(Scenario::TwrcGaussian(f))) => {
                bounds_twrc(f, *sweep, *variant, seed, &mut out)
            }
            (Command::BoundsDiamond { .. }, Some(Scenario::Diamond(f))) => bounds_diamond(f, &mut out),
            (Command::RegionMac { cor1, cor2, .. }, Some(Scenario::Mac(f))) => region_mac(f, *cor1, *cor2, &mut out),
            (
                Command::CheckThm1 {
                    optimize,
                    target,
                    aux_cap,
                    grid,
                    ..
                },
                Some(Scenario::P2p(f)),
            ) => thm1(f, *optimize, *target, *aux_cap, *grid, &mut out),
            (Command::CheckThm3 { variant, .. }, Some(Scenario::TwrcDiscrete(f))) => {
                let r = thm3_region_check(&f.channel, &f.spec, DEFAULT_MARGIN, (*variant).into())?;
                out.write_json("thm3.json", &r)?;
                Ok(format!("rates {:?}, satisfied {}", r.rates, r.satisfied))
            }
            (
                Command::Simulate {
                    n,
                    trials,
                    lemma1,
                    per_trial,
                    ..
                },
                Some(s @ (Scenario::P2p(_) | Scenario::Mac(_))),
            ) => {
                let opts = SimOpts {
                    n: n.clone(),
                    trials: *trials,
                    per_trial: *per_trial,
                    seed,
                };
                match s {
                    Scenario::P2p(f) if *lemma1 => lemma1_run(f, seed, &mut out),
                    Scenario::Mac(_) if *lemma1 => Err(input_error("--lemma1 needs a p2p scenario")),
                    Scenario::P2p(f) => simulate_p2p(f, &opts, &mut out),
                    Scenario::Mac(f) => simulate_mac(f, &opts, &mut out),
                    _ => unreachable!(),
                }
            }
            (Command::Plot { output, .. }, None) => plot(&bytes, output, &mut out),
            (c, Some(s)) => {
                let want = match c {
                    Command::BoundsTwrc { .. } => "twrc_gaussian",
                    Command::BoundsDiamond { .. } => "diamond",
                    Command::RegionMac { .. } => "mac",
                    Command::CheckThm1 { .. } => "p2p",
                    Command::CheckThm3 { .. } => "twrc_discrete",
                    _ => "p2p or mac",
                };
                Err(wrong_kind(c.name(), s.kind(), want))
            }
            (c, None) => Err(CliError::Internal(format!("{} has no scenario", c.name()))),
        }
    })??;

    let config = match &cmd {
        Command::Plot { .. } => None,
        _ => serde_json::from_slice(&bytes).ok(),
    };
    let manifest = RunManifest {
        subcommand: cmd.name().to_string(),
        command: cmd.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        jobs,
        input: Some(input),
        config,
        wall_clock_ms: started.elapsed().as_millis(),
        outputs: out.into_digests(),
    };
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    std::fs::write(&manifest_path, text).map_err(|source| CliError::Write {
        path: manifest_path.display().to_string(),
        source,
    })?;
    Ok(RunOutcome {
        manifest,
        manifest_path,
        summary,
    })
}

#[derive(Serialize)]
pub struct ReplayReport {
    pub manifest: String,
    pub replay_dir: String,
    pub seed: u64,
    pub files_compared: usize,
    pub identical: bool,
}

/// Re-runs the command recorded in `manifest_path` into `replay_dir` and
/// compares output digests. `$HYBRIDLAB_SEED` overrides the recorded seed.
pub fn replay(manifest_path: &Path, replay_dir: Option<&Path>, jobs: Option<usize>) -> Result<ReplayReport> {
    let m = read_manifest(manifest_path)?;
    let dir = match replay_dir {
        Some(d) => d.to_path_buf(),
        None => manifest_path.parent().unwrap_or(Path::new(".")).join("replay"),
    };
    if let Some(input) = &m.input {
        let bytes = std::fs::read(&input.path).map_err(|source| CliError::Read {
            path: input.path.clone(),
            source,
        })?;
        if sha256_hex(&bytes) != input.sha256 {
            return Err(CliError::ReplayMismatch(format!("input {} changed since the run", input.path)));
        }
    }
    let seed = resolve_seed(None, m.seed).map_err(CliError::Input)?;
    let outcome = execute(&m.command, &dir, jobs.or(m.jobs), Some(seed))?;
    let diffs = compare(&m.outputs, &outcome.manifest.outputs);
    if !diffs.is_empty() {
        return Err(CliError::ReplayMismatch(diffs.join("; ")));
    }
    Ok(ReplayReport {
        manifest: manifest_path.display().to_string(),
        replay_dir: dir.display().to_string(),
        seed,
        files_compared: m.outputs.len(),
        identical: true,
    })
}

#[derive(Serialize)]
struct SchemeRow {
    label: &'static str,
    #[serde(flatten)]
    result: OptimizedScheme,
}

#[derive(Serialize)]
struct TwrcReport {
    channel: Option<GaussianTwrcParams>,
    variant: HcVariant,
    schemes: Vec<SchemeRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<Vec<SweepRow>>,
    notes: Vec<String>,
}

fn bounds_twrc(f: &GaussFile, sweep: bool, variant: Option<VariantArg>, seed: u64, out: &mut OutputSet) -> Result<String> {
    let mut cfg = f.optimizer.clone();
    cfg.search.seed = seed;
    if let Some(v) = variant {
        cfg.variant = v.into();
    }
    if f.channel.is_none() && !sweep {
        return Err(input_error("scenario has no channel; add one or pass --sweep"));
    }
    let mut report = TwrcReport {
        channel: None,
        variant: cfg.variant,
        schemes: vec![],
        sweep: None,
        notes: vec!["cutset: two-cut outer bound, a derived reference curve".into()],
    };
    let mut summary = Vec::new();
    if let Some(ch) = &f.channel {
        let params = ch.params()?;
        report.channel = Some(params);
        let mut csv = String::from("scheme,r1,r2,sum,alpha,beta,sigma2\n");
        for scheme in [Scheme::Nnc, Scheme::Af, Scheme::HcSpecial, Scheme::HcGeneral, Scheme::Cutset] {
            let o = optimize_scheme(&params, scheme, &cfg)?;
            let p = o.params;
            let fmt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.9}"));
            csv.push_str(&format!(
                "{},{:.9},{:.9},{:.9},{},{},{}\n",
                scheme.label().split(' ').next().unwrap_or_default(),
                o.point.r1,
                o.point.r2,
                o.sum_rate,
                fmt(p.map(|p| p.alpha)),
                fmt(p.map(|p| p.beta)),
                fmt(p.map(|p| p.sigma2)),
            ));
            summary.push(format!("{}={:.4}", scheme.label(), o.sum_rate));
            report.schemes.push(SchemeRow {
                label: scheme.label(),
                result: o,
            });
        }
        let sum_of = |s: Scheme| {
            report
                .schemes
                .iter()
                .find(|r| r.result.point.scheme == s)
                .map_or(0.0, |r| r.result.sum_rate)
        };
        if sum_of(Scheme::HcGeneral) > sum_of(Scheme::Cutset) + 1e-9 {
            report.notes.push(format!(
                "hc_general ({:?} reading) exceeds the cutset reference; compare --variant rederived",
                cfg.variant
            ));
        }
        out.write("twrc.csv", csv.as_bytes())?;
    }
    if sweep {
        let s = f.sweep.clone().unwrap_or_default();
        let rows = fig8_sweep(s.power, &s.r_grid, s.path_loss_exp, &cfg)?;
        out.write("fig8.csv", sweep_csv(&rows).as_bytes())?;
        summary.push(format!("sweep over {} distances", rows.len()));
        report.sweep = Some(rows);
    }
    out.write_json("twrc.json", &report)?;
    Ok(summary.join(", "))
}

#[derive(Serialize)]
struct DiamondReport {
    hybrid: f64,
    adt: f64,
    cutset: f64,
    binding: [String; 3],
    grid_denominator: usize,
    details: [DetBound; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    general_bound: Option<BoundReport>,
}

fn bounds_diamond(f: &scenario::DiamondFile, out: &mut OutputSet) -> Result<String> {
    let ch = f.channel()?;
    let b = det_diamond_bounds(&ch, &f.search)?;
    let general_bound = match &f.spec {
        Some(spec) => Some(thm4_bound(&ch, spec, DEFAULT_MARGIN)?),
        None => None,
    };
    let r = DiamondReport {
        hybrid: b.hybrid.value,
        adt: b.independent.value,
        cutset: b.cutset.value,
        binding: [
            b.hybrid.binding_constraint.clone(),
            b.independent.binding_constraint.clone(),
            b.cutset.binding_constraint.clone(),
        ],
        grid_denominator: b.grid_denominator,
        details: [b.hybrid, b.independent, b.cutset],
        general_bound,
    };
    out.write_json("diamond.json", &r)?;
    Ok(format!("hybrid {:.6}, adt {:.6}, cutset {:.6}", r.hybrid, r.adt, r.cutset))
}

#[derive(Serialize)]
struct Reduction {
    /// The general region evaluated at the substituted spec.
    general: BoundReport,
    /// The reduced-form constraints.
    reduced: Vec<Constraint>,
    reduced_distortions: Vec<f64>,
    /// Largest `|lhs - lhs'|`, `|rhs - rhs'|` over matching constraints.
    max_abs_diff: f64,
}

fn max_diff(general: &BoundReport, reduced: &[Constraint]) -> Result<f64> {
    if general.constraints.len() != reduced.len() {
        return Err(CliError::Internal("general and reduced constraint counts differ".into()));
    }
    Ok(general
        .constraints
        .iter()
        .zip(reduced)
        .map(|(g, r)| (g.lhs - r.lhs).abs().max((g.rhs - r.rhs).abs()))
        .fold(0.0, f64::max))
}

#[derive(Serialize, Default)]
struct MacRegionReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    region: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lossless: Option<Reduction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distributed: Option<Reduction>,
}

fn region_mac(f: &MacFile, cor1: bool, cor2: bool, out: &mut OutputSet) -> Result<String> {
    let scn = f.scenario()?;
    let mut r = MacRegionReport::default();
    let mut summary = Vec::new();
    if let Some(spec) = &f.spec {
        let rep = thm2_region_check(&scn, spec, DEFAULT_MARGIN)?;
        summary.push(format!("region satisfied {}", rep.satisfied));
        r.region = Some(rep);
    }
    if cor1 {
        let c = f.cor1.as_ref().ok_or_else(|| input_error("--cor1 needs a cor1 section"))?;
        let spec = lossless_spec(&scn, &c.time_sharing, &c.inputs)?;
        let general = thm2_region_check(&scn, &spec, DEFAULT_MARGIN)?;
        let reduced = lossless_constraints(&scn, &c.time_sharing, &c.inputs, DEFAULT_MARGIN)?;
        let max_abs_diff = max_diff(&general, &reduced)?;
        summary.push(format!("lossless max diff {max_abs_diff:.3e}"));
        r.lossless = Some(Reduction {
            reduced_distortions: general.expected_distortions.clone(),
            general,
            reduced,
            max_abs_diff,
        });
    }
    if cor2 {
        let c = f.cor2.as_ref().ok_or_else(|| input_error("--cor2 needs a cor2 section"))?;
        let spec = distributed_spec(&scn, &c.time_sharing, &c.quantizers, &c.recon)?;
        let general = thm2_region_check(&scn, &spec, DEFAULT_MARGIN)?;
        let reduced = distributed_report(&scn, &c.time_sharing, &c.quantizers, &c.recon, DEFAULT_MARGIN)?;
        let max_abs_diff = max_diff(&general, &reduced.constraints)?;
        summary.push(format!("distributed max diff {max_abs_diff:.3e}"));
        r.distributed = Some(Reduction {
            reduced_distortions: reduced.expected_distortions,
            general,
            reduced: reduced.constraints,
            max_abs_diff,
        });
    }
    if summary.is_empty() {
        return Err(input_error("nothing to evaluate: add a spec or pass --cor1 / --cor2"));
    }
    out.write_json("mac_region.json", &r)?;
    Ok(summary.join(", "))
}

fn thm1(
    f: &P2pFile,
    optimize: bool,
    target: Option<f64>,
    aux_cap: Option<usize>,
    grid: Option<usize>,
    out: &mut OutputSet,
) -> Result<String> {
    let scn = f.scenario()?;
    if optimize {
        let mut cfg = f.search.clone();
        if aux_cap.is_some() {
            cfg.aux_cap = aux_cap;
        }
        if let Some(g) = grid {
            cfg.grid_denominator = g;
        }
        let target = target
            .or(f.target_distortion)
            .ok_or_else(|| input_error("--optimize needs --target or target_distortion"))?;
        let o = thm1_optimize(&scn, target, &cfg)?;
        out.write_json("thm1.json", &o)?;
        return Ok(format!(
            "feasible {} at D = {target}, min feasible distortion {:?}",
            o.feasible, o.min_feasible_distortion
        ));
    }
    let spec = f
        .spec
        .as_ref()
        .ok_or_else(|| input_error("check-thm1 needs a spec or --optimize"))?;
    let r = check_thm1(&scn, spec, DEFAULT_MARGIN)?;
    out.write_json("thm1.json", &r)?;
    Ok(format!("satisfied {}, slack {:?}", r.satisfied, r.value))
}

struct SimOpts {
    n: Vec<usize>,
    trials: Option<usize>,
    per_trial: bool,
    seed: u64,
}

#[derive(Serialize)]
struct SimReport<R> {
    kind: &'static str,
    seed: u64,
    rows: Vec<R>,
}

fn block_lengths(opts: &SimOpts, section: &[usize]) -> Result<Vec<usize>> {
    let ns = if opts.n.is_empty() { section.to_vec() } else { opts.n.clone() };
    if ns.is_empty() {
        return Err(input_error("no block length given"));
    }
    Ok(ns)
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
}

fn simulate_p2p(f: &P2pFile, opts: &SimOpts, out: &mut OutputSet) -> Result<String> {
    let scn = f.scenario()?;
    let spec = f.spec.as_ref().ok_or_else(|| input_error("simulate needs a spec"))?;
    let mut sim = f
        .simulation
        .clone()
        .ok_or_else(|| input_error("simulate needs a simulation section"))?;
    if let Some(t) = opts.trials {
        sim.trials = t;
    }
    let ns = block_lengths(opts, &sim.n)?;
    // Reject oversized codebooks before any trial runs.
    for &n in &ns {
        let k = codebook_size(n, spec.rate)?;
        if k.saturating_mul(n as u64) > sim.symbol_cap {
            return Err(hybridlab_core::Error::ResourceCap(format!(
                "{k} codewords of length {n} exceed the {}-symbol cap",
                sim.symbol_cap
            ))
            .into());
        }
    }
    let mut rows: Vec<P2pReport> = Vec::new();
    for &n in &ns {
        let run = run_p2p(&sim.trial_config(n, opts.seed), &scn, spec)?;
        if opts.per_trial {
            let lines = run
                .outcomes
                .iter()
                .map(|o| {
                    vec![
                        o.trial.to_string(),
                        o.seed.to_string(),
                        o.e1.to_string(),
                        o.e2_not_e1.to_string(),
                        o.e3.to_string(),
                        o.error.to_string(),
                        o.index.to_string(),
                        o.decoded.to_string(),
                        o.distortion.to_string(),
                    ]
                })
                .collect();
            let header = ["trial", "seed", "e1", "e2_not_e1", "e3", "error", "index", "decoded", "distortion"];
            out.write(&format!("trials_n{n}.csv"), &csv_bytes(&header, lines)?)?;
        }
        rows.push(run.report);
    }
    let header = [
        "n",
        "trials",
        "rate",
        "codebook_size",
        "p_error",
        "p_error_hw",
        "p_e1",
        "p_e1_hw",
        "p_e2_not_e1",
        "p_e3",
        "mean_distortion",
        "mean_distortion_se",
    ];
    let lines = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.trials.to_string(),
                r.rate.to_string(),
                r.codebook_size.to_string(),
                r.p_error.mean.to_string(),
                r.p_error.half_width.to_string(),
                r.p_e1.mean.to_string(),
                r.p_e1.half_width.to_string(),
                r.p_e2_not_e1.mean.to_string(),
                r.p_e3.mean.to_string(),
                r.mean_distortion.mean.to_string(),
                r.mean_distortion.std_error.to_string(),
            ]
        })
        .collect();
    out.write("simulate.csv", &csv_bytes(&header, lines)?)?;
    let summary = rows
        .iter()
        .map(|r| format!("n={} P(E)={:.4} D={:.4}", r.n, r.p_error.mean, r.mean_distortion.mean))
        .collect::<Vec<_>>()
        .join("; ");
    out.write_json(
        "simulate.json",
        &SimReport {
            kind: "p2p",
            seed: opts.seed,
            rows,
        },
    )?;
    Ok(summary)
}

fn simulate_mac(f: &MacFile, opts: &SimOpts, out: &mut OutputSet) -> Result<String> {
    let scn = f.scenario()?;
    let spec = f.spec.as_ref().ok_or_else(|| input_error("simulate needs a spec"))?;
    let mut sim = f
        .simulation
        .clone()
        .ok_or_else(|| input_error("simulate needs a simulation section"))?;
    if let Some(t) = opts.trials {
        sim.trials = t;
    }
    let ns = block_lengths(opts, &sim.n)?;
    for &n in &ns {
        let k = [codebook_size(n, spec.rates[0])?, codebook_size(n, spec.rates[1])?];
        let symbols = k[0].saturating_mul(k[1]).max(k[0] + k[1]).saturating_mul(n as u64);
        if symbols > sim.symbol_cap {
            return Err(hybridlab_core::Error::ResourceCap(format!(
                "pair search over {} x {} codewords of length {n} exceeds the {}-symbol cap",
                k[0], k[1], sim.symbol_cap
            ))
            .into());
        }
    }
    let mut rows: Vec<MacReport> = Vec::new();
    for &n in &ns {
        let run = run_mac(&sim.trial_config(n, opts.seed), &scn, spec)?;
        if opts.per_trial {
            let lines = run
                .outcomes
                .iter()
                .map(|o| {
                    let mut v = vec![o.trial.to_string(), o.seed.to_string()];
                    v.extend(o.events.iter().map(|e| e.to_string()));
                    v.push(o.error.to_string());
                    v.extend(o.indices.iter().chain(&o.decoded).map(|i| i.to_string()));
                    v.extend(o.distortions.iter().map(|d| d.to_string()));
                    v
                })
                .collect();
            let header = [
                "trial", "seed", "e1", "e2", "e3", "e4", "e5", "e6", "error", "m1", "m2", "m1_hat", "m2_hat", "d1",
                "d2",
            ];
            out.write(&format!("trials_n{n}.csv"), &csv_bytes(&header, lines)?)?;
        }
        rows.push(run.report);
    }
    let header = [
        "n", "trials", "rate1", "rate2", "k1", "k2", "p_error", "p_error_hw", "p_e1", "p_e2", "p_e3", "p_e4", "p_e5",
        "p_e6", "d1", "d2",
    ];
    let lines = rows
        .iter()
        .map(|r| {
            let mut v = vec![
                r.n.to_string(),
                r.trials.to_string(),
                r.rates[0].to_string(),
                r.rates[1].to_string(),
                r.codebook_sizes[0].to_string(),
                r.codebook_sizes[1].to_string(),
                r.p_error.mean.to_string(),
                r.p_error.half_width.to_string(),
            ];
            v.extend(r.events.iter().map(|e| e.mean.to_string()));
            v.extend(r.mean_distortions.iter().map(|d| d.mean.to_string()));
            v
        })
        .collect();
    out.write("simulate.csv", &csv_bytes(&header, lines)?)?;
    let summary = rows
        .iter()
        .map(|r| format!("n={} P(E)={:.4}", r.n, r.p_error.mean))
        .collect::<Vec<_>>()
        .join("; ");
    out.write_json(
        "simulate.json",
        &SimReport {
            kind: "mac",
            seed: opts.seed,
            rows,
        },
    )?;
    Ok(summary)
}

fn lemma1_run(f: &P2pFile, seed: u64, out: &mut OutputSet) -> Result<String> {
    let l = f
        .lemma1
        .as_ref()
        .ok_or_else(|| input_error("--lemma1 needs a lemma1 section"))?;
    let ps = l.joint.marginal_pmf(1)?;
    if ps.alphabet_size() != f.source.alphabet_size()
        || ps.probs().iter().zip(f.source.probs()).any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(input_error("lemma1 joint p(u,s) must have the scenario source as its S marginal"));
    }
    let cfg = Lemma1Config {
        n: l.n,
        rate: l.rate,
        joint: l.joint.clone(),
        epsilon_prime: l.epsilon_prime,
        outer_trials: l.outer_trials,
        min_count: l.min_count,
        seed,
    };
    let r: Lemma1Report = lemma1_check(&cfg)?;
    out.write_json("lemma1.json", &r)?;
    Ok(format!(
        "{} cells, max ratio {:?}, inconclusive {}",
        r.cells.len(),
        r.max_ratio,
        r.inconclusive
    ))
}

fn plot(bytes: &[u8], output: &str, out: &mut OutputSet) -> Result<String> {
    if output.is_empty() || output.contains(['/', '\\']) || output == "." || output == ".." {
        return Err(input_error(format!("--output must be a plain file name, got {output:?}")));
    }
    let text = std::str::from_utf8(bytes).map_err(|e| input_error(e.to_string()))?;
    let table = parse_csv(text)?;
    out.write(output, render_svg(&table).as_bytes())?;
    Ok(format!("{} series over {} points", table.series.len(), table.x.len()))
}
