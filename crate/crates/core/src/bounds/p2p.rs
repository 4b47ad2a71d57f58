//! Point-to-point hybrid coding: the condition `I(S;U) < I(U;Y)` for a given
//! code specification, and a grid search over specifications.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{BoundReport, Constraint};
use super::{check_kernel, check_table, table_kernel};
use crate::error::{Error, Result};
use crate::infotheory::{compose_joint, ConditionalPmf, DistortionMeasure, JointPmf, Pmf, Stage};
use crate::search::{better, enumerate_simplex, simplex_count, DEFAULT_GRID_CAP};

/// Axes of the joint built by [`thm1_joint`].
pub const AXIS_S: usize = 0;
pub const AXIS_U: usize = 1;
pub const AXIS_X: usize = 2;
pub const AXIS_Y: usize = 3;
pub const AXIS_SHAT: usize = 4;

/// Source, channel and distortion measure of a point-to-point problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct P2pScenario {
    pub source: Pmf,
    pub channel: ConditionalPmf,
    pub distortion: DistortionMeasure,
}

impl P2pScenario {
    pub fn new(source: Pmf, channel: ConditionalPmf, distortion: DistortionMeasure) -> Result<Self> {
        let s = Self {
            source,
            channel,
            distortion,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.distortion.source_size() != self.source.alphabet_size() {
            return Err(Error::DimensionMismatch(format!(
                "distortion table has {} source rows, source has {} symbols",
                self.distortion.source_size(),
                self.source.alphabet_size()
            )));
        }
        Ok(())
    }

    pub fn source_size(&self) -> usize {
        self.source.alphabet_size()
    }

    pub fn input_size(&self) -> usize {
        self.channel.inputs()
    }

    pub fn output_size(&self) -> usize {
        self.channel.outputs()
    }

    pub fn reconstruction_size(&self) -> usize {
        self.distortion.reconstruction_size()
    }
}

/// Auxiliary kernel `p(u|s)`, encoder map `x(u,s)`, decoder map `ŝ(u,y)` and
/// codebook rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridCodeSpec {
    pub aux_kernel: ConditionalPmf,
    /// `enc_map[u][s]`
    pub enc_map: Vec<Vec<usize>>,
    /// `dec_map[u][y]`
    pub dec_map: Vec<Vec<usize>>,
    #[serde(default)]
    pub rate: f64,
}

impl HybridCodeSpec {
    pub fn aux_size(&self) -> usize {
        self.aux_kernel.outputs()
    }

    pub fn is_uncoded(&self) -> bool {
        self.aux_size() == 1
    }

    pub fn validate(&self, scn: &P2pScenario) -> Result<()> {
        check_kernel(&self.aux_kernel, scn.source_size(), None, "aux kernel p(u|s)")?;
        let nu = self.aux_size();
        check_table(&self.enc_map, nu, scn.source_size(), scn.input_size(), "encoder map x(u,s)")?;
        check_table(&self.dec_map, nu, scn.output_size(), scn.reconstruction_size(), "decoder map ŝ(u,y)")?;
        if !(self.rate >= 0.0) || !self.rate.is_finite() {
            return Err(Error::InvalidParameter(format!("rate {}", self.rate)));
        }
        Ok(())
    }

    /// `|U| = 1`: symbol-by-symbol transmission `x(s)`, reconstruction `ŝ(y)`.
    pub fn uncoded(enc: Vec<usize>, dec: Vec<usize>) -> Result<Self> {
        let aux_kernel = ConditionalPmf::new(vec![vec![1.0]; enc.len()])?;
        Ok(Self {
            aux_kernel,
            enc_map: vec![enc],
            dec_map: vec![dec],
            rate: 0.0,
        })
    }

    /// Separate source and channel coding: `U = (X, Ŝ)` with `X` drawn from
    /// `input` independently of `(S, Ŝ)` and `Ŝ` from the test channel.
    /// The auxiliary index is `x * |Ŝ| + ŝ`.
    pub fn separation(input: &Pmf, test_channel: &ConditionalPmf, output_size: usize) -> Result<Self> {
        let nx = input.alphabet_size();
        let nt = test_channel.outputs();
        let ns = test_channel.inputs();
        let rows = (0..ns)
            .map(|s| {
                (0..nx * nt)
                    .map(|u| input.get(u / nt) * test_channel.prob(s, u % nt))
                    .collect()
            })
            .collect();
        Ok(Self {
            aux_kernel: ConditionalPmf::new(rows)?,
            enc_map: (0..nx * nt).map(|u| vec![u / nt; ns]).collect(),
            dec_map: (0..nx * nt).map(|u| vec![u % nt; output_size]).collect(),
            rate: 0.0,
        })
    }
}

/// Joint pmf of `(S, U, X, Y, Ŝ)`.
pub fn thm1_joint(scn: &P2pScenario, spec: &HybridCodeSpec) -> Result<JointPmf> {
    scn.validate()?;
    spec.validate(scn)?;
    let enc = table_kernel(&spec.enc_map, scn.input_size())?;
    let dec = table_kernel(&spec.dec_map, scn.reconstruction_size())?;
    compose_joint(
        &JointPmf::from_pmf(&scn.source),
        &[
            Stage::new(&[AXIS_S], &spec.aux_kernel),
            Stage::new(&[AXIS_U, AXIS_S], &enc),
            Stage::new(&[AXIS_X], &scn.channel),
            Stage::new(&[AXIS_U, AXIS_Y], &dec),
        ],
    )
}

pub const THM1_CONSTRAINT: &str = "I(S;U) < I(U;Y)";

/// Evaluates `I(S;U)`, `I(U;Y)` and `E d(S, ŝ(U,Y))`. The report's `value`
/// is the slack `I(U;Y) - I(S;U)`. With `|U| = 1` the condition is replaced
/// by the nonstrict uncoded one and always holds.
pub fn check_thm1(scn: &P2pScenario, spec: &HybridCodeSpec, margin: f64) -> Result<BoundReport> {
    let joint = thm1_joint(scn, spec)?;
    let isu = joint.mutual_information(&[AXIS_S], &[AXIS_U])?;
    let iuy = joint.mutual_information(&[AXIS_U], &[AXIS_Y])?;
    let dist = joint.expectation(AXIS_S, AXIS_SHAT, &scn.distortion)?;
    let mut c = Constraint::strict(THM1_CONSTRAINT, isu, iuy, margin);
    let mut notes = vec![];
    if spec.is_uncoded() {
        c.satisfied = true;
        notes.push("|U| = 1: uncoded transmission, rate condition not required".to_string());
    }
    let mut report = BoundReport::from_constraints("hybrid coding point-to-point", vec![c]);
    report.value = Some(iuy - isu);
    report.expected_distortions = vec![dist];
    report.notes = notes;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thm1SearchConfig {
    /// Largest auxiliary alphabet searched. `None` uses `|S||X| + 2`,
    /// truncated to the largest size that fits the candidate cap.
    pub aux_cap: Option<usize>,
    pub grid_denominator: usize,
    pub margin: f64,
    pub max_candidates: u64,
}

impl Default for Thm1SearchConfig {
    fn default() -> Self {
        Self {
            aux_cap: None,
            grid_denominator: 12,
            margin: super::DEFAULT_MARGIN,
            max_candidates: 100_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm1Optimum {
    pub target_distortion: f64,
    pub feasible: bool,
    pub aux_cap: usize,
    pub grid_denominator: usize,
    pub candidates: u64,
    /// Best slack `I(U;Y) - I(S;U)` among feasible candidates.
    pub slack: Option<f64>,
    pub spec: Option<HybridCodeSpec>,
    pub report: Option<BoundReport>,
    /// Smallest expected distortion among candidates meeting the rate
    /// condition, regardless of the target.
    pub min_feasible_distortion: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Candidate key: (|U|, kernel index, encoder index); smaller wins ties.
type Key = (usize, u64, u64);

#[derive(Clone, Copy)]
struct Acc {
    best: Option<(f64, Key)>,
    min_dist: f64,
}

impl Acc {
    const EMPTY: Acc = Acc {
        best: None,
        min_dist: f64::INFINITY,
    };

    fn merge(self, other: Acc) -> Acc {
        let best = match (self.best, other.best) {
            (Some(a), Some(b)) => Some(better(a, b)),
            (a, b) => a.or(b),
        };
        Acc {
            best,
            min_dist: self.min_dist.min(other.min_dist),
        }
    }
}

/// Encoder rows enumerate all maps `s -> x`; row `r` sends `s` to digit `s`
/// of `r` in base `|X|`, most significant first.
fn enc_row(r: u64, ns: usize, nx: usize) -> Vec<usize> {
    let mut out = vec![0; ns];
    let mut r = r;
    for s in (0..ns).rev() {
        out[s] = (r % nx as u64) as usize;
        r /= nx as u64;
    }
    out
}

fn digits(mut index: u64, base: u64, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (index % base) as usize;
        index /= base;
    }
    out
}

struct Search<'a> {
    scn: &'a P2pScenario,
    target: f64,
    margin: f64,
    enc_rows: Vec<Vec<usize>>,
    h_s: f64,
}

/// Per-(u, encoder row) sufficient statistics for one kernel.
struct Tables {
    /// `p(u, y)` for each `(u, row)`, flattened `[(u * rows + row) * ny + y]`.
    puy: Vec<f64>,
    /// `sum_y -p(u,y) log p(u,y)` per `(u, row)`.
    h_uy: Vec<f64>,
    /// Smallest reachable `E d` contribution per `(u, row)`.
    dist: Vec<f64>,
}

impl<'a> Search<'a> {
    fn joint_su(&self, grid: &[Vec<f64>], kernel_digits: &[usize], k: usize) -> Vec<f64> {
        let ns = self.scn.source_size();
        let mut psu = vec![0.0; ns * k];
        for s in 0..ns {
            for u in 0..k {
                psu[s * k + u] = self.scn.source.get(s) * grid[kernel_digits[s]][u];
            }
        }
        psu
    }

    /// Cost of reconstructing with `t` given `(u, y)` under encoder row `row`.
    fn recon_cost(&self, psu: &[f64], k: usize, u: usize, row: &[usize], y: usize, t: usize) -> f64 {
        let scn = self.scn;
        (0..scn.source_size())
            .map(|s| psu[s * k + u] * scn.channel.prob(row[s], y) * scn.distortion.get(s, t))
            .sum()
    }

    fn best_recon(&self, psu: &[f64], k: usize, u: usize, row: &[usize], y: usize) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for t in 0..self.scn.reconstruction_size() {
            let c = self.recon_cost(psu, k, u, row, y, t);
            if c < best.1 {
                best = (t, c);
            }
        }
        best
    }

    fn tables(&self, psu: &[f64], k: usize) -> Tables {
        let scn = self.scn;
        let (ns, ny) = (scn.source_size(), scn.output_size());
        let rows = self.enc_rows.len();
        let mut t = Tables {
            puy: vec![0.0; k * rows * ny],
            h_uy: vec![0.0; k * rows],
            dist: vec![0.0; k * rows],
        };
        for u in 0..k {
            for (r, row) in self.enc_rows.iter().enumerate() {
                let cell = u * rows + r;
                for y in 0..ny {
                    let p: f64 = (0..ns).map(|s| psu[s * k + u] * scn.channel.prob(row[s], y)).sum();
                    t.puy[cell * ny + y] = p;
                    t.h_uy[cell] += plogp(p);
                    t.dist[cell] += self.best_recon(psu, k, u, row, y).1;
                }
            }
        }
        t
    }

    fn evaluate_kernel(&self, grid: &[Vec<f64>], k: usize, kernel_index: u64) -> Acc {
        let ns = self.scn.source_size();
        let ny = self.scn.output_size();
        let kd = digits(kernel_index, grid.len() as u64, ns);
        let psu = self.joint_su(grid, &kd, k);
        let pu: Vec<f64> = (0..k).map(|u| (0..ns).map(|s| psu[s * k + u]).sum()).collect();
        let h_u: f64 = pu.iter().map(|&p| plogp(p)).sum();
        let h_su: f64 = psu.iter().map(|&p| plogp(p)).sum();
        let i_su = self.h_s + h_u - h_su;
        let t = self.tables(&psu, k);
        let rows = self.enc_rows.len();

        let mut acc = Acc::EMPTY;
        let mut digit = vec![0usize; k];
        // Prefix sums over u of p(y), H(U,Y) and distortion.
        let mut py = vec![vec![0.0; ny]; k + 1];
        let mut h = vec![0.0; k + 1];
        let mut d = vec![0.0; k + 1];
        let refill = |from: usize, digit: &[usize], py: &mut Vec<Vec<f64>>, h: &mut Vec<f64>, d: &mut Vec<f64>| {
            for l in from..k {
                let cell = l * rows + digit[l];
                for y in 0..ny {
                    py[l + 1][y] = py[l][y] + t.puy[cell * ny + y];
                }
                h[l + 1] = h[l] + t.h_uy[cell];
                d[l + 1] = d[l] + t.dist[cell];
            }
        };
        refill(0, &digit, &mut py, &mut h, &mut d);
        let mut enc_index = 0u64;
        loop {
            let h_y: f64 = py[k].iter().map(|&p| plogp(p)).sum();
            let slack = if k == 1 { 0.0 } else { h_u + h_y - h[k] - i_su };
            let rate_ok = k == 1 || slack > self.margin;
            if rate_ok {
                acc.min_dist = acc.min_dist.min(d[k]);
                if d[k] <= self.target + 1e-12 {
                    acc = acc.merge(Acc {
                        best: Some((slack, (k, kernel_index, enc_index))),
                        min_dist: f64::INFINITY,
                    });
                }
            }
            // Advance the odometer; the last digit moves fastest.
            let mut l = k;
            loop {
                if l == 0 {
                    return acc;
                }
                l -= 1;
                digit[l] += 1;
                if digit[l] < rows {
                    break;
                }
                digit[l] = 0;
            }
            refill(l, &digit, &mut py, &mut h, &mut d);
            enc_index += 1;
        }
    }

    fn reconstruct(&self, grid: &[Vec<f64>], key: Key) -> Result<HybridCodeSpec> {
        let (k, kernel_index, enc_index) = key;
        let ns = self.scn.source_size();
        let ny = self.scn.output_size();
        let kd = digits(kernel_index, grid.len() as u64, ns);
        let psu = self.joint_su(grid, &kd, k);
        let ed = digits(enc_index, self.enc_rows.len() as u64, k);
        let enc_map: Vec<Vec<usize>> = ed.iter().map(|&r| self.enc_rows[r].clone()).collect();
        let dec_map = (0..k)
            .map(|u| (0..ny).map(|y| self.best_recon(&psu, k, u, &enc_map[u], y).0).collect())
            .collect();
        let aux_kernel = ConditionalPmf::new(kd.iter().map(|&g| grid[g].clone()).collect())?;
        Ok(HybridCodeSpec {
            aux_kernel,
            enc_map,
            dec_map,
            rate: 0.0,
        })
    }
}

fn candidates_for(k: usize, m: usize, ns: usize, enc_rows: u64) -> u64 {
    let kernels = simplex_count(k, m).saturating_pow(ns as u32);
    kernels.saturating_mul(enc_rows.saturating_pow(k as u32))
}

/// Grid search over hybrid code specifications maximizing the slack
/// `I(U;Y) - I(S;U)` subject to `E d <= target`.
///
/// Aux kernels range over rows on the simplex grid of resolution
/// `1/grid_denominator`, encoder maps over all tables. For a fixed kernel and
/// encoder the slack does not depend on the decoder, so the decoder is the
/// per-`(u, y)` distortion minimizer (smallest symbol on ties); this is the
/// exhaustive decoder search restricted to the one map it can select.
pub fn thm1_optimize(scn: &P2pScenario, target: f64, cfg: &Thm1SearchConfig) -> Result<Thm1Optimum> {
    scn.validate()?;
    if cfg.grid_denominator == 0 {
        return Err(Error::InvalidParameter("grid denominator must be positive".into()));
    }
    if !target.is_finite() {
        return Err(Error::InvalidParameter(format!("distortion target {target}")));
    }
    let (ns, nx) = (scn.source_size(), scn.input_size());
    let m = cfg.grid_denominator;
    let enc_count = (nx as u64).checked_pow(ns as u32).filter(|&c| c <= 1 << 20).ok_or_else(|| {
        Error::ResourceCap(format!("{nx}^{ns} encoder rows is too many to enumerate"))
    })?;
    let mut notes = vec![];
    let aux_cap = match cfg.aux_cap {
        Some(0) => return Err(Error::InvalidParameter("aux_cap must be at least 1".into())),
        Some(cap) => {
            let total = (1..=cap).fold(0u64, |a, k| a.saturating_add(candidates_for(k, m, ns, enc_count)));
            if total > cfg.max_candidates {
                return Err(Error::ResourceCap(format!(
                    "|U| <= {cap} at grid 1/{m} needs {total} candidates, cap is {}",
                    cfg.max_candidates
                )));
            }
            cap
        }
        None => {
            let wanted = ns * nx + 2;
            let mut total = 0u64;
            let mut cap = 0;
            for k in 1..=wanted {
                total = total.saturating_add(candidates_for(k, m, ns, enc_count));
                if total > cfg.max_candidates {
                    break;
                }
                cap = k;
            }
            if cap == 0 {
                return Err(Error::ResourceCap("even |U| = 1 exceeds the candidate cap".into()));
            }
            if cap < wanted {
                notes.push(format!("|U| cap truncated from {wanted} to {cap} by the candidate cap"));
            }
            cap
        }
    };

    let search = Search {
        scn,
        target,
        margin: cfg.margin,
        enc_rows: (0..enc_count).map(|r| enc_row(r, ns, nx)).collect(),
        h_s: scn.source.entropy(),
    };
    let mut total = Acc::EMPTY;
    let mut grids = vec![];
    let mut candidates = 0u64;
    for k in 1..=aux_cap {
        let grid = enumerate_simplex(k, m, DEFAULT_GRID_CAP)?;
        let kernels = (grid.len() as u64).pow(ns as u32);
        candidates += candidates_for(k, m, ns, enc_count);
        let acc = (0..kernels)
            .into_par_iter()
            .map(|ki| search.evaluate_kernel(&grid, k, ki))
            .reduce(|| Acc::EMPTY, Acc::merge);
        total = total.merge(acc);
        grids.push(grid);
    }

    let mut out = Thm1Optimum {
        target_distortion: target,
        feasible: false,
        aux_cap,
        grid_denominator: m,
        candidates,
        slack: None,
        spec: None,
        report: None,
        min_feasible_distortion: total.min_dist.is_finite().then_some(total.min_dist),
        notes,
    };
    if let Some((slack, key)) = total.best {
        let mut spec = search.reconstruct(&grids[key.0 - 1], key)?;
        let report = check_thm1(scn, &spec, cfg.margin)?;
        let isu = report.constraints[0].lhs;
        let iuy = report.constraints[0].rhs;
        if key.0 > 1 && ((iuy - isu) - slack).abs() > 1e-9 {
            return Err(Error::Invariant(format!(
                "search slack {slack} disagrees with evaluated slack {}",
                iuy - isu
            )));
        }
        if !report.satisfied || report.expected_distortions[0] > target + 1e-9 {
            return Err(Error::Invariant("optimizer returned a spec failing its own check".into()));
        }
        if key.0 > 1 {
            spec.rate = 0.5 * (isu + iuy);
        }
        out.feasible = true;
        out.slack = Some(if key.0 == 1 { 0.0 } else { iuy - isu });
        out.spec = Some(spec);
        out.report = Some(report);
    }
    Ok(out)
}
