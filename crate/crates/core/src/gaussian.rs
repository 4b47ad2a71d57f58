//! Gaussian two-way relay channel: closed-form rates of the general hybrid
//! scheme over `(alpha, beta, sigma2)`, its quantize-forward, amplify-forward
//! and analog-quantize special cases, a two-cut outer bound, parameter
//! optimization and the distance sweep.
//!
//! SNRs follow `S_jk = g_jk^2 P`: node `j` receiving from node `k`, with the
//! relay as node 3. Rates are in bits per transmission.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::{better, coordinate_descent, golden_refine, stream_rng, triangle_grid, SearchConfig};

/// `C(x) = 1/2 log2(1 + x)`.
pub fn gauss_c(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("C(x) needs x >= 0, got {x}")));
    }
    Ok(c(x))
}

fn c(x: f64) -> f64 {
    0.5 * x.ln_1p() / std::f64::consts::LN_2
}

fn half_log2(ratio: f64) -> f64 {
    0.5 * ratio.log2()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianTwrcParams {
    pub s13: f64,
    pub s23: f64,
    pub s31: f64,
    pub s32: f64,
}

impl GaussianTwrcParams {
    pub fn new(s13: f64, s23: f64, s31: f64, s32: f64) -> Result<Self> {
        let p = Self { s13, s23, s31, s32 };
        p.validate()?;
        Ok(p)
    }

    /// SNRs `g^2 P` from amplitude gains `[g13, g23, g31, g32]`.
    pub fn from_gains(gains: [f64; 4], power: f64) -> Result<Self> {
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::InvalidParameter(format!("power must be positive, got {power}")));
        }
        let [g13, g23, g31, g32] = gains;
        Self::new(g13 * g13 * power, g23 * g23 * power, g31 * g31 * power, g32 * g32 * power)
    }

    /// Both SNRs and gains given: they must agree within 1e-9.
    pub fn check_gains(&self, gains: [f64; 4], power: f64) -> Result<()> {
        let derived = Self::from_gains(gains, power)?;
        let pairs = [
            (self.s13, derived.s13),
            (self.s23, derived.s23),
            (self.s31, derived.s31),
            (self.s32, derived.s32),
        ];
        if pairs.iter().any(|(a, b)| (a - b).abs() > 1e-9) {
            return Err(Error::InvalidParameter(format!(
                "SNRs {self:?} disagree with gains {gains:?} at power {power}"
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("S13", self.s13), ("S23", self.s23), ("S31", self.s31), ("S32", self.s32)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be a finite SNR >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Roles swapped between the two terminals.
    pub fn swapped(&self) -> Self {
        Self {
            s13: self.s23,
            s23: self.s13,
            s31: self.s32,
            s32: self.s31,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub alpha: f64,
    pub beta: f64,
    pub sigma2: f64,
}

impl SchemeParams {
    pub fn new(alpha: f64, beta: f64, sigma2: f64) -> Result<Self> {
        let p = Self { alpha, beta, sigma2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_sigma2(self.sigma2)?;
        let ok = (0.0..=1.0).contains(&self.alpha)
            && (0.0..=1.0).contains(&self.beta)
            && self.alpha + self.beta <= 1.0 + 1e-12;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "need alpha, beta in [0,1] with alpha + beta <= 1, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2 > 0.0) || sigma2.is_nan() {
        return Err(Error::InvalidParameter(format!("sigma2 must be positive, got {sigma2}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Quantize-forward at the relay (noisy network coding).
    Nnc,
    /// Amplify-forward.
    Af,
    /// Analog transmission plus quantization (`alpha = 0`, `beta = 1`).
    HcSpecial,
    /// General hybrid scheme over `(alpha, beta, sigma2)`.
    HcGeneral,
    /// Two-cut outer bound; a derived reference.
    Cutset,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Nnc => "nnc",
            Scheme::Af => "af",
            Scheme::HcSpecial => "hc_special",
            Scheme::HcGeneral => "hc_general",
            Scheme::Cutset => "cutset (derived reference)",
        }
    }
}

/// Rates of one scheme. `binding[j]` is the index (0 or 1) of the term that
/// attains the minimum for `R_{j+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub scheme: Scheme,
    pub r1: f64,
    pub r2: f64,
    pub binding: [usize; 2],
    /// Set when a negative formula value was clamped to zero.
    pub clamped: bool,
}

impl RatePoint {
    fn from_terms(scheme: Scheme, r1: [f64; 2], r2: [f64; 2]) -> Self {
        let pick = |t: [f64; 2]| if t[1] < t[0] { (t[1], 1) } else { (t[0], 0) };
        let (v1, b1) = pick(r1);
        let (v2, b2) = pick(r2);
        Self {
            scheme,
            r1: v1.max(0.0),
            r2: v2.max(0.0),
            binding: [b1, b2],
            clamped: v1 < 0.0 || v2 < 0.0,
        }
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// Which reading of the general-scheme closed form to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HcVariant {
    /// `(1 - alpha) S` as printed.
    #[default]
    AsPrinted,
    /// `beta S` in place of `(1 - alpha) S`.
    BetaSubstituted,
    /// Printed form, except the cross term of the first numerator is
    /// `S (sqrt(alpha/A) (S31+1) + sqrt(beta sigma2))^2`, which is what the
    /// covariance of `(Y2, Ŷ3)` given `(X2, V3)` gives under the Gaussian
    /// substitution. The printed `sqrt(alpha (S31+1)/A)` can exceed the cutset.
    Rederived,
}

/// The two `R1` terms; `R2` uses the same form with roles swapped.
fn hc_general_terms(ch: &GaussianTwrcParams, sp: &SchemeParams, variant: HcVariant) -> [f64; 2] {
    let GaussianTwrcParams { s23, s31, s32, .. } = *ch;
    let SchemeParams { alpha, beta, sigma2 } = *sp;
    let a = s31 + s32 + 1.0;
    let cross = |amp: f64| {
        let r = amp + (beta * sigma2).sqrt();
        s23 * r * r
    };
    let den = (alpha * s23 / a + beta * s23 + 1.0) * (1.0 + sigma2) - cross((alpha / a).sqrt());
    let amp_a = match variant {
        HcVariant::Rederived => (alpha / a).sqrt() * (s31 + 1.0),
        _ => (alpha * (s31 + 1.0) / a).sqrt(),
    };
    let num_a = (alpha * s23 * (s31 + 1.0) / a + beta * s23 + 1.0) * (s31 + 1.0 + sigma2) - cross(amp_a);
    let analog = match variant {
        HcVariant::BetaSubstituted => beta,
        _ => 1.0 - alpha,
    };
    let num_b = (alpha * s23 * (s31 + 1.0) / a + analog * s23 + 1.0) * (1.0 + sigma2);
    [half_log2(num_a / den), half_log2(num_b / den) - c(1.0 / sigma2)]
}

/// General hybrid scheme at `(alpha, beta, sigma2)`.
pub fn hc_general_rates(ch: &GaussianTwrcParams, sp: &SchemeParams, variant: HcVariant) -> Result<RatePoint> {
    ch.validate()?;
    sp.validate()?;
    Ok(RatePoint::from_terms(
        Scheme::HcGeneral,
        hc_general_terms(ch, sp, variant),
        hc_general_terms(&ch.swapped(), sp, variant),
    ))
}

/// `R1 = min(C(S31/(1+s)), C(S23) - C(1/s))`.
pub fn nnc_rates(ch: &GaussianTwrcParams, sigma2: f64) -> Result<RatePoint> {
    ch.validate()?;
    check_sigma2(sigma2)?;
    let terms = |p: &GaussianTwrcParams| [c(p.s31 / (1.0 + sigma2)), c(p.s23) - c(1.0 / sigma2)];
    Ok(RatePoint::from_terms(Scheme::Nnc, terms(ch), terms(&ch.swapped())))
}

/// `R1 = C(S23 S31 / (1 + S23 + S31 + S32))`, `R2 = C(S13 S32 / (1 + S13 + S31 + S32))`.
pub fn af_rates(ch: &GaussianTwrcParams) -> Result<RatePoint> {
    ch.validate()?;
    let r1 = c(ch.s23 * ch.s31 / (1.0 + ch.s23 + ch.s31 + ch.s32));
    let r2 = c(ch.s13 * ch.s32 / (1.0 + ch.s13 + ch.s31 + ch.s32));
    Ok(RatePoint::from_terms(Scheme::Af, [r1, r1], [r2, r2]))
}

/// `R1 = min(C(S31(1+S23)/(1+s+S23)), C(S23 s/(1+s+S23)) - C(1/s))`.
pub fn hc_special_rates(ch: &GaussianTwrcParams, sigma2: f64) -> Result<RatePoint> {
    ch.validate()?;
    check_sigma2(sigma2)?;
    let terms = |p: &GaussianTwrcParams| {
        let d = 1.0 + sigma2 + p.s23;
        [c(p.s31 * (1.0 + p.s23) / d), c(p.s23 * sigma2 / d) - c(1.0 / sigma2)]
    };
    Ok(RatePoint::from_terms(Scheme::HcSpecial, terms(ch), terms(&ch.swapped())))
}

/// Two-cut outer bound `R1 <= min(C(S31), C(S23))`, `R2 <= min(C(S32), C(S13))`.
/// Not a formula of the hybrid coding analysis; a derived reference curve.
pub fn cutset_rates(ch: &GaussianTwrcParams) -> Result<RatePoint> {
    ch.validate()?;
    Ok(RatePoint::from_terms(
        Scheme::Cutset,
        [c(ch.s31), c(ch.s23)],
        [c(ch.s32), c(ch.s13)],
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaussOptConfig {
    pub sigma2_min: f64,
    pub sigma2_max: f64,
    pub sigma2_points: usize,
    pub triangle_step: f64,
    /// Coordinate-descent step schedule on `(alpha, beta)`.
    pub descent_steps: Vec<f64>,
    /// Alternations of descent on `(alpha, beta)` and golden search on `sigma2`.
    pub alternations: usize,
    /// `sigma2` of the amplify-forward probe at `(alpha, beta) = (1, 0)`.
    pub af_probe_sigma2: f64,
    pub variant: HcVariant,
    pub search: SearchConfig,
}

impl Default for GaussOptConfig {
    fn default() -> Self {
        Self {
            sigma2_min: 1e-3,
            sigma2_max: 1e6,
            sigma2_points: 120,
            triangle_step: 0.02,
            descent_steps: vec![0.02, 0.005, 1e-3, 1e-4, 1e-5],
            alternations: 3,
            af_probe_sigma2: 1e15,
            variant: HcVariant::AsPrinted,
            search: SearchConfig::default(),
        }
    }
}

impl GaussOptConfig {
    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        let ok = self.sigma2_min > 0.0
            && self.sigma2_max > self.sigma2_min
            && self.sigma2_points >= 2
            && self.triangle_step > 0.0
            && self.triangle_step <= 1.0
            && self.descent_steps.iter().all(|&s| s > 0.0)
            && self.af_probe_sigma2 > 0.0;
        if !ok {
            return Err(Error::InvalidParameter(format!("invalid optimizer config {self:?}")));
        }
        Ok(())
    }

    fn log_grid(&self) -> Vec<f64> {
        let (lo, hi) = (self.sigma2_min.log10(), self.sigma2_max.log10());
        let n = self.sigma2_points;
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizedScheme {
    pub params: Option<SchemeParams>,
    pub point: RatePoint,
    pub sum_rate: f64,
}

fn sum_at(ch: &GaussianTwrcParams, scheme: Scheme, sp: &SchemeParams, variant: HcVariant) -> f64 {
    let point = match scheme {
        Scheme::Nnc => nnc_rates(ch, sp.sigma2),
        Scheme::HcSpecial => hc_special_rates(ch, sp.sigma2),
        Scheme::HcGeneral => hc_general_rates(ch, sp, variant),
        Scheme::Af => af_rates(ch),
        Scheme::Cutset => cutset_rates(ch),
    };
    point.map(|p| p.sum()).unwrap_or(f64::NEG_INFINITY)
}

/// Golden search in `log10 sigma2` around `center` (one grid cell each way).
fn refine_sigma(
    ch: &GaussianTwrcParams,
    scheme: Scheme,
    alpha: f64,
    beta: f64,
    center: f64,
    cell: f64,
    cfg: &GaussOptConfig,
) -> Result<(f64, f64)> {
    let lo = (center - cell).max(cfg.sigma2_min.log10());
    let hi = (center + cell).max(lo + cell);
    let f = |ls: f64| sum_at(ch, scheme, &SchemeParams { alpha, beta, sigma2: 10f64.powf(ls) }, cfg.variant);
    let g = golden_refine(f, lo, hi, cfg.search.golden_tol, cfg.search.golden_max_iter)?;
    Ok((g.x, g.value))
}

/// Optimizes one scheme at fixed `(alpha, beta)` over `sigma2`: log grid,
/// then golden refinement around the best grid point.
fn optimize_sigma(ch: &GaussianTwrcParams, scheme: Scheme, alpha: f64, beta: f64, cfg: &GaussOptConfig) -> Result<(f64, f64)> {
    let grid = cfg.log_grid();
    let cell = grid[1] - grid[0];
    let (best_v, best_i) = grid
        .iter()
        .enumerate()
        .map(|(i, &ls)| {
            let v = sum_at(ch, scheme, &SchemeParams { alpha, beta, sigma2: 10f64.powf(ls) }, cfg.variant);
            (v, i)
        })
        .fold((f64::NEG_INFINITY, usize::MAX), better);
    let (x, v) = refine_sigma(ch, scheme, alpha, beta, grid[best_i], cell, cfg)?;
    Ok(if v > best_v { (x, v) } else { (grid[best_i], best_v) })
}

/// Maximizes `R1 + R2` over the scheme's free parameters.
pub fn optimize_scheme(ch: &GaussianTwrcParams, scheme: Scheme, cfg: &GaussOptConfig) -> Result<OptimizedScheme> {
    ch.validate()?;
    cfg.validate()?;
    let finish = |params: Option<SchemeParams>| -> Result<OptimizedScheme> {
        let point = match (scheme, params) {
            (Scheme::Af, _) => af_rates(ch)?,
            (Scheme::Cutset, _) => cutset_rates(ch)?,
            (Scheme::Nnc, Some(p)) => nnc_rates(ch, p.sigma2)?,
            (Scheme::HcSpecial, Some(p)) => hc_special_rates(ch, p.sigma2)?,
            (Scheme::HcGeneral, Some(p)) => hc_general_rates(ch, &p, cfg.variant)?,
            _ => return Err(Error::Invariant("scheme without parameters".into())),
        };
        Ok(OptimizedScheme {
            params,
            sum_rate: point.sum(),
            point,
        })
    };
    match scheme {
        Scheme::Af | Scheme::Cutset => finish(None),
        Scheme::Nnc => {
            let (ls, _) = optimize_sigma(ch, scheme, 0.0, 0.0, cfg)?;
            finish(Some(SchemeParams::new(0.0, 0.0, 10f64.powf(ls))?))
        }
        Scheme::HcSpecial => {
            let (ls, _) = optimize_sigma(ch, scheme, 0.0, 1.0, cfg)?;
            finish(Some(SchemeParams::new(0.0, 1.0, 10f64.powf(ls))?))
        }
        Scheme::HcGeneral => finish(Some(optimize_general(ch, cfg)?)),
    }
}

const PURPOSE_RESTART: u64 = 0x7265_7374;

fn optimize_general(ch: &GaussianTwrcParams, cfg: &GaussOptConfig) -> Result<SchemeParams> {
    use rand::Rng;

    let grid = cfg.log_grid();
    let cell = grid[1] - grid[0];
    let tri = triangle_grid(cfg.triangle_step);
    let eval = |a: f64, b: f64, ls: f64| {
        sum_at(ch, Scheme::HcGeneral, &SchemeParams { alpha: a, beta: b, sigma2: 10f64.powf(ls) }, cfg.variant)
    };

    // Coarse grid over (sigma2, alpha, beta).
    let (_, (si, ti)) = (0..grid.len() * tri.len())
        .into_par_iter()
        .map(|idx| {
            let (si, ti) = (idx / tri.len(), idx % tri.len());
            (eval(tri[ti].0, tri[ti].1, grid[si]), (si, ti))
        })
        .reduce(|| (f64::NEG_INFINITY, (usize::MAX, usize::MAX)), better);

    // Starting points: the grid optimum, the optimized special cases, an
    // amplify-forward probe, then seeded random restarts.
    let mut starts = vec![(tri[ti].0, tri[ti].1, grid[si])];
    let (ls_nnc, _) = optimize_sigma(ch, Scheme::Nnc, 0.0, 0.0, cfg)?;
    starts.push((0.0, 0.0, ls_nnc));
    let (ls_hs, _) = optimize_sigma(ch, Scheme::HcSpecial, 0.0, 1.0, cfg)?;
    starts.push((0.0, 1.0, ls_hs));
    starts.push((1.0, 0.0, cfg.af_probe_sigma2.log10()));
    let (lo, hi) = (cfg.sigma2_min.log10(), cfg.sigma2_max.log10());
    for i in 0..cfg.search.random_restarts {
        let mut rng = stream_rng(cfg.search.seed, i as u64, PURPOSE_RESTART);
        let (mut a, mut b): (f64, f64) = (rng.gen(), rng.gen());
        if a + b > 1.0 {
            (a, b) = (1.0 - a, 1.0 - b);
        }
        starts.push((a, b, rng.gen_range(lo..hi)));
    }

    let refine = |start: (f64, f64, f64)| -> Result<(f64, f64, f64, f64)> {
        let (mut a, mut b, mut ls) = start;
        let mut value = eval(a, b, ls);
        for _ in 0..cfg.alternations {
            let before = value;
            let cd = coordinate_descent(|x, y| eval(x, y, ls), (a, b), &cfg.descent_steps, cfg.search.descent_max_rounds)?;
            if cd.value > value {
                (a, b, value) = (cd.alpha, cd.beta, cd.value);
            }
            let (x, v) = refine_sigma(ch, Scheme::HcGeneral, a, b, ls, cell, cfg)?;
            if v > value + crate::search::STRICT_IMPROVEMENT {
                (ls, value) = (x, v);
            }
            if value <= before + crate::search::STRICT_IMPROVEMENT {
                break;
            }
        }
        Ok((value, a, b, ls))
    };
    let mut best: Option<(f64, usize, (f64, f64, f64))> = None;
    for (i, &start) in starts.iter().enumerate() {
        let (v, a, b, ls) = refine(start)?;
        let replace = match best {
            None => true,
            Some((bv, _, _)) => v > bv,
        };
        if replace {
            best = Some((v, i, (a, b, ls)));
        }
    }
    let (_, _, (a, b, ls)) = best.ok_or_else(|| Error::Invariant("no starting point".into()))?;
    SchemeParams::new(a, b.min(1.0 - a).max(0.0), 10f64.powf(ls))
}

/// One row of the distance sweep: optimized sum rates per scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub cutset: f64,
    pub af: f64,
    pub nnc: f64,
    pub hc: f64,
}

pub const SWEEP_HEADER: &str = "r,R_CS,R_AF,R_NNC,R_HC";

/// Relay on the segment between the terminals at distance `r` from node 1:
/// `g13 = g31 = r^(-e/2)`, `g23 = g32 = (1-r)^(-e/2)`. `R_HC` is the
/// optimized analog-quantize scheme (`alpha = 0`, `beta = 1`).
pub fn fig8_sweep(power: f64, r_grid: &[f64], path_loss_exp: f64, cfg: &GaussOptConfig) -> Result<Vec<SweepRow>> {
    if let Some(&bad) = r_grid.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::InvalidParameter(format!("distance r = {bad} is outside (0, 1)")));
    }
    if !(path_loss_exp > 0.0) || !path_loss_exp.is_finite() {
        return Err(Error::InvalidParameter(format!("path-loss exponent {path_loss_exp}")));
    }
    cfg.validate()?;
    r_grid
        .par_iter()
        .map(|&r| {
            let g1 = r.powf(-path_loss_exp / 2.0);
            let g2 = (1.0 - r).powf(-path_loss_exp / 2.0);
            let ch = GaussianTwrcParams::from_gains([g1, g2, g1, g2], power)?;
            Ok(SweepRow {
                r,
                cutset: cutset_rates(&ch)?.sum(),
                af: af_rates(&ch)?.sum(),
                nnc: optimize_scheme(&ch, Scheme::Nnc, cfg)?.sum_rate,
                hc: optimize_scheme(&ch, Scheme::HcSpecial, cfg)?.sum_rate,
            })
        })
        .collect()
}

/// CSV with header [`SWEEP_HEADER`] and six decimals.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            r.r, r.cutset, r.af, r.nnc, r.hc
        ));
    }
    out
}

/// The default distance grid `0.05, 0.10, ..., 0.95`.
pub fn default_r_grid() -> Vec<f64> {
    (1..20).map(|i| i as f64 * 0.05).collect()
}
