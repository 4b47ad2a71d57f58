//! Blahut–Arimoto iterations for channel capacity and the rate–distortion
//! function. Both report the final duality gap and whether the iteration cap
//! was reached instead of converging.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::{ConditionalPmf, DistortionMeasure, Pmf};

/// Stop once the gap between upper and lower bound is below this (bits).
pub const BA_TOLERANCE: f64 = 1e-9;
/// Near-degenerate channels converge geometrically but slowly (ratios close
/// to 1), so the cap is generous; iterations are O(|X||Y|).
pub const BA_MAX_ITER: usize = 200_000;

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaOutcome {
    /// Bits.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final upper-minus-lower bound gap in bits.
    pub gap: f64,
    /// Optimizing input pmf (capacity) or reconstruction marginal (R(D)).
    pub distribution: Vec<f64>,
}

/// Channel capacity in bits.
pub fn capacity(channel: &ConditionalPmf) -> BaOutcome {
    let nx = channel.inputs();
    let ny = channel.outputs();
    let mut r = vec![1.0 / nx as f64; nx];
    let mut q = vec![0.0; ny];
    let mut c = vec![0.0; nx];
    let mut outcome = BaOutcome {
        value: 0.0,
        iterations: 0,
        converged: false,
        gap: f64::INFINITY,
        distribution: r.clone(),
    };
    for it in 1..=BA_MAX_ITER {
        q.iter_mut().for_each(|v| *v = 0.0);
        for (x, &rx) in r.iter().enumerate() {
            for (y, qy) in q.iter_mut().enumerate() {
                *qy += rx * channel.prob(x, y);
            }
        }
        for (x, cx) in c.iter_mut().enumerate() {
            let mut d = 0.0;
            for (y, &qy) in q.iter().enumerate() {
                let w = channel.prob(x, y);
                if w > 0.0 {
                    d += w * (w / qy).ln();
                }
            }
            *cx = d.exp();
        }
        let total: f64 = r.iter().zip(&c).map(|(a, b)| a * b).sum();
        let lower = total.ln();
        let upper = c.iter().cloned().fold(f64::MIN, f64::max).ln();
        outcome.iterations = it;
        outcome.value = (lower / LN2).max(0.0);
        outcome.gap = (upper - lower) / LN2;
        outcome.distribution = r.clone();
        if outcome.gap <= BA_TOLERANCE {
            outcome.converged = true;
            break;
        }
        for (rx, cx) in r.iter_mut().zip(&c) {
            *rx = *rx * cx / total;
        }
    }
    outcome
}

/// Smallest achievable expected distortion: each symbol mapped to its best
/// reconstruction.
pub fn min_distortion(source: &Pmf, d: &DistortionMeasure) -> f64 {
    (0..d.source_size())
        .map(|s| {
            let best = (0..d.reconstruction_size())
                .map(|t| d.get(s, t))
                .fold(f64::INFINITY, f64::min);
            source.get(s) * best
        })
        .sum()
}

/// Distortion reachable at zero rate: best constant reconstruction.
pub fn max_distortion(source: &Pmf, d: &DistortionMeasure) -> f64 {
    (0..d.reconstruction_size())
        .map(|t| (0..d.source_size()).map(|s| source.get(s) * d.get(s, t)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

struct FixedSlope {
    rate_nats: f64,
    distortion: f64,
    iterations: usize,
    converged: bool,
    gap_nats: f64,
}

/// One Blahut run at fixed slope. `weights[s][t]` is `exp(-beta d(s,t))`, or
/// the indicator of a distortion-minimizing reconstruction in the
/// zero-temperature case. `q` is warm-started and updated in place.
fn run_fixed_slope(p: &Pmf, d: &DistortionMeasure, weights: &[Vec<f64>], q: &mut [f64]) -> FixedSlope {
    let ns = d.source_size();
    let nt = d.reconstruction_size();
    let mut z = vec![0.0; ns];
    let mut c = vec![0.0; nt];
    let mut result = FixedSlope {
        rate_nats: 0.0,
        distortion: 0.0,
        iterations: 0,
        converged: false,
        gap_nats: f64::INFINITY,
    };
    for it in 1..=BA_MAX_ITER {
        for s in 0..ns {
            z[s] = (0..nt).map(|t| q[t] * weights[s][t]).sum();
        }
        for (t, ct) in c.iter_mut().enumerate() {
            *ct = (0..ns)
                .filter(|&s| p.get(s) > 0.0)
                .map(|s| p.get(s) * weights[s][t] / z[s])
                .sum();
        }
        // Gap between the primal value and the dual lower bound.
        let max_log = c
            .iter()
            .zip(q.iter())
            .filter(|(_, &qt)| qt > 0.0)
            .map(|(&ct, _)| ct.ln())
            .fold(f64::MIN, f64::max);
        let mean_log: f64 = c
            .iter()
            .zip(q.iter())
            .filter(|(&ct, &qt)| qt > 0.0 && ct > 0.0)
            .map(|(&ct, &qt)| qt * ct * ct.ln())
            .sum();
        result.iterations = it;
        result.gap_nats = (max_log - mean_log).max(0.0);
        for (qt, ct) in q.iter_mut().zip(&c) {
            *qt *= ct;
        }
        let norm: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= norm);
        if result.gap_nats / LN2 <= BA_TOLERANCE {
            result.converged = true;
            break;
        }
    }
    // Evaluate the test channel induced by the final marginal.
    let mut rate = 0.0;
    let mut dist = 0.0;
    for s in 0..ns {
        let ps = p.get(s);
        if ps == 0.0 {
            continue;
        }
        let zs: f64 = (0..nt).map(|t| q[t] * weights[s][t]).sum();
        for t in 0..nt {
            let cond = q[t] * weights[s][t] / zs;
            if cond > 0.0 {
                rate += ps * cond * (cond / q[t]).ln();
                dist += ps * cond * d.get(s, t);
            }
        }
    }
    result.rate_nats = rate.max(0.0);
    result.distortion = dist;
    result
}

/// Rate–distortion function `R(D)` in bits.
pub fn rd_function(source: &Pmf, d: &DistortionMeasure, target: f64) -> Result<BaOutcome> {
    if source.alphabet_size() != d.source_size() {
        return Err(Error::DimensionMismatch(format!(
            "source has {} symbols, distortion table {}",
            source.alphabet_size(),
            d.source_size()
        )));
    }
    if !target.is_finite() {
        return Err(Error::InvalidParameter(format!("distortion target {target}")));
    }
    let ns = d.source_size();
    let nt = d.reconstruction_size();
    let d_min = min_distortion(source, d);
    let d_max = max_distortion(source, d);
    if target < d_min - 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "distortion {target} is below the minimum achievable {d_min}"
        )));
    }
    let mut q = vec![1.0 / nt as f64; nt];
    if target >= d_max {
        return Ok(BaOutcome {
            value: 0.0,
            iterations: 0,
            converged: true,
            gap: 0.0,
            distribution: q,
        });
    }
    let weights_at = |beta: f64| -> Vec<Vec<f64>> {
        (0..ns)
            .map(|s| (0..nt).map(|t| (-beta * d.get(s, t)).exp()).collect())
            .collect()
    };
    if target <= d_min + 1e-12 {
        let weights: Vec<Vec<f64>> = (0..ns)
            .map(|s| {
                let best = (0..nt).map(|t| d.get(s, t)).fold(f64::INFINITY, f64::min);
                (0..nt)
                    .map(|t| if d.get(s, t) <= best + 1e-15 { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        let run = run_fixed_slope(source, d, &weights, &mut q);
        return Ok(BaOutcome {
            value: run.rate_nats / LN2,
            iterations: run.iterations,
            converged: run.converged,
            gap: run.gap_nats / LN2,
            distribution: q,
        });
    }
    // The distortion of the fixed-slope solution decreases in beta; bracket
    // the target and bisect.
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut hi_run = run_fixed_slope(source, d, &weights_at(hi), &mut q);
    while hi_run.distortion > target && hi < 1e6 {
        lo = hi;
        hi *= 2.0;
        hi_run = run_fixed_slope(source, d, &weights_at(hi), &mut q);
    }
    let mut best_beta = hi;
    let mut best = hi_run;
    let mut best_q = q.clone();
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let run = run_fixed_slope(source, d, &weights_at(mid), &mut q);
        if run.distortion > target {
            lo = mid;
        } else {
            hi = mid;
            best_beta = mid;
            best = run;
            best_q = q.clone();
        }
    }
    // The slope of R(D) at the solution is -beta; correct the small
    // distortion offset to first order.
    let value = (best.rate_nats - best_beta * (target - best.distortion)).max(0.0) / LN2;
    Ok(BaOutcome {
        value,
        iterations: best.iterations,
        converged: best.converged,
        gap: best.gap_nats / LN2,
        distribution: best_q,
    })
}
