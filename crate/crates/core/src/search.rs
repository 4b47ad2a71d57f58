//! Deterministic search utilities shared by the bound optimizers.
//!
//! Everything here is reproducible: grids are enumerated in a fixed
//! lexicographic order, refinements are deterministic, and randomized restarts
//! draw from counter-derived seeds so that adding restarts never perturbs
//! earlier ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Refinement steps must improve the objective by more than this.
pub const STRICT_IMPROVEMENT: f64 = 1e-12;

/// Default cap on the number of points any single simplex enumeration may produce.
pub const DEFAULT_GRID_CAP: u64 = 50_000_000;

/// Tunables for the grid-plus-refinement optimizers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Simplex grid denominator: coordinates are multiples of `1/grid_denominator`.
    pub grid_denominator: usize,
    pub golden_tol: f64,
    pub golden_max_iter: usize,
    pub descent_max_rounds: usize,
    pub random_restarts: usize,
    pub seed: u64,
    pub max_candidates: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_denominator: 12,
            golden_tol: 1e-7,
            golden_max_iter: 200,
            descent_max_rounds: 200,
            random_restarts: 4,
            seed: 0x5eed,
            max_candidates: DEFAULT_GRID_CAP,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_denominator == 0
            || !(self.golden_tol > 0.0)
            || self.golden_max_iter == 0
            || self.descent_max_rounds == 0
            || self.max_candidates == 0
        {
            return Err(Error::InvalidParameter(format!("search config has a non-positive cap: {self:?}")));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for sub-stream `(index, purpose)` of `root`. Streams are a pure
/// function of their coordinates, so they do not depend on how many other
/// streams were drawn.
pub fn derive_seed(root: u64, index: u64, purpose: u64) -> u64 {
    mix64(mix64(mix64(root) ^ index) ^ purpose.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

pub fn stream_rng(root: u64, index: u64, purpose: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, index, purpose))
}

/// Binomial coefficient, saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Number of points of the `k`-simplex grid with denominator `m`.
pub fn simplex_count(k: usize, m: usize) -> u64 {
    binomial((m + k - 1) as u64, (k - 1) as u64)
}

/// Lexicographic enumeration of `{(j_1/m, ..., j_k/m) : sum j = m}`.
#[derive(Clone, Debug)]
pub struct SimplexGrid {
    m: usize,
    current: Option<Vec<usize>>,
}

impl SimplexGrid {
    pub fn new(k: usize, m: usize, cap: u64) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!("simplex grid needs k, m >= 1 (k={k}, m={m})")));
        }
        let count = simplex_count(k, m);
        if count > cap {
            return Err(Error::ResourceCap(format!(
                "simplex grid k={k}, m={m} has {count} points, cap is {cap}"
            )));
        }
        let mut first = vec![0; k];
        first[k - 1] = m;
        Ok(Self {
            m,
            current: Some(first),
        })
    }

    pub fn total(&self) -> u64 {
        self.current
            .as_ref()
            .map(|c| simplex_count(c.len(), self.m))
            .unwrap_or(0)
    }

    fn advance(c: &mut [usize]) -> bool {
        // next composition in lexicographic order: bump the rightmost position
        // that can grow, then put all remaining mass in the last slot
        let k = c.len();
        if k < 2 {
            return false;
        }
        let mut i = k - 1;
        while i > 0 {
            i -= 1;
            let tail: usize = c[i + 1..].iter().sum();
            if tail > 0 {
                c[i] += 1;
                let rest = tail - 1;
                for x in c[i + 1..].iter_mut() {
                    *x = 0;
                }
                c[k - 1] = rest;
                return true;
            }
        }
        false
    }
}

impl Iterator for SimplexGrid {
    type Item = Vec<usize>;

    /// Yields integer numerators; divide by `m` for probabilities.
    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        if Self::advance(&mut next) {
            self.current = Some(next);
        }
        Some(out)
    }
}

/// All grid pmfs of the `k`-simplex at resolution `1/m`, lexicographically.
pub fn enumerate_simplex(k: usize, m: usize, cap: u64) -> Result<Vec<Vec<f64>>> {
    Ok(SimplexGrid::new(k, m, cap)?
        .map(|c| c.into_iter().map(|j| j as f64 / m as f64).collect())
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenResult {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    /// False when `max_iter` stopped the search before the bracket shrank to `tol`.
    pub converged: bool,
}

/// Golden-section maximization of `f` on `[low, high]`. The endpoints are
/// evaluated too, so a monotone objective returns the better endpoint.
pub fn golden_refine<F: FnMut(f64) -> f64>(
    mut f: F,
    low: f64,
    high: f64,
    tol: f64,
    max_iter: usize,
) -> Result<GoldenResult> {
    if !(low < high) || !low.is_finite() || !high.is_finite() {
        return Err(Error::InvalidParameter(format!("invalid bracket [{low}, {high}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (low, high);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    while b - a > tol && iterations < max_iter {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let converged = b - a <= tol;
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [low, high] {
        let v = f(x);
        if v > best.1 + STRICT_IMPROVEMENT {
            best = (x, v);
        }
    }
    Ok(GoldenResult {
        x: best.0,
        value: best.1,
        iterations,
        converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentResult {
    pub alpha: f64,
    pub beta: f64,
    pub value: f64,
    pub rounds: usize,
}

fn feasible(alpha: f64, beta: f64) -> bool {
    (0.0..=1.0).contains(&alpha) && (0.0..=1.0).contains(&beta) && alpha + beta <= 1.0 + 1e-12
}

/// Coordinate ascent of `f(alpha, beta)` over the triangle
/// `alpha, beta >= 0, alpha + beta <= 1`.
///
/// Moves along alpha, beta and the hypotenuse direction; a move that would
/// leave the triangle is clipped to its boundary. Each step size in `steps`
/// is used until no move improves by more than [`STRICT_IMPROVEMENT`].
pub fn coordinate_descent<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    start: (f64, f64),
    steps: &[f64],
    max_rounds: usize,
) -> Result<DescentResult> {
    let (mut alpha, mut beta) = start;
    if !feasible(alpha, beta) {
        return Err(Error::InvalidParameter(format!("infeasible start ({alpha}, {beta})")));
    }
    let mut value = f(alpha, beta);
    let mut rounds = 0;
    for &step in steps {
        loop {
            if rounds >= max_rounds {
                break;
            }
            rounds += 1;
            let mut improved = false;
            let directions = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, -1.0), (-1.0, 1.0)];
            for (da, db) in directions {
                let (a, b) = clip(alpha, beta, da * step, db * step);
                if (a, b) == (alpha, beta) {
                    continue;
                }
                let v = f(a, b);
                if v > value + STRICT_IMPROVEMENT {
                    alpha = a;
                    beta = b;
                    value = v;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }
    Ok(DescentResult {
        alpha,
        beta,
        value,
        rounds,
    })
}

/// Moves `(alpha, beta)` by `(da, db)` scaled down to stay inside the triangle.
fn clip(alpha: f64, beta: f64, da: f64, db: f64) -> (f64, f64) {
    let mut t: f64 = 1.0;
    let mut limit = |x: f64, dx: f64, hi: f64| {
        if dx > 0.0 {
            t = t.min((hi - x) / dx);
        } else if dx < 0.0 {
            t = t.min(x / -dx);
        }
    };
    limit(alpha, da, 1.0);
    limit(beta, db, 1.0);
    let ds = da + db;
    if ds > 0.0 {
        t = t.min((1.0 - alpha - beta) / ds);
    }
    let t = t.max(0.0);
    let a = (alpha + t * da).clamp(0.0, 1.0);
    let b = (beta + t * db).clamp(0.0, 1.0);
    if a + b > 1.0 {
        (a, 1.0 - a)
    } else {
        (a, b)
    }
}

/// Triangular `(alpha, beta)` grid with the given step, in lexicographic order.
pub fn triangle_grid(step: f64) -> Vec<(f64, f64)> {
    let m = (1.0 / step).round() as usize;
    let mut out = Vec::with_capacity((m + 1) * (m + 2) / 2);
    for i in 0..=m {
        for j in 0..=(m - i) {
            out.push((i as f64 / m as f64, j as f64 / m as f64));
        }
    }
    out
}

/// Deterministic argmax merge: higher value wins, equal values keep the
/// smaller key. Independent of evaluation order.
pub fn better<K: Ord>(a: (f64, K), b: (f64, K)) -> (f64, K) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}
