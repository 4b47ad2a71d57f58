//! Empirical check of the codebook-dependence bound: given that the encoder
//! picked index 1, the conditional pmf of another codeword `U^n(2)` stays
//! within a constant factor of the product pmf `∏ p_U(u_i)`.
//!
//! Trials with `M != 1` are discarded (rejection), so the estimate is the
//! plain conditional frequency in each `(ũ^n, s^n)` cell.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::{JointPmf, Pmf, TypicalWindow};

use super::{
    codebook_size, draw, generate_codebook, pmf_sampler, purpose_rng, select_index, PURPOSE_CODEBOOK,
    PURPOSE_SOURCE, PURPOSE_TIEBREAK, PURPOSE_TRIAL,
};
use crate::search::derive_seed;

/// Upper bound on `|U|^n * |S|^n * |U|^n` count cells.
pub const LEMMA1_CELL_CAP: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Config {
    pub n: usize,
    pub rate: f64,
    /// `p(u, s)` with dims `[|U|, |S|]`.
    pub joint: JointPmf,
    pub epsilon_prime: f64,
    pub outer_trials: usize,
    pub min_count: u64,
    pub seed: u64,
}

impl Lemma1Config {
    pub fn validate(&self) -> Result<u64> {
        if self.joint.ndim() != 2 {
            return Err(Error::DimensionMismatch("p(u, s) must have two axes".into()));
        }
        if self.n == 0 || self.outer_trials == 0 {
            return Err(Error::InvalidParameter("need n >= 1 and outer_trials >= 1".into()));
        }
        if !(self.epsilon_prime > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon' {}", self.epsilon_prime)));
        }
        let k = codebook_size(self.n, self.rate)?;
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "rate {} gives a single codeword at n = {}; U^n(2) does not exist",
                self.rate, self.n
            )));
        }
        let [nu, ns] = [self.joint.dims()[0] as u64, self.joint.dims()[1] as u64];
        let cells = nu
            .checked_pow(2 * self.n as u32)
            .and_then(|v| v.checked_mul(ns.checked_pow(self.n as u32)?))
            .filter(|&c| c <= LEMMA1_CELL_CAP);
        if cells.is_none() {
            return Err(Error::ResourceCap(format!(
                "|U|^(2n)|S|^n count cells exceed {LEMMA1_CELL_CAP} at n = {}",
                self.n
            )));
        }
        if k.saturating_mul(self.n as u64) > super::DEFAULT_SYMBOL_CAP {
            return Err(Error::ResourceCap(format!("{k} codewords of length {}", self.n)));
        }
        Ok(k)
    }
}

/// One conditioning cell `(ũ^n, s^n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Cell {
    pub u_tilde: Vec<usize>,
    pub s: Vec<usize>,
    pub total: u64,
    /// Counts of `U^n(2)` over all `|U|^n` sequences (index order).
    pub counts: Vec<u64>,
    /// `P̂(u^n | cell) / ∏ p_U(u_i)`; zero where the product pmf vanishes.
    pub ratios: Vec<f64>,
    /// Standard errors of `ratios` from the binomial variance.
    pub ratio_std_errors: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub n: usize,
    pub rate: f64,
    pub codebook_size: u64,
    pub outer_trials: usize,
    /// Trials with `M = 1`.
    pub accepted: u64,
    pub min_count: u64,
    /// Cells with at least `min_count` samples.
    pub cells: Vec<Lemma1Cell>,
    pub max_ratio: Option<f64>,
    /// `max(ratio - 3 se)` over the reported cells.
    pub max_ratio_lower: Option<f64>,
    pub inconclusive: bool,
}

/// Base-`k` digits of `idx`, most significant first.
pub fn sequence_of(mut idx: usize, k: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = idx % k;
        idx /= k;
    }
    out
}

pub fn index_of(seq: &[usize], k: usize) -> usize {
    seq.iter().fold(0, |acc, &x| acc * k + x)
}

/// `∏ p(x_i)` for every sequence in index order.
pub fn product_pmf(p: &Pmf, n: usize) -> Vec<f64> {
    let k = p.alphabet_size();
    (0..k.pow(n as u32))
        .map(|i| sequence_of(i, k, n).iter().map(|&x| p.get(x)).product())
        .collect()
}

pub fn lemma1_check(cfg: &Lemma1Config) -> Result<Lemma1Report> {
    let k = cfg.validate()?;
    let n = cfg.n;
    let (nu, ns) = (cfg.joint.dims()[0], cfg.joint.dims()[1]);
    let pu = cfg.joint.marginal_pmf(0)?;
    let ps = cfg.joint.marginal_pmf(1)?;
    let window = TypicalWindow::new(&cfg.joint, cfg.epsilon_prime, n)?;
    let source = pmf_sampler(&ps)?;
    let useq = nu.pow(n as u32);
    let sseq = ns.pow(n as u32);

    let counts = (0..cfg.outer_trials)
        .into_par_iter()
        .fold(
            || vec![0u64; useq * sseq * useq],
            |mut acc, t| -> Vec<u64> {
                let seed = derive_seed(cfg.seed, t as u64, PURPOSE_TRIAL);
                let s = draw(&source, n, &mut purpose_rng(seed, PURPOSE_SOURCE));
                let cb = generate_codebook(n, cfg.rate, &pu, purpose_rng(seed, PURPOSE_CODEBOOK).gen(), u64::MAX)
                    .expect("validated codebook");
                let (m, _) = select_index(&s, &cb, &window, &mut purpose_rng(seed, PURPOSE_TIEBREAK))
                    .expect("matching lengths");
                if m == 0 {
                    let cell = index_of(cb.entry(0), nu) * sseq + index_of(&s, ns);
                    acc[cell * useq + index_of(cb.entry(1), nu)] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; useq * sseq * useq],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let product = product_pmf(&pu, n);
    let mut cells = Vec::new();
    let mut accepted = 0;
    for cell in 0..useq * sseq {
        let row = &counts[cell * useq..(cell + 1) * useq];
        let total: u64 = row.iter().sum();
        accepted += total;
        if total < cfg.min_count.max(1) {
            continue;
        }
        let tf = total as f64;
        let (ratios, ratio_std_errors) = row
            .iter()
            .zip(&product)
            .map(|(&c, &p)| {
                if p == 0.0 {
                    return (0.0, 0.0);
                }
                let ph = c as f64 / tf;
                (ph / p, (ph * (1.0 - ph) / tf).sqrt() / p)
            })
            .unzip();
        cells.push(Lemma1Cell {
            u_tilde: sequence_of(cell / sseq, nu, n),
            s: sequence_of(cell % sseq, ns, n),
            total,
            counts: row.to_vec(),
            ratios,
            ratio_std_errors,
        });
    }
    let max_of = |f: &dyn Fn(&Lemma1Cell, usize) -> f64| {
        cells
            .iter()
            .flat_map(|c| (0..useq).filter(|&u| product[u] > 0.0).map(move |u| (c, u)))
            .map(|(c, u)| f(c, u))
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    };
    let max_ratio = max_of(&|c, u| c.ratios[u]);
    let max_ratio_lower = max_of(&|c, u| c.ratios[u] - 3.0 * c.ratio_std_errors[u]);
    Ok(Lemma1Report {
        n,
        rate: cfg.rate,
        codebook_size: k,
        outer_trials: cfg.outer_trials,
        accepted,
        min_count: cfg.min_count,
        inconclusive: cells.is_empty(),
        cells,
        max_ratio,
        max_ratio_lower,
    })
}
