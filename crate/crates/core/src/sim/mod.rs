//! Monte Carlo simulation of the random-codebook hybrid scheme.
//!
//! Every trial draws a fresh source block, codebook(s), tie-break stream and
//! channel noise from its own sub-streams of the root seed, so a report is a
//! pure function of its configuration and does not depend on the number of
//! worker threads or on how many trials were requested.

use rand::distributions::WeightedIndex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::{ConditionalPmf, Pmf};
use crate::search::{derive_seed, stream_rng};

pub mod codebook;
pub mod lemma1;
pub mod mac;
pub mod p2p;

pub use codebook::{codebook_size, generate_codebook, Codebook};
pub use lemma1::{lemma1_check, Lemma1Cell, Lemma1Config, Lemma1Report};
pub use mac::{run_mac, MacReport, MacRun, MacTrial};
pub use p2p::{decode_p2p, encode_p2p, run_p2p, select_index, Decoded, Encoded, P2pReport, P2pRun, P2pTrial};

pub const DEFAULT_EPSILON: f64 = 0.3;
pub const DEFAULT_EPSILON_PRIME: f64 = 0.2;
/// Upper bound on codebook symbols (and on MAC pair-search symbols).
pub const DEFAULT_SYMBOL_CAP: u64 = 1 << 22;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

pub(crate) const PURPOSE_TRIAL: u64 = 0x7472_6961;
pub(crate) const PURPOSE_SOURCE: u64 = 1;
pub(crate) const PURPOSE_CODEBOOK: u64 = 2;
pub(crate) const PURPOSE_TIEBREAK: u64 = 3;
pub(crate) const PURPOSE_CHANNEL: u64 = 4;

fn default_cap() -> u64 {
    DEFAULT_SYMBOL_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n: usize,
    pub trials: usize,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub symbol_cap: u64,
}

impl TrialConfig {
    pub fn new(n: usize, trials: usize, seed: u64) -> Self {
        Self {
            n,
            trials,
            epsilon: DEFAULT_EPSILON,
            epsilon_prime: DEFAULT_EPSILON_PRIME,
            seed,
            symbol_cap: DEFAULT_SYMBOL_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.trials == 0 {
            return Err(Error::InvalidParameter(format!(
                "need n >= 1 and trials >= 1, got n = {}, trials = {}",
                self.n, self.trials
            )));
        }
        if !(self.epsilon > self.epsilon_prime && self.epsilon_prime > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need epsilon > epsilon' > 0, got {} and {}",
                self.epsilon, self.epsilon_prime
            )));
        }
        Ok(())
    }

    /// Seed of trial `t`; all of its sub-streams derive from it.
    pub fn trial_seed(&self, t: usize) -> u64 {
        derive_seed(self.seed, t as u64, PURPOSE_TRIAL)
    }
}

/// Sample mean with standard error and 95% normal-approximation half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn proportion(hits: usize, total: usize) -> Self {
        let p = hits as f64 / total as f64;
        let se = (p * (1.0 - p) / total as f64).sqrt();
        Self {
            mean: p,
            std_error: se,
            half_width: Z95 * se,
        }
    }

    pub fn sample(values: &[f64]) -> Self {
        let t = values.len() as f64;
        let mean = values.iter().sum::<f64>() / t;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0)
        } else {
            0.0
        };
        let se = (var / t).sqrt();
        Self {
            mean,
            std_error: se,
            half_width: Z95 * se,
        }
    }
}

pub(crate) fn pmf_sampler(p: &Pmf) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(p.probs()).map_err(|e| Error::InvalidPmf(e.to_string()))
}

pub(crate) fn kernel_samplers(k: &ConditionalPmf) -> Result<Vec<WeightedIndex<f64>>> {
    (0..k.inputs())
        .map(|i| WeightedIndex::new(k.row(i)).map_err(|e| Error::InvalidPmf(e.to_string())))
        .collect()
}

pub(crate) fn draw<R: Rng>(dist: &WeightedIndex<f64>, n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.sample(dist)).collect()
}

pub(crate) fn purpose_rng(trial_seed: u64, purpose: u64) -> rand_chacha::ChaCha8Rng {
    stream_rng(trial_seed, 0, purpose)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(TrialConfig::new(10, 5, 1).validate().is_ok());
        let mut c = TrialConfig::new(10, 5, 1);
        c.epsilon = 0.1;
        assert!(c.validate().is_err());
        assert!(TrialConfig::new(0, 5, 1).validate().is_err());
    }

    #[test]
    fn estimates() {
        let e = Estimate::proportion(10, 100);
        assert!((e.mean - 0.1).abs() < 1e-15);
        assert!((e.std_error - 0.03).abs() < 1e-12);
        let s = Estimate::sample(&[1.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std_error - 1.0).abs() < 1e-12);
    }
}
