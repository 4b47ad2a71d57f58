//! Random codebooks drawn i.i.d. from the auxiliary marginal.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::Pmf;

use super::pmf_sampler;

/// `floor(2^(nR))`, with a little slack so that exact powers are not lost
/// to rounding.
pub fn codebook_size(n: usize, rate: f64) -> Result<u64> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::InvalidParameter(format!("codebook rate {rate}")));
    }
    let exponent = n as f64 * rate;
    if exponent >= 62.0 {
        return Err(Error::ResourceCap(format!("2^{exponent:.2} codewords")));
    }
    Ok((exponent.exp2() + 1e-9).floor() as u64)
}

/// Codewords stored row-major; index `m` is 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    n: usize,
    rate: f64,
    pmf: Pmf,
    seed: u64,
    symbols: Vec<usize>,
}

impl Codebook {
    /// Explicit codebook; the rate is `log2(len) / n` and the seed 0.
    pub fn from_entries(entries: Vec<Vec<usize>>, pmf: Pmf) -> Result<Self> {
        let n = entries.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::InvalidParameter("empty codebook".into()));
        }
        if let Some(e) = entries.iter().find(|e| e.len() != n) {
            return Err(Error::LengthMismatch(n, e.len()));
        }
        if entries.iter().flatten().any(|&u| u >= pmf.alphabet_size()) {
            return Err(Error::InvalidParameter("codeword symbol outside the alphabet".into()));
        }
        Ok(Self {
            n,
            rate: (entries.len() as f64).log2() / n as f64,
            pmf,
            seed: 0,
            symbols: entries.concat(),
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn pmf(&self) -> &Pmf {
        &self.pmf
    }

    pub fn entry(&self, m: usize) -> &[usize] {
        &self.symbols[m * self.n..(m + 1) * self.n]
    }

    pub fn entries(&self) -> impl Iterator<Item = &[usize]> {
        self.symbols.chunks(self.n)
    }
}

/// Rejects codebooks over `cap` total symbols before drawing anything.
pub fn generate_codebook(n: usize, rate: f64, pmf: &Pmf, seed: u64, cap: u64) -> Result<Codebook> {
    if n == 0 {
        return Err(Error::InvalidParameter("block length must be positive".into()));
    }
    let count = codebook_size(n, rate)?;
    let total = count.saturating_mul(n as u64);
    if total > cap {
        return Err(Error::ResourceCap(format!(
            "{count} codewords of length {n} exceed the {cap}-symbol cap"
        )));
    }
    let dist = pmf_sampler(pmf)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols = (0..total).map(|_| rng.sample(&dist)).collect();
    Ok(Codebook {
        n,
        rate,
        pmf: pmf.clone(),
        seed,
        symbols,
    })
}
