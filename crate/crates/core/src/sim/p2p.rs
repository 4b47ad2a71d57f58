//! Point-to-point hybrid coding: joint typicality encoding and decoding,
//! with the three error events of the achievability analysis.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::p2p::{thm1_joint, HybridCodeSpec, P2pScenario, AXIS_S, AXIS_U, AXIS_Y};
use crate::error::{Error, Result};
use crate::infotheory::{mean_distortion, TypicalWindow};

use super::{
    codebook_size, draw, generate_codebook, kernel_samplers, pmf_sampler, purpose_rng, Codebook, Estimate,
    TrialConfig, PURPOSE_CHANNEL, PURPOSE_CODEBOOK, PURPOSE_SOURCE, PURPOSE_TIEBREAK,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoded {
    /// 0-based chosen index.
    pub index: usize,
    /// Number of codewords jointly typical with the source block.
    pub hits: usize,
    pub input: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoded {
    pub index: usize,
    /// All indices jointly typical with the channel output.
    pub candidates: Vec<usize>,
    pub reconstruction: Vec<usize>,
}

/// Index selection of the encoder: uniform among codewords jointly typical
/// with `s` under `window` (axes `U, S`), or uniform over the whole codebook
/// when there are none. Returns `(index, hits)`.
pub fn select_index<R: Rng>(s: &[usize], cb: &Codebook, window: &TypicalWindow, rng: &mut R) -> Result<(usize, usize)> {
    if s.len() != cb.block_length() {
        return Err(Error::LengthMismatch(cb.block_length(), s.len()));
    }
    let mut scratch = Vec::new();
    let hits: Vec<usize> = (0..cb.len())
        .filter(|&m| window.contains_with(&[cb.entry(m), s], &mut scratch))
        .collect();
    let index = if hits.is_empty() {
        rng.gen_range(0..cb.len())
    } else {
        hits[rng.gen_range(0..hits.len())]
    };
    Ok((index, hits.len()))
}

/// Selects an index and maps `x_i = enc_map[u_i][s_i]`.
pub fn encode_p2p<R: Rng>(
    s: &[usize],
    cb: &Codebook,
    window: &TypicalWindow,
    enc_map: &[Vec<usize>],
    rng: &mut R,
) -> Result<Encoded> {
    let (index, hits) = select_index(s, cb, window, rng)?;
    let input = cb.entry(index).iter().zip(s).map(|(&u, &si)| enc_map[u][si]).collect();
    Ok(Encoded { index, hits, input })
}

/// Unique joint typicality decoding under `window` (axes `U, Y`); index 0
/// when there is no candidate or more than one. `ŝ_i = dec_map[u_i][y_i]`.
pub fn decode_p2p(y: &[usize], cb: &Codebook, window: &TypicalWindow, dec_map: &[Vec<usize>]) -> Result<Decoded> {
    if y.len() != cb.block_length() {
        return Err(Error::LengthMismatch(cb.block_length(), y.len()));
    }
    let mut scratch = Vec::new();
    let candidates: Vec<usize> = (0..cb.len())
        .filter(|&m| window.contains_with(&[cb.entry(m), y], &mut scratch))
        .collect();
    let index = if candidates.len() == 1 { candidates[0] } else { 0 };
    let reconstruction = cb.entry(index).iter().zip(y).map(|(&u, &yi)| dec_map[u][yi]).collect();
    Ok(Decoded {
        index,
        candidates,
        reconstruction,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct P2pTrial {
    pub trial: usize,
    pub seed: u64,
    /// No codeword jointly typical with the source.
    pub e1: bool,
    /// `(S, U(M), Y)` not typical while some codeword covered the source.
    pub e2_not_e1: bool,
    /// Another codeword jointly typical with the output.
    pub e3: bool,
    pub error: bool,
    pub index: usize,
    pub decoded: usize,
    pub distortion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct P2pReport {
    pub n: usize,
    pub trials: usize,
    pub rate: f64,
    pub codebook_size: u64,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub seed: u64,
    pub p_e1: Estimate,
    pub p_e2_not_e1: Estimate,
    pub p_e3: Estimate,
    pub p_error: Estimate,
    pub mean_distortion: Estimate,
    /// Mean distortion over trials without an error event.
    pub distortion_given_no_error: Option<f64>,
    pub no_error_trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct P2pRun {
    pub report: P2pReport,
    pub outcomes: Vec<P2pTrial>,
}

/// Runs independent trials of the point-to-point scheme at codebook rate
/// `spec.rate`.
pub fn run_p2p(cfg: &TrialConfig, scn: &P2pScenario, spec: &HybridCodeSpec) -> Result<P2pRun> {
    cfg.validate()?;
    let joint = thm1_joint(scn, spec)?;
    let n = cfg.n;
    let count = codebook_size(n, spec.rate)?;
    if count.saturating_mul(n as u64) > cfg.symbol_cap {
        return Err(Error::ResourceCap(format!(
            "{count} codewords of length {n} exceed the {}-symbol cap",
            cfg.symbol_cap
        )));
    }
    let us = TypicalWindow::new(&joint.marginal(&[AXIS_U, AXIS_S])?, cfg.epsilon_prime, n)?;
    let uy = TypicalWindow::new(&joint.marginal(&[AXIS_U, AXIS_Y])?, cfg.epsilon, n)?;
    let suy = TypicalWindow::new(&joint.marginal(&[AXIS_S, AXIS_U, AXIS_Y])?, cfg.epsilon, n)?;
    let aux = joint.marginal_pmf(AXIS_U)?;
    let source = pmf_sampler(&scn.source)?;
    let channel = kernel_samplers(&scn.channel)?;

    let trial = |t: usize| -> Result<P2pTrial> {
        let seed = cfg.trial_seed(t);
        let s = draw(&source, n, &mut purpose_rng(seed, PURPOSE_SOURCE));
        let cb = generate_codebook(n, spec.rate, &aux, purpose_rng(seed, PURPOSE_CODEBOOK).gen(), cfg.symbol_cap)?;
        let enc = encode_p2p(&s, &cb, &us, &spec.enc_map, &mut purpose_rng(seed, PURPOSE_TIEBREAK))?;
        let mut noise = purpose_rng(seed, PURPOSE_CHANNEL);
        let y: Vec<usize> = enc.input.iter().map(|&x| noise.sample(&channel[x])).collect();
        let dec = decode_p2p(&y, &cb, &uy, &spec.dec_map)?;

        let e1 = enc.hits == 0;
        let e2_not_e1 = !e1 && !suy.contains(&[&s, cb.entry(enc.index), &y]);
        let e3 = dec.candidates.iter().any(|&m| m != enc.index);
        Ok(P2pTrial {
            trial: t,
            seed,
            e1,
            e2_not_e1,
            e3,
            error: e1 || e2_not_e1 || e3,
            index: enc.index,
            decoded: dec.index,
            distortion: mean_distortion(&s, &dec.reconstruction, &scn.distortion),
        })
    };
    let outcomes = (0..cfg.trials).into_par_iter().map(trial).collect::<Result<Vec<_>>>()?;

    let t = outcomes.len();
    let count_of = |f: fn(&P2pTrial) -> bool| outcomes.iter().filter(|o| f(o)).count();
    let distortions: Vec<f64> = outcomes.iter().map(|o| o.distortion).collect();
    let clean: Vec<f64> = outcomes.iter().filter(|o| !o.error).map(|o| o.distortion).collect();
    let report = P2pReport {
        n,
        trials: t,
        rate: spec.rate,
        codebook_size: count,
        epsilon: cfg.epsilon,
        epsilon_prime: cfg.epsilon_prime,
        seed: cfg.seed,
        p_e1: Estimate::proportion(count_of(|o| o.e1), t),
        p_e2_not_e1: Estimate::proportion(count_of(|o| o.e2_not_e1), t),
        p_e3: Estimate::proportion(count_of(|o| o.e3), t),
        p_error: Estimate::proportion(count_of(|o| o.error), t),
        mean_distortion: Estimate::sample(&distortions),
        distortion_given_no_error: (!clean.is_empty()).then(|| clean.iter().sum::<f64>() / clean.len() as f64),
        no_error_trials: clean.len(),
    };
    Ok(P2pRun { report, outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::{ConditionalPmf, DistortionMeasure, JointPmf, Pmf};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn window(probs: Vec<f64>, eps: f64, n: usize) -> TypicalWindow {
        TypicalWindow::new(&JointPmf::new(vec![2, 2], probs).unwrap(), eps, n).unwrap()
    }

    fn book(entries: &[[usize; 4]]) -> Codebook {
        Codebook::from_entries(entries.iter().map(|e| e.to_vec()).collect(), Pmf::uniform(2).unwrap()).unwrap()
    }

    #[test]
    fn single_typical_codeword_is_chosen() {
        let cb = book(&[[0, 0, 0, 0], [1, 1, 1, 1], [0, 1, 1, 0], [1, 0, 1, 0]]);
        // U = S exactly: only the codeword equal to s is typical.
        let w = window(vec![0.5, 0.0, 0.0, 0.5], 0.2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            assert_eq!(select_index(&[0, 1, 1, 0], &cb, &w, &mut rng).unwrap(), (2, 1));
        }
    }

    #[test]
    fn fallback_index_is_uniform() {
        // s is atypical for every codeword, so the index is uniform over 8.
        let u = Pmf::uniform(2).unwrap();
        let cb = generate_codebook(3, 1.0, &u, 5, 1 << 20).unwrap();
        let w = window(vec![0.25; 4], 0.1, 3);
        let s = vec![0, 0, 1];
        let mut counts = [0usize; 8];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 8000;
        for _ in 0..draws {
            let (m, hits) = select_index(&s, &cb, &w, &mut rng).unwrap();
            assert_eq!(hits, 0);
            counts[m] += 1;
        }
        let expected = draws as f64 / 8.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // chi-square critical value, 7 degrees of freedom, significance 0.01
        assert!(chi2 < 18.475, "chi2 = {chi2}");
    }

    #[test]
    fn decoder_falls_back_to_first_index() {
        let w = window(vec![0.5, 0.0, 0.0, 0.5], 0.2, 4);
        let dec = vec![vec![0, 1], vec![1, 0]];
        let cb = book(&[[0, 0, 0, 0], [0, 1, 1, 0], [1, 0, 1, 0]]);
        let d = decode_p2p(&[1, 0, 1, 0], &cb, &w, &dec).unwrap();
        assert_eq!((d.index, d.candidates.clone()), (2, vec![2]));
        let d = decode_p2p(&[1, 1, 0, 0], &cb, &w, &dec).unwrap();
        assert!(d.candidates.is_empty());
        assert_eq!(d.index, 0);
        assert_eq!(d.reconstruction, vec![1, 1, 0, 0]);
        let twice = book(&[[1, 1, 1, 1], [0, 1, 1, 0], [0, 1, 1, 0]]);
        let d = decode_p2p(&[0, 1, 1, 0], &twice, &w, &dec).unwrap();
        assert_eq!((d.index, d.candidates), (0, vec![1, 2]));
    }

    #[test]
    fn uncoded_bsc_distortion() {
        let scn = P2pScenario::new(
            Pmf::uniform(2).unwrap(),
            ConditionalPmf::bsc(0.1).unwrap(),
            DistortionMeasure::hamming(2),
        )
        .unwrap();
        let spec = HybridCodeSpec::uncoded(vec![0, 1], vec![0, 1]).unwrap();
        let run = run_p2p(&TrialConfig::new(1000, 100, 2024), &scn, &spec).unwrap();
        let d = run.report.mean_distortion;
        assert!((d.mean - 0.1).abs() <= 3.0 * d.std_error, "{d:?}");
        assert!(run.outcomes.iter().all(|o| o.index == 0 && o.decoded == 0));
    }

    #[test]
    fn length_mismatch() {
        let u = Pmf::uniform(2).unwrap();
        let cb = generate_codebook(4, 0.5, &u, 8, 1 << 20).unwrap();
        let w = window(vec![0.25; 4], 0.2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(select_index(&[0, 1], &cb, &w, &mut rng).is_err());
    }
}
