//! Two-sender hybrid coding over a MAC with a joint index-pair decoder.
//!
//! Events, per trial:
//! `E1`, `E2`: sender 1 / 2 found no codeword typical with its source;
//! `E3`: `(S1, S2, U1(M1), U2(M2), Y)` not typical while both encoders succeeded;
//! `E4`: a pair with both indices wrong is typical with `Y`;
//! `E5`: only the first index wrong; `E6`: only the second index wrong.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::mac::{
    thm2_joint, MacHybridSpec, MacScenario, AXIS_S1, AXIS_S2, AXIS_U1, AXIS_U2, AXIS_Y,
};
use crate::error::{Error, Result};
use crate::infotheory::{mean_distortion, TypicalWindow};

use super::{
    codebook_size, draw, generate_codebook, kernel_samplers, pmf_sampler, purpose_rng, select_index, Estimate,
    TrialConfig, PURPOSE_CHANNEL, PURPOSE_CODEBOOK, PURPOSE_SOURCE, PURPOSE_TIEBREAK,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacTrial {
    pub trial: usize,
    pub seed: u64,
    pub events: [bool; 6],
    pub error: bool,
    pub indices: [usize; 2],
    pub decoded: [usize; 2],
    pub distortions: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacReport {
    pub n: usize,
    pub trials: usize,
    pub rates: [f64; 2],
    pub codebook_sizes: [u64; 2],
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub seed: u64,
    /// `E1 .. E6` in order.
    pub events: Vec<Estimate>,
    pub p_error: Estimate,
    pub mean_distortions: [Estimate; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacRun {
    pub report: MacReport,
    pub outcomes: Vec<MacTrial>,
}

const PURPOSE_SECOND: u64 = 0x100;

/// Runs the MAC scheme without time sharing (`|Q| = 1`). The decoder
/// searches all `2^(n(R1+R2))` index pairs; the pair search counts against
/// the symbol cap together with the codebooks.
pub fn run_mac(cfg: &TrialConfig, scn: &MacScenario, spec: &MacHybridSpec) -> Result<MacRun> {
    cfg.validate()?;
    if spec.q_size() != 1 {
        return Err(Error::InvalidParameter(format!(
            "simulation runs without time sharing, got |Q| = {}",
            spec.q_size()
        )));
    }
    let joint = thm2_joint(scn, spec)?;
    let n = cfg.n;
    let sizes = [codebook_size(n, spec.rates[0])?, codebook_size(n, spec.rates[1])?];
    let pair_symbols = sizes[0].saturating_mul(sizes[1]).saturating_mul(n as u64);
    let book_symbols = (sizes[0] + sizes[1]).saturating_mul(n as u64);
    if pair_symbols.max(book_symbols) > cfg.symbol_cap {
        return Err(Error::ResourceCap(format!(
            "pair search over {} x {} codewords of length {n} exceeds the {}-symbol cap",
            sizes[0], sizes[1], cfg.symbol_cap
        )));
    }

    let cover = [
        TypicalWindow::new(&joint.marginal(&[AXIS_U1, AXIS_S1])?, cfg.epsilon_prime, n)?,
        TypicalWindow::new(&joint.marginal(&[AXIS_U2, AXIS_S2])?, cfg.epsilon_prime, n)?,
    ];
    let pack = TypicalWindow::new(&joint.marginal(&[AXIS_U1, AXIS_U2, AXIS_Y])?, cfg.epsilon, n)?;
    let full = TypicalWindow::new(
        &joint.marginal(&[AXIS_S1, AXIS_S2, AXIS_U1, AXIS_U2, AXIS_Y])?,
        cfg.epsilon,
        n,
    )?;
    let aux = [joint.marginal_pmf(AXIS_U1)?, joint.marginal_pmf(AXIS_U2)?];
    let source = pmf_sampler(&crate::infotheory::Pmf::new(scn.sources.probs().to_vec())?)?;
    let channel = kernel_samplers(&scn.channel)?;
    let ns2 = scn.source_sizes()[1];
    let nx2 = scn.input_sizes[1];
    let ny = scn.output_size();

    let trial = |t: usize| -> Result<MacTrial> {
        let seed = cfg.trial_seed(t);
        let flat = draw(&source, n, &mut purpose_rng(seed, PURPOSE_SOURCE));
        let s: [Vec<usize>; 2] = [
            flat.iter().map(|f| f / ns2).collect(),
            flat.iter().map(|f| f % ns2).collect(),
        ];
        let mut books = Vec::with_capacity(2);
        let mut idx = [0usize; 2];
        let mut hits = [0usize; 2];
        let mut x: [Vec<usize>; 2] = [vec![], vec![]];
        for j in 0..2 {
            let purpose = |p: u64| p + PURPOSE_SECOND * j as u64;
            let cb = generate_codebook(
                n,
                spec.rates[j],
                &aux[j],
                purpose_rng(seed, purpose(PURPOSE_CODEBOOK)).gen(),
                cfg.symbol_cap,
            )?;
            let (m, h) = select_index(&s[j], &cb, &cover[j], &mut purpose_rng(seed, purpose(PURPOSE_TIEBREAK)))?;
            x[j] = cb.entry(m).iter().zip(&s[j]).map(|(&u, &sj)| spec.enc[j][0][u][sj]).collect();
            (idx[j], hits[j]) = (m, h);
            books.push(cb);
        }
        let mut noise = purpose_rng(seed, PURPOSE_CHANNEL);
        let y: Vec<usize> = (0..n).map(|i| noise.sample(&channel[x[0][i] * nx2 + x[1][i]])).collect();

        let mut scratch = Vec::new();
        let mut typical_pairs = 0usize;
        let mut found = (0, 0);
        let (mut e4, mut e5, mut e6) = (false, false, false);
        for m1 in 0..books[0].len() {
            for m2 in 0..books[1].len() {
                if pack.contains_with(&[books[0].entry(m1), books[1].entry(m2), &y], &mut scratch) {
                    typical_pairs += 1;
                    found = (m1, m2);
                    match (m1 != idx[0], m2 != idx[1]) {
                        (true, true) => e4 = true,
                        (true, false) => e5 = true,
                        (false, true) => e6 = true,
                        (false, false) => {}
                    }
                }
            }
        }
        let decoded = if typical_pairs == 1 { [found.0, found.1] } else { [0, 0] };
        let (u1, u2) = (books[0].entry(decoded[0]), books[1].entry(decoded[1]));
        let distortions = [0, 1].map(|j| {
            let shat: Vec<usize> = (0..n).map(|i| spec.dec[j][0][u1[i]][u2[i] * ny + y[i]]).collect();
            mean_distortion(&s[j], &shat, &scn.distortions[j])
        });
        let e1 = hits[0] == 0;
        let e2 = hits[1] == 0;
        let e3 = !e1
            && !e2
            && !full.contains(&[&s[0], &s[1], books[0].entry(idx[0]), books[1].entry(idx[1]), &y]);
        let events = [e1, e2, e3, e4, e5, e6];
        Ok(MacTrial {
            trial: t,
            seed,
            events,
            error: events.iter().any(|&e| e),
            indices: idx,
            decoded,
            distortions,
        })
    };
    let outcomes = (0..cfg.trials).into_par_iter().map(trial).collect::<Result<Vec<_>>>()?;

    let t = outcomes.len();
    let events = (0..6)
        .map(|k| Estimate::proportion(outcomes.iter().filter(|o| o.events[k]).count(), t))
        .collect();
    let mean_distortions =
        [0, 1].map(|j| Estimate::sample(&outcomes.iter().map(|o| o.distortions[j]).collect::<Vec<_>>()));
    let report = MacReport {
        n,
        trials: t,
        rates: spec.rates,
        codebook_sizes: sizes,
        epsilon: cfg.epsilon,
        epsilon_prime: cfg.epsilon_prime,
        seed: cfg.seed,
        events,
        p_error: Estimate::proportion(outcomes.iter().filter(|o| o.error).count(), t),
        mean_distortions,
    };
    Ok(MacRun { report, outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::mac::lossless_spec;
    use crate::infotheory::{ConditionalPmf, DistortionMeasure, JointPmf, Pmf};

    fn orthogonal() -> MacScenario {
        MacScenario::noiseless(
            JointPmf::new(vec![2, 2], vec![0.25; 4]).unwrap(),
            [2, 2],
            [DistortionMeasure::hamming(2), DistortionMeasure::hamming(2)],
        )
        .unwrap()
    }

    /// `U` constant, `X_j = S_j`, each decoder reads its own component of `Y`.
    fn uncoded_spec() -> MacHybridSpec {
        let one = ConditionalPmf::new(vec![vec![1.0]; 2]).unwrap();
        MacHybridSpec {
            time_sharing: Pmf::uniform(1).unwrap(),
            aux: [vec![one.clone()], vec![one]],
            enc: [vec![vec![vec![0, 1]]], vec![vec![vec![0, 1]]]],
            dec: [
                vec![vec![(0..4).map(|y| y / 2).collect()]],
                vec![vec![(0..4).map(|y| y % 2).collect()]],
            ],
            rates: [0.0, 0.0],
        }
    }

    fn lossless(scn: &MacScenario, rates: [f64; 2]) -> MacHybridSpec {
        let id = ConditionalPmf::identity(2).unwrap();
        let mut spec = lossless_spec(scn, &Pmf::uniform(1).unwrap(), &[vec![id.clone()], vec![id]]).unwrap();
        spec.rates = rates;
        spec
    }

    #[test]
    fn orthogonal_uncoded_is_error_free() {
        let scn = orthogonal();
        let run = run_mac(&TrialConfig::new(400, 20, 5), &scn, &uncoded_spec()).unwrap();
        assert!(run.outcomes.iter().all(|o| !o.error && o.distortions == [0.0, 0.0]));
        assert_eq!(run.report.codebook_sizes, [1, 1]);
    }

    #[test]
    fn q_must_be_trivial() {
        let scn = orthogonal();
        let mut spec = lossless(&scn, [0.5, 0.5]);
        spec.time_sharing = Pmf::uniform(2).unwrap();
        spec.aux = [0, 1].map(|j| vec![spec.aux[j][0].clone(); 2]);
        spec.enc = [0, 1].map(|j| vec![spec.enc[j][0].clone(); 2]);
        spec.dec = [0, 1].map(|j| vec![spec.dec[j][0].clone(); 2]);
        assert!(run_mac(&TrialConfig::new(4, 2, 0), &scn, &spec).is_err());
    }

    #[test]
    fn pair_search_cap() {
        let scn = orthogonal();
        let spec = lossless(&scn, [1.0, 1.0]);
        let cfg = TrialConfig::new(12, 1, 0);
        assert!(matches!(run_mac(&cfg, &scn, &spec), Err(Error::ResourceCap(_))));
    }
}
