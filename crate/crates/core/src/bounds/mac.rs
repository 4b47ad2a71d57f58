//! Hybrid coding over a multiple access channel with correlated sources,
//! including the lossless substitution `U_j = (X_j, S_j)` and the
//! distributed-compression substitution over a noiseless MAC.

use serde::{Deserialize, Serialize};

use super::report::{BoundReport, Constraint};
use super::{check_kernel, check_table};
use crate::error::{Error, Result};
use crate::infotheory::{compose_joint, ConditionalPmf, DistortionMeasure, JointPmf, Pmf, Stage};

pub const AXIS_Q: usize = 0;
pub const AXIS_S1: usize = 1;
pub const AXIS_S2: usize = 2;
pub const AXIS_U1: usize = 3;
pub const AXIS_U2: usize = 4;
pub const AXIS_X1: usize = 5;
pub const AXIS_X2: usize = 6;
pub const AXIS_Y: usize = 7;
pub const AXIS_SHAT1: usize = 8;
pub const AXIS_SHAT2: usize = 9;

/// Largest supported time-sharing alphabet.
pub const MAX_TIME_SHARING: usize = 2;

pub const C1: &str = "I(U1;S1|U2,Q) < I(U1;Y|U2,Q)";
pub const C2: &str = "I(U2;S2|U1,Q) < I(U2;Y|U1,Q)";
pub const C3: &str = "I(U1,U2;S1,S2|Q) < I(U1,U2;Y|Q)";

/// Correlated sources over a two-user MAC `p(y|x1,x2)` (rows `x1 * |X2| + x2`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacScenario {
    /// `p(s1, s2)` with dims `[|S1|, |S2|]`.
    pub sources: JointPmf,
    pub input_sizes: [usize; 2],
    pub channel: ConditionalPmf,
    pub distortions: [DistortionMeasure; 2],
}

impl MacScenario {
    pub fn validate(&self) -> Result<()> {
        if self.sources.ndim() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "source joint has {} axes, expected 2",
                self.sources.ndim()
            )));
        }
        check_kernel(
            &self.channel,
            self.input_sizes[0] * self.input_sizes[1],
            None,
            "MAC p(y|x1,x2)",
        )?;
        for j in 0..2 {
            if self.distortions[j].source_size() != self.sources.dims()[j] {
                return Err(Error::DimensionMismatch(format!(
                    "distortion table {} has {} rows for {} source symbols",
                    j + 1,
                    self.distortions[j].source_size(),
                    self.sources.dims()[j]
                )));
            }
        }
        Ok(())
    }

    pub fn source_sizes(&self) -> [usize; 2] {
        [self.sources.dims()[0], self.sources.dims()[1]]
    }

    pub fn output_size(&self) -> usize {
        self.channel.outputs()
    }

    /// Noiseless MAC `Y = (X1, X2)` with output index `x1 * |X2| + x2`.
    pub fn noiseless(sources: JointPmf, input_sizes: [usize; 2], distortions: [DistortionMeasure; 2]) -> Result<Self> {
        let s = Self {
            sources,
            input_sizes,
            channel: ConditionalPmf::identity(input_sizes[0] * input_sizes[1])?,
            distortions,
        };
        s.validate()?;
        Ok(s)
    }
}

/// Per-sender auxiliary kernels and maps for each time-sharing symbol `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacHybridSpec {
    pub time_sharing: Pmf,
    /// `aux[j][q]` is `p(u_j | s_j, q)`.
    pub aux: [Vec<ConditionalPmf>; 2],
    /// `enc[j][q][u_j][s_j]` is `x_j(q, u_j, s_j)`.
    pub enc: [Vec<Vec<Vec<usize>>>; 2],
    /// `dec[j][q][u1][u2 * |Y| + y]` is `ŝ_j(q, u1, u2, y)`.
    pub dec: [Vec<Vec<Vec<usize>>>; 2],
    #[serde(default)]
    pub rates: [f64; 2],
}

impl MacHybridSpec {
    pub fn q_size(&self) -> usize {
        self.time_sharing.alphabet_size()
    }

    pub fn aux_sizes(&self) -> [usize; 2] {
        [self.aux[0][0].outputs(), self.aux[1][0].outputs()]
    }

    pub fn validate(&self, scn: &MacScenario) -> Result<()> {
        scn.validate()?;
        let nq = self.q_size();
        if nq > MAX_TIME_SHARING {
            return Err(Error::InvalidParameter(format!(
                "time sharing over {nq} symbols, at most {MAX_TIME_SHARING} supported"
            )));
        }
        let ns = scn.source_sizes();
        for j in 0..2 {
            if self.aux[j].len() != nq || self.enc[j].len() != nq || self.dec[j].len() != nq {
                return Err(Error::DimensionMismatch(format!(
                    "sender {} needs one kernel and map per time-sharing symbol ({nq})",
                    j + 1
                )));
            }
        }
        let nu = self.aux_sizes();
        let ny = scn.output_size();
        for q in 0..nq {
            for j in 0..2 {
                check_kernel(&self.aux[j][q], ns[j], Some(nu[j]), &format!("aux kernel {} (q={q})", j + 1))?;
                check_table(&self.enc[j][q], nu[j], ns[j], scn.input_sizes[j], &format!("encoder {} (q={q})", j + 1))?;
                check_table(
                    &self.dec[j][q],
                    nu[0],
                    nu[1] * ny,
                    scn.distortions[j].reconstruction_size(),
                    &format!("decoder {} (q={q})", j + 1),
                )?;
            }
        }
        Ok(())
    }
}

/// Joint pmf of `(Q, S1, S2, U1, U2, X1, X2, Y, Ŝ1, Ŝ2)`.
pub fn thm2_joint(scn: &MacScenario, spec: &MacHybridSpec) -> Result<JointPmf> {
    spec.validate(scn)?;
    let nq = spec.q_size();
    let ns = scn.source_sizes();
    let nu = spec.aux_sizes();
    let ny = scn.output_size();
    let source_kernel = ConditionalPmf::constant(nq, &Pmf::new(scn.sources.probs().to_vec())?)?;
    let stacked = |j: usize| -> Result<ConditionalPmf> {
        ConditionalPmf::new(
            (0..nq)
                .flat_map(|q| (0..ns[j]).map(move |s| (q, s)))
                .map(|(q, s)| spec.aux[j][q].row(s).to_vec())
                .collect(),
        )
    };
    let enc_kernel = |j: usize| -> Result<ConditionalPmf> {
        let flat: Vec<usize> = spec.enc[j].iter().flatten().flatten().copied().collect();
        ConditionalPmf::deterministic(&flat, scn.input_sizes[j])
    };
    let dec_kernel = |j: usize| -> Result<ConditionalPmf> {
        let flat: Vec<usize> = spec.dec[j].iter().flatten().flatten().copied().collect();
        debug_assert_eq!(flat.len(), nq * nu[0] * nu[1] * ny);
        ConditionalPmf::deterministic(&flat, scn.distortions[j].reconstruction_size())
    };
    let (a1, a2) = (stacked(0)?, stacked(1)?);
    let (e1, e2) = (enc_kernel(0)?, enc_kernel(1)?);
    let (d1, d2) = (dec_kernel(0)?, dec_kernel(1)?);
    let base = JointPmf::from_pmf(&spec.time_sharing)
        .extend(&[AXIS_Q], &source_kernel)?
        .split_axis(1, &ns)?;
    compose_joint(
        &base,
        &[
            Stage::new(&[AXIS_Q, AXIS_S1], &a1),
            Stage::new(&[AXIS_Q, AXIS_S2], &a2),
            Stage::new(&[AXIS_Q, AXIS_U1, AXIS_S1], &e1),
            Stage::new(&[AXIS_Q, AXIS_U2, AXIS_S2], &e2),
            Stage::new(&[AXIS_X1, AXIS_X2], &scn.channel),
            Stage::new(&[AXIS_Q, AXIS_U1, AXIS_U2, AXIS_Y], &d1),
            Stage::new(&[AXIS_Q, AXIS_U1, AXIS_U2, AXIS_Y], &d2),
        ],
    )
}

/// Evaluates the three conditions and both expected distortions.
pub fn thm2_region_check(scn: &MacScenario, spec: &MacHybridSpec, margin: f64) -> Result<BoundReport> {
    let j = thm2_joint(scn, spec)?;
    let q = [AXIS_Q];
    let c1 = Constraint::strict(
        C1,
        j.conditional_mutual_information(&[AXIS_U1], &[AXIS_S1], &[AXIS_U2, AXIS_Q])?,
        j.conditional_mutual_information(&[AXIS_U1], &[AXIS_Y], &[AXIS_U2, AXIS_Q])?,
        margin,
    );
    let c2 = Constraint::strict(
        C2,
        j.conditional_mutual_information(&[AXIS_U2], &[AXIS_S2], &[AXIS_U1, AXIS_Q])?,
        j.conditional_mutual_information(&[AXIS_U2], &[AXIS_Y], &[AXIS_U1, AXIS_Q])?,
        margin,
    );
    let c3 = Constraint::strict(
        C3,
        j.conditional_mutual_information(&[AXIS_U1, AXIS_U2], &[AXIS_S1, AXIS_S2], &q)?,
        j.conditional_mutual_information(&[AXIS_U1, AXIS_U2], &[AXIS_Y], &q)?,
        margin,
    );
    let mut r = BoundReport::from_constraints("hybrid coding MAC", vec![c1, c2, c3]);
    r.expected_distortions = vec![
        j.expectation(AXIS_S1, AXIS_SHAT1, &scn.distortions[0])?,
        j.expectation(AXIS_S2, AXIS_SHAT2, &scn.distortions[1])?,
    ];
    Ok(r)
}

/// Lossless substitution `U_j = (X_j, S_j)` with index `x_j * |S_j| + s_j`,
/// inputs drawn from `inputs[j][q]` = `p(x_j | s_j, q)` and identity
/// reconstruction. Distortion tables must be square.
pub fn lossless_spec(scn: &MacScenario, time_sharing: &Pmf, inputs: &[Vec<ConditionalPmf>; 2]) -> Result<MacHybridSpec> {
    scn.validate()?;
    let nq = time_sharing.alphabet_size();
    let ns = scn.source_sizes();
    let nx = scn.input_sizes;
    let ny = scn.output_size();
    let mut aux: [Vec<ConditionalPmf>; 2] = [vec![], vec![]];
    let mut enc: [Vec<Vec<Vec<usize>>>; 2] = [vec![], vec![]];
    let mut dec: [Vec<Vec<Vec<usize>>>; 2] = [vec![], vec![]];
    for j in 0..2 {
        if inputs[j].len() != nq {
            return Err(Error::DimensionMismatch(format!("sender {} input kernels per q", j + 1)));
        }
        for q in 0..nq {
            let k = &inputs[j][q];
            check_kernel(k, ns[j], Some(nx[j]), "input kernel p(x|s,q)")?;
            let nu = nx[j] * ns[j];
            let rows = (0..ns[j])
                .map(|s| {
                    (0..nu)
                        .map(|u| if u % ns[j] == s { k.prob(s, u / ns[j]) } else { 0.0 })
                        .collect()
                })
                .collect();
            aux[j].push(ConditionalPmf::new(rows)?);
            enc[j].push((0..nu).map(|u| vec![u / ns[j]; ns[j]]).collect());
        }
    }
    let nu = [nx[0] * ns[0], nx[1] * ns[1]];
    for _ in 0..nq {
        dec[0].push((0..nu[0]).map(|u1| vec![u1 % ns[0]; nu[1] * ny]).collect());
        dec[1].push(
            (0..nu[0])
                .map(|_| (0..nu[1] * ny).map(|c| (c / ny) % ns[1]).collect())
                .collect(),
        );
    }
    Ok(MacHybridSpec {
        time_sharing: time_sharing.clone(),
        aux,
        enc,
        dec,
        rates: [0.0; 2],
    })
}

/// Joint `(Q, S1, S2, X1, X2, Y)` with inputs `p(x_j|s_j,q)`.
fn lossless_joint(scn: &MacScenario, time_sharing: &Pmf, inputs: &[Vec<ConditionalPmf>; 2]) -> Result<JointPmf> {
    let nq = time_sharing.alphabet_size();
    let ns = scn.source_sizes();
    let stacked = |j: usize| -> Result<ConditionalPmf> {
        ConditionalPmf::new(
            (0..nq)
                .flat_map(|q| (0..ns[j]).map(move |s| (q, s)))
                .map(|(q, s)| inputs[j][q].row(s).to_vec())
                .collect(),
        )
    };
    let base = JointPmf::from_pmf(time_sharing)
        .extend(&[0], &ConditionalPmf::constant(nq, &Pmf::new(scn.sources.probs().to_vec())?)?)?
        .split_axis(1, &ns)?;
    let (k1, k2) = (stacked(0)?, stacked(1)?);
    compose_joint(
        &base,
        &[
            Stage::new(&[0, 1], &k1),
            Stage::new(&[0, 2], &k2),
            Stage::new(&[3, 4], &scn.channel),
        ],
    )
}

/// The lossless conditions in their reduced form:
/// `H(S1|S2) < I(X1;Y|X2,S2,Q)`, `H(S2|S1) < I(X2;Y|X1,S1,Q)`,
/// `H(S1,S2) < I(X1,X2;Y|Q)`, in the same order as the general check.
pub fn lossless_constraints(
    scn: &MacScenario,
    time_sharing: &Pmf,
    inputs: &[Vec<ConditionalPmf>; 2],
    margin: f64,
) -> Result<Vec<Constraint>> {
    let j = lossless_joint(scn, time_sharing, inputs)?;
    let (q, s1, s2, x1, x2, y) = (0, 1, 2, 3, 4, 5);
    let h = |a: &[usize]| j.entropy_of(a);
    Ok(vec![
        Constraint::strict(
            "H(S1|S2) < I(X1;Y|X2,S2,Q)",
            h(&[s1, s2])? - h(&[s2])?,
            j.conditional_mutual_information(&[x1], &[y], &[x2, s2, q])?,
            margin,
        ),
        Constraint::strict(
            "H(S2|S1) < I(X2;Y|X1,S1,Q)",
            h(&[s1, s2])? - h(&[s1])?,
            j.conditional_mutual_information(&[x2], &[y], &[x1, s1, q])?,
            margin,
        ),
        Constraint::strict(
            "H(S1,S2) < I(X1,X2;Y|Q)",
            h(&[s1, s2])?,
            j.conditional_mutual_information(&[x1, x2], &[y], &[q])?,
            margin,
        ),
    ])
}

/// Distributed-compression substitution over the noiseless MAC:
/// `U_j = (X_j, Ũ_j)` with `X_j` uniform and independent of everything else,
/// index `x_j * |Ũ_j| + ũ_j`. `quantizers[j][q]` is `p(ũ_j | s_j, q)` and
/// `recon[j][q][ũ1][ũ2]` is `ŝ_j`.
pub fn distributed_spec(
    scn: &MacScenario,
    time_sharing: &Pmf,
    quantizers: &[Vec<ConditionalPmf>; 2],
    recon: &[Vec<Vec<Vec<usize>>>; 2],
) -> Result<MacHybridSpec> {
    scn.validate()?;
    let nx = scn.input_sizes;
    if scn.channel != ConditionalPmf::identity(nx[0] * nx[1])? {
        return Err(Error::InvalidParameter(
            "distributed-compression substitution needs the noiseless MAC Y = (X1, X2)".into(),
        ));
    }
    let nq = time_sharing.alphabet_size();
    let ns = scn.source_sizes();
    let nut = [quantizers[0][0].outputs(), quantizers[1][0].outputs()];
    let nu = [nx[0] * nut[0], nx[1] * nut[1]];
    let ny = scn.output_size();
    let mut aux: [Vec<ConditionalPmf>; 2] = [vec![], vec![]];
    let mut enc: [Vec<Vec<Vec<usize>>>; 2] = [vec![], vec![]];
    let mut dec: [Vec<Vec<Vec<usize>>>; 2] = [vec![], vec![]];
    for j in 0..2 {
        if quantizers[j].len() != nq || recon[j].len() != nq {
            return Err(Error::DimensionMismatch(format!("sender {} kernels per q", j + 1)));
        }
        for q in 0..nq {
            let k = &quantizers[j][q];
            check_kernel(k, ns[j], Some(nut[j]), "quantizer p(ũ|s,q)")?;
            check_table(
                &recon[j][q],
                nut[0],
                nut[1],
                scn.distortions[j].reconstruction_size(),
                "reconstruction ŝ(ũ1,ũ2)",
            )?;
            let rows = (0..ns[j])
                .map(|s| (0..nu[j]).map(|u| k.prob(s, u % nut[j]) / nx[j] as f64).collect())
                .collect();
            aux[j].push(ConditionalPmf::new(rows)?);
            enc[j].push((0..nu[j]).map(|u| vec![u / nut[j]; ns[j]]).collect());
            dec[j].push(
                (0..nu[0])
                    .map(|u1| {
                        (0..nu[1] * ny)
                            .map(|c| recon[j][q][u1 % nut[0]][(c / ny) % nut[1]])
                            .collect()
                    })
                    .collect(),
            );
        }
    }
    Ok(MacHybridSpec {
        time_sharing: time_sharing.clone(),
        aux,
        enc,
        dec,
        rates: [(nx[0] as f64).log2(), (nx[1] as f64).log2()],
    })
}

/// The distributed-compression conditions with `R_j = log2 |X_j|`:
/// `I(S1;Ũ1|Ũ2,Q) < R1`, `I(S2;Ũ2|Ũ1,Q) < R2`, `I(S1,S2;Ũ1,Ũ2|Q) < R1 + R2`.
pub fn distributed_constraints(
    scn: &MacScenario,
    time_sharing: &Pmf,
    quantizers: &[Vec<ConditionalPmf>; 2],
    margin: f64,
) -> Result<Vec<Constraint>> {
    let r = [(scn.input_sizes[0] as f64).log2(), (scn.input_sizes[1] as f64).log2()];
    let j = lossless_joint(scn, time_sharing, quantizers)?;
    let (q, s1, s2, u1, u2) = (0, 1, 2, 3, 4);
    Ok(vec![
        Constraint::strict(
            "I(S1;Ũ1|Ũ2,Q) < R1",
            j.conditional_mutual_information(&[s1], &[u1], &[u2, q])?,
            r[0],
            margin,
        ),
        Constraint::strict(
            "I(S2;Ũ2|Ũ1,Q) < R2",
            j.conditional_mutual_information(&[s2], &[u2], &[u1, q])?,
            r[1],
            margin,
        ),
        Constraint::strict(
            "I(S1,S2;Ũ1,Ũ2|Q) < R1+R2",
            j.conditional_mutual_information(&[s1, s2], &[u1, u2], &[q])?,
            r[0] + r[1],
            margin,
        ),
    ])
}

/// Distributed-compression reduced form with expected distortions, as a
/// report comparable to [`thm2_region_check`].
pub fn distributed_report(
    scn: &MacScenario,
    time_sharing: &Pmf,
    quantizers: &[Vec<ConditionalPmf>; 2],
    recon: &[Vec<Vec<Vec<usize>>>; 2],
    margin: f64,
) -> Result<BoundReport> {
    let spec = distributed_spec(scn, time_sharing, quantizers, recon)?;
    let general = thm2_region_check(scn, &spec, margin)?;
    let mut r = BoundReport::from_constraints(
        "distributed lossy compression",
        distributed_constraints(scn, time_sharing, quantizers, margin)?,
    );
    r.expected_distortions = general.expected_distortions;
    Ok(r)
}
