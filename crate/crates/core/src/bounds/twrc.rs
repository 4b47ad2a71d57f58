//! Discrete two-way relay channel: uplink `p(y3|x1,x2)`, downlink
//! `p(y1,y2|x3)`, relay auxiliary `U3` and relay map `x3(u3,y3)`.

use serde::{Deserialize, Serialize};

use super::report::{BoundReport, Constraint};
use super::{check_kernel, check_table, table_kernel};
use crate::error::{Error, Result};
use crate::infotheory::{compose_joint, ConditionalPmf, JointPmf, Pmf, Stage};

pub const AXIS_X1: usize = 0;
pub const AXIS_X2: usize = 1;
pub const AXIS_Y3: usize = 2;
pub const AXIS_U3: usize = 3;
pub const AXIS_X3: usize = 4;
pub const AXIS_Y1: usize = 5;
pub const AXIS_Y2: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwrcChannel {
    /// `|X1|, |X2|`.
    pub input_sizes: [usize; 2],
    /// `p(y3 | x1, x2)`, rows `x1 * |X2| + x2`.
    pub uplink: ConditionalPmf,
    /// `|Y1|, |Y2|`.
    pub output_sizes: [usize; 2],
    /// `p(y1, y2 | x3)`, columns `y1 * |Y2| + y2`.
    pub downlink: ConditionalPmf,
}

impl TwrcChannel {
    pub fn validate(&self) -> Result<()> {
        check_kernel(&self.uplink, self.input_sizes[0] * self.input_sizes[1], None, "uplink p(y3|x1,x2)")?;
        check_kernel(
            &self.downlink,
            self.downlink.inputs(),
            Some(self.output_sizes[0] * self.output_sizes[1]),
            "downlink p(y1,y2|x3)",
        )
    }

    pub fn relay_input_size(&self) -> usize {
        self.downlink.inputs()
    }
}

/// Input pmfs, relay auxiliary kernel `p(u3|y3)` and relay map `x3(u3, y3)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwrcSpec {
    pub inputs: [Pmf; 2],
    pub relay_kernel: ConditionalPmf,
    /// `relay_map[u3][y3]`
    pub relay_map: Vec<Vec<usize>>,
    /// Rates whose achievability is checked; zero checks only positivity.
    #[serde(default)]
    pub target_rates: [f64; 2],
}

impl TwrcSpec {
    pub fn validate(&self, ch: &TwrcChannel) -> Result<()> {
        ch.validate()?;
        for j in 0..2 {
            if self.inputs[j].alphabet_size() != ch.input_sizes[j] {
                return Err(Error::DimensionMismatch(format!(
                    "input pmf {} has {} symbols, channel expects {}",
                    j + 1,
                    self.inputs[j].alphabet_size(),
                    ch.input_sizes[j]
                )));
            }
        }
        check_kernel(&self.relay_kernel, ch.uplink.outputs(), None, "relay kernel p(u3|y3)")?;
        check_table(
            &self.relay_map,
            self.relay_kernel.outputs(),
            ch.uplink.outputs(),
            ch.relay_input_size(),
            "relay map x3(u3,y3)",
        )
    }

    /// Quantize-and-forward form `U3 = (Ŷ3, X3)` with `X3 ~ relay_input`
    /// independent of `Ŷ3 ~ p(ŷ3|y3)`; index `ŷ3 * |X3| + x3`.
    pub fn quantize_forward(inputs: [Pmf; 2], quantizer: &ConditionalPmf, relay_input: &Pmf) -> Result<Self> {
        let nq = quantizer.outputs();
        let nx = relay_input.alphabet_size();
        let ny = quantizer.inputs();
        let rows = (0..ny)
            .map(|y| (0..nq * nx).map(|u| quantizer.prob(y, u / nx) * relay_input.get(u % nx)).collect())
            .collect();
        Ok(Self {
            inputs,
            relay_kernel: ConditionalPmf::new(rows)?,
            relay_map: (0..nq * nx).map(|u| vec![u % nx; ny]).collect(),
            target_rates: [0.0; 2],
        })
    }

    /// `|U3| = 1`: the relay applies the symbol map `x3(y3)`.
    pub fn amplify_forward(inputs: [Pmf; 2], map: Vec<usize>) -> Result<Self> {
        Ok(Self {
            inputs,
            relay_kernel: ConditionalPmf::new(vec![vec![1.0]; map.len()])?,
            relay_map: vec![map],
            target_rates: [0.0; 2],
        })
    }
}

/// Which conditioning the second `R2` term's subtracted information uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thm3Variant {
    /// `I(Y3;U3|X1)` in both second terms.
    #[default]
    AsPrinted,
    /// `I(Y3;U3|X2)` in the second `R2` term, the mirror image of `R1`.
    Mirrored,
}

/// Joint pmf of `(X1, X2, Y3, U3, X3, Y1, Y2)`.
pub fn thm3_joint(ch: &TwrcChannel, spec: &TwrcSpec) -> Result<JointPmf> {
    spec.validate(ch)?;
    let map = table_kernel(&spec.relay_map, ch.relay_input_size())?;
    let joint = compose_joint(
        &JointPmf::product(&[&spec.inputs[0], &spec.inputs[1]])?,
        &[
            Stage::new(&[AXIS_X1, AXIS_X2], &ch.uplink),
            Stage::new(&[AXIS_Y3], &spec.relay_kernel),
            Stage::new(&[AXIS_U3, AXIS_Y3], &map),
            Stage::new(&[AXIS_X3], &ch.downlink),
        ],
    )?;
    joint.split_axis(AXIS_Y1, &ch.output_sizes)
}

pub const R1_DIRECT: &str = "R1 < I(X1;Y2,U3|X2)";
pub const R1_RELAY: &str = "R1 < I(X1,U3;X2,Y2) - I(Y3;U3|X1)";
pub const R2_DIRECT: &str = "R2 < I(X2;Y1,U3|X1)";
pub const R2_RELAY: &str = "R2 < I(X2,U3;X1,Y1) - I(Y3;U3|X1)";
pub const R2_RELAY_MIRRORED: &str = "R2 < I(X2,U3;X1,Y1) - I(Y3;U3|X2)";

/// Evaluates the four rate terms. The report's `rates` is the corner
/// `(min R1 terms, min R2 terms)` clamped at zero; `satisfied` checks the
/// spec's target rates against every term with the margin.
pub fn thm3_region_check(ch: &TwrcChannel, spec: &TwrcSpec, margin: f64, variant: Thm3Variant) -> Result<BoundReport> {
    let j = thm3_joint(ch, spec)?;
    let r1a = j.conditional_mutual_information(&[AXIS_X1], &[AXIS_Y2, AXIS_U3], &[AXIS_X2])?;
    let r1b = j.mutual_information(&[AXIS_X1, AXIS_U3], &[AXIS_X2, AXIS_Y2])?
        - j.conditional_mutual_information(&[AXIS_Y3], &[AXIS_U3], &[AXIS_X1])?;
    let r2a = j.conditional_mutual_information(&[AXIS_X2], &[AXIS_Y1, AXIS_U3], &[AXIS_X1])?;
    let (r2b_name, cond) = match variant {
        Thm3Variant::AsPrinted => (R2_RELAY, AXIS_X1),
        Thm3Variant::Mirrored => (R2_RELAY_MIRRORED, AXIS_X2),
    };
    let r2b = j.mutual_information(&[AXIS_X2, AXIS_U3], &[AXIS_X1, AXIS_Y1])?
        - j.conditional_mutual_information(&[AXIS_Y3], &[AXIS_U3], &[cond])?;
    let [t1, t2] = spec.target_rates;
    let mut report = BoundReport::from_constraints(
        "hybrid coding two-way relay",
        vec![
            Constraint::strict(R1_DIRECT, t1, r1a, margin),
            Constraint::strict(R1_RELAY, t1, r1b, margin),
            Constraint::strict(R2_DIRECT, t2, r2a, margin),
            Constraint::strict(r2b_name, t2, r2b, margin),
        ],
    );
    let raw = [r1a.min(r1b), r2a.min(r2b)];
    report.clamped = raw.iter().any(|&r| r < 0.0);
    report.rates = Some([raw[0].max(0.0), raw[1].max(0.0)]);
    if variant == Thm3Variant::Mirrored {
        report.notes.push("second R2 term conditions on X2".into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Binary adder uplink with noise, and a downlink where each terminal
    /// sees the relay through its own BSC.
    fn channel(up_noise: f64, d1: f64, d2: f64) -> TwrcChannel {
        let mut up = vec![];
        for x1 in 0..2 {
            for x2 in 0..2 {
                let clean = x1 ^ x2;
                let mut row = vec![0.0; 2];
                row[clean] += 1.0 - up_noise;
                row[1 - clean] += up_noise;
                up.push(row);
            }
        }
        let b1 = ConditionalPmf::bsc(d1).unwrap();
        let b2 = ConditionalPmf::bsc(d2).unwrap();
        let down = (0..2)
            .map(|x3| (0..4).map(|y| b1.prob(x3, y / 2) * b2.prob(x3, y % 2)).collect())
            .collect();
        TwrcChannel {
            input_sizes: [2, 2],
            uplink: ConditionalPmf::new(up).unwrap(),
            output_sizes: [2, 2],
            downlink: ConditionalPmf::new(down).unwrap(),
        }
    }

    fn uniform_inputs() -> [Pmf; 2] {
        [Pmf::uniform(2).unwrap(), Pmf::uniform(2).unwrap()]
    }

    #[test]
    fn empty_auxiliary_gives_amplify_forward_form() {
        let ch = channel(0.1, 0.05, 0.2);
        let spec = TwrcSpec::amplify_forward(uniform_inputs(), vec![0, 1]).unwrap();
        let r = thm3_region_check(&ch, &spec, 0.0, Thm3Variant::AsPrinted).unwrap();

        // Direct composition X1, X2 -> Y3 -> X3 = Y3 -> (Y1, Y2).
        let j = compose_joint(
            &JointPmf::product(&[&spec.inputs[0], &spec.inputs[1]]).unwrap(),
            &[Stage::new(&[0, 1], &ch.uplink), Stage::new(&[2], &ch.downlink)],
        )
        .unwrap()
        .split_axis(3, &[2, 2])
        .unwrap();
        let af1 = j.conditional_mutual_information(&[0], &[4], &[1]).unwrap();
        let af2 = j.conditional_mutual_information(&[1], &[3], &[0]).unwrap();
        let c = &r.constraints;
        assert!((c[0].rhs - af1).abs() < 1e-12);
        assert!((c[1].rhs - af1).abs() < 1e-12);
        assert!((c[2].rhs - af2).abs() < 1e-12);
        assert!((c[3].rhs - af2).abs() < 1e-12);
    }

    /// Separately coded quantize-and-forward terms:
    /// `R1 < min(I(X1;Ŷ3,Y2|X2,X3), I(X1,X3;Y2|X2) - I(Y3;Ŷ3|X1,X2,X3,Y2))`.
    fn nnc_terms(ch: &TwrcChannel, inputs: &[Pmf; 2], quant: &ConditionalPmf, relay_input: &Pmf) -> [f64; 4] {
        // Axes: X1, X2, X3, Y3, Ŷ3, Y1, Y2.
        let j = compose_joint(
            &JointPmf::product(&[&inputs[0], &inputs[1], relay_input]).unwrap(),
            &[
                Stage::new(&[0, 1], &ch.uplink),
                Stage::new(&[3], quant),
                Stage::new(&[2], &ch.downlink),
            ],
        )
        .unwrap()
        .split_axis(5, &ch.output_sizes)
        .unwrap();
        let cmi = |a: &[usize], b: &[usize], c: &[usize]| j.conditional_mutual_information(a, b, c).unwrap();
        [
            cmi(&[0], &[4, 6], &[1, 2]),
            cmi(&[0, 2], &[6], &[1]) - cmi(&[3], &[4], &[0, 1, 2, 6]),
            cmi(&[1], &[4, 5], &[0, 2]),
            cmi(&[1, 2], &[5], &[0]) - cmi(&[3], &[4], &[0, 1, 2, 5]),
        ]
    }

    #[test]
    fn quantize_forward_matches_separate_evaluation() {
        let ch = channel(0.1, 0.05, 0.2);
        let inputs = [Pmf::new(vec![0.4, 0.6]).unwrap(), Pmf::new(vec![0.55, 0.45]).unwrap()];
        let quant = ConditionalPmf::bsc(0.15).unwrap();
        let relay_input = Pmf::new(vec![0.3, 0.7]).unwrap();
        let spec = TwrcSpec::quantize_forward(inputs.clone(), &quant, &relay_input).unwrap();
        let nnc = nnc_terms(&ch, &inputs, &quant, &relay_input);
        let r = thm3_region_check(&ch, &spec, 0.0, Thm3Variant::Mirrored).unwrap();
        for (c, v) in r.constraints.iter().zip(nnc) {
            assert!((c.rhs - v).abs() < 1e-12, "{}: {} vs {v}", c.name, c.rhs);
        }
        // The R1 terms agree with the printed form as well.
        let printed = thm3_region_check(&ch, &spec, 0.0, Thm3Variant::AsPrinted).unwrap();
        assert!((printed.constraints[0].rhs - nnc[0]).abs() < 1e-12);
        assert!((printed.constraints[1].rhs - nnc[1]).abs() < 1e-12);
        assert!((printed.constraints[2].rhs - nnc[2]).abs() < 1e-12);
    }

    #[test]
    fn printed_variant_differs_on_asymmetric_instance() {
        let ch = channel(0.1, 0.05, 0.2);
        let inputs = [Pmf::new(vec![0.2, 0.8]).unwrap(), Pmf::new(vec![0.5, 0.5]).unwrap()];
        let spec =
            TwrcSpec::quantize_forward(inputs, &ConditionalPmf::bsc(0.15).unwrap(), &Pmf::uniform(2).unwrap()).unwrap();
        let a = thm3_region_check(&ch, &spec, 0.0, Thm3Variant::AsPrinted).unwrap();
        let b = thm3_region_check(&ch, &spec, 0.0, Thm3Variant::Mirrored).unwrap();
        assert!((a.constraints[3].rhs - b.constraints[3].rhs).abs() > 1e-6);
        assert_eq!(a.constraints[3].name, R2_RELAY);
    }

    #[test]
    fn useless_downlink_clamps_to_zero() {
        let mut ch = channel(0.1, 0.0, 0.0);
        ch.downlink = ConditionalPmf::new(vec![vec![0.25; 4]; 2]).unwrap();
        let spec = TwrcSpec::quantize_forward(
            uniform_inputs(),
            &ConditionalPmf::identity(2).unwrap(),
            &Pmf::uniform(2).unwrap(),
        )
        .unwrap();
        let r = thm3_region_check(&ch, &spec, 0.0, Thm3Variant::AsPrinted).unwrap();
        assert_eq!(r.rates, Some([0.0, 0.0]));
        assert!(r.clamped);
        assert!(!r.satisfied);
    }

    #[test]
    fn binding_constraint_exists() {
        let ch = channel(0.05, 0.1, 0.1);
        let mut spec = TwrcSpec::amplify_forward(uniform_inputs(), vec![0, 1]).unwrap();
        spec.target_rates = [0.1, 0.1];
        let r = thm3_region_check(&ch, &spec, 1e-9, Thm3Variant::AsPrinted).unwrap();
        assert!(r.constraint(&r.binding_constraint).is_some());
    }
}
