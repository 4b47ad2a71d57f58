//! Diamond network: broadcast `p(y2,y3|x1)` to two relays, MAC
//! `p(y4|x2,x3)` to the destination. General hybrid coding lower bound and,
//! for deterministic stages, the hybrid, independent-input and cutset values
//! maximized over input distributions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{BoundReport, Constraint};
use super::{check_kernel, check_table, table_kernel};
use crate::error::{Error, Result};
use crate::infotheory::{compose_joint, ConditionalPmf, JointPmf, Pmf, Stage};
use crate::search::{better, enumerate_simplex, DEFAULT_GRID_CAP};

pub const AXIS_X1: usize = 0;
pub const AXIS_Y2: usize = 1;
pub const AXIS_Y3: usize = 2;
pub const AXIS_U2: usize = 3;
pub const AXIS_U3: usize = 4;
pub const AXIS_X2: usize = 5;
pub const AXIS_X3: usize = 6;
pub const AXIS_Y4: usize = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiamondChannel {
    /// `|Y2|, |Y3|`.
    pub relay_output_sizes: [usize; 2],
    /// `p(y2, y3 | x1)`, columns `y2 * |Y3| + y3`.
    pub broadcast: ConditionalPmf,
    /// `|X2|, |X3|`.
    pub relay_input_sizes: [usize; 2],
    /// `p(y4 | x2, x3)`, rows `x2 * |X3| + x3`.
    pub mac: ConditionalPmf,
}

impl DiamondChannel {
    pub fn validate(&self) -> Result<()> {
        let [a, b] = self.relay_output_sizes;
        check_kernel(&self.broadcast, self.broadcast.inputs(), Some(a * b), "broadcast p(y2,y3|x1)")?;
        let [c, d] = self.relay_input_sizes;
        check_kernel(&self.mac, c * d, None, "MAC p(y4|x2,x3)")
    }

    pub fn source_input_size(&self) -> usize {
        self.broadcast.inputs()
    }

    /// Deterministic channel from symbol maps `(y2, y3)(x1)` and `y4(x2, x3)`.
    pub fn deterministic(
        broadcast: &[(usize, usize)],
        relay_output_sizes: [usize; 2],
        mac: &[Vec<usize>],
        output_size: usize,
    ) -> Result<Self> {
        let flat: Vec<usize> = broadcast
            .iter()
            .map(|&(y2, y3)| y2 * relay_output_sizes[1] + y3)
            .collect();
        let ch = Self {
            relay_output_sizes,
            broadcast: ConditionalPmf::deterministic(&flat, relay_output_sizes[0] * relay_output_sizes[1])?,
            relay_input_sizes: [mac.len(), mac.first().map_or(0, |r| r.len())],
            mac: table_kernel(mac, output_size)?,
        };
        ch.validate()?;
        Ok(ch)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiamondSpec {
    pub source_input: Pmf,
    /// `p(u2|y2)`, `p(u3|y3)`.
    pub relay_kernels: [ConditionalPmf; 2],
    /// `maps[0][u2][y2]` is `x2`, `maps[1][u3][y3]` is `x3`.
    pub relay_maps: [Vec<Vec<usize>>; 2],
    #[serde(default)]
    pub target_rate: f64,
}

impl DiamondSpec {
    pub fn validate(&self, ch: &DiamondChannel) -> Result<()> {
        ch.validate()?;
        if self.source_input.alphabet_size() != ch.source_input_size() {
            return Err(Error::DimensionMismatch(format!(
                "source input pmf has {} symbols, channel expects {}",
                self.source_input.alphabet_size(),
                ch.source_input_size()
            )));
        }
        for j in 0..2 {
            check_kernel(&self.relay_kernels[j], ch.relay_output_sizes[j], None, "relay kernel p(u|y)")?;
            check_table(
                &self.relay_maps[j],
                self.relay_kernels[j].outputs(),
                ch.relay_output_sizes[j],
                ch.relay_input_sizes[j],
                "relay map x(u,y)",
            )?;
        }
        Ok(())
    }

    /// `U_j = (Y_j, X_j)` with `X_j ~ p(x_j|y_j)`; index `y_j * |X_j| + x_j`.
    pub fn from_relay_inputs(source_input: Pmf, relay_inputs: [&ConditionalPmf; 2]) -> Result<Self> {
        let build = |k: &ConditionalPmf| -> Result<(ConditionalPmf, Vec<Vec<usize>>)> {
            let (ny, nx) = (k.inputs(), k.outputs());
            let rows = (0..ny)
                .map(|y| (0..ny * nx).map(|u| if u / nx == y { k.prob(y, u % nx) } else { 0.0 }).collect())
                .collect();
            Ok((ConditionalPmf::new(rows)?, (0..ny * nx).map(|u| vec![u % nx; ny]).collect()))
        };
        let (k2, m2) = build(relay_inputs[0])?;
        let (k3, m3) = build(relay_inputs[1])?;
        Ok(Self {
            source_input,
            relay_kernels: [k2, k3],
            relay_maps: [m2, m3],
            target_rate: 0.0,
        })
    }

    /// `U_j = (X_j, Ŷ_j)` with `X_j ~ p(x_j)` independent of `Ŷ_j ~ p(ŷ_j|y_j)`;
    /// index `x_j * |Ŷ_j| + ŷ_j`.
    pub fn quantize_forward(source_input: Pmf, relay_inputs: [&Pmf; 2], quantizers: [&ConditionalPmf; 2]) -> Result<Self> {
        let build = |px: &Pmf, q: &ConditionalPmf| -> Result<(ConditionalPmf, Vec<Vec<usize>>)> {
            let (ny, nq, nx) = (q.inputs(), q.outputs(), px.alphabet_size());
            let rows = (0..ny)
                .map(|y| (0..nx * nq).map(|u| px.get(u / nq) * q.prob(y, u % nq)).collect())
                .collect();
            Ok((ConditionalPmf::new(rows)?, (0..nx * nq).map(|u| vec![u / nq; ny]).collect()))
        };
        let (k2, m2) = build(relay_inputs[0], quantizers[0])?;
        let (k3, m3) = build(relay_inputs[1], quantizers[1])?;
        Ok(Self {
            source_input,
            relay_kernels: [k2, k3],
            relay_maps: [m2, m3],
            target_rate: 0.0,
        })
    }
}

/// Joint pmf of `(X1, Y2, Y3, U2, U3, X2, X3, Y4)`.
pub fn thm4_joint(ch: &DiamondChannel, spec: &DiamondSpec) -> Result<JointPmf> {
    spec.validate(ch)?;
    let m2 = table_kernel(&spec.relay_maps[0], ch.relay_input_sizes[0])?;
    let m3 = table_kernel(&spec.relay_maps[1], ch.relay_input_sizes[1])?;
    let base = JointPmf::from_pmf(&spec.source_input)
        .extend(&[AXIS_X1], &ch.broadcast)?
        .split_axis(AXIS_Y2, &ch.relay_output_sizes)?;
    compose_joint(
        &base,
        &[
            Stage::new(&[AXIS_Y2], &spec.relay_kernels[0]),
            Stage::new(&[AXIS_Y3], &spec.relay_kernels[1]),
            Stage::new(&[AXIS_U2, AXIS_Y2], &m2),
            Stage::new(&[AXIS_U3, AXIS_Y3], &m3),
            Stage::new(&[AXIS_X2, AXIS_X3], &ch.mac),
        ],
    )
}

pub const T1: &str = "I(X1;U2,U3,Y4)";
pub const T2: &str = "I(X1,U2;U3,Y4) - I(U2;Y2|X1)";
pub const T3: &str = "I(X1,U3;U2,Y4) - I(U3;Y3|X1)";
pub const T4: &str = "I(X1,U2,U3;Y4) - I(U2,U3;Y2,Y3|X1)";

/// Minimum of the four rate terms; `value` is that minimum clamped at zero
/// and `binding_constraint` names the minimizing term.
pub fn thm4_bound(ch: &DiamondChannel, spec: &DiamondSpec, margin: f64) -> Result<BoundReport> {
    let j = thm4_joint(ch, spec)?;
    let (x1, y2, y3, u2, u3, y4) = (AXIS_X1, AXIS_Y2, AXIS_Y3, AXIS_U2, AXIS_U3, AXIS_Y4);
    let terms = [
        (T1, j.mutual_information(&[x1], &[u2, u3, y4])?),
        (
            T2,
            j.mutual_information(&[x1, u2], &[u3, y4])? - j.conditional_mutual_information(&[u2], &[y2], &[x1])?,
        ),
        (
            T3,
            j.mutual_information(&[x1, u3], &[u2, y4])? - j.conditional_mutual_information(&[u3], &[y3], &[x1])?,
        ),
        (
            T4,
            j.mutual_information(&[x1, u2, u3], &[y4])?
                - j.conditional_mutual_information(&[u2, u3], &[y2, y3], &[x1])?,
        ),
    ];
    let constraints = terms
        .iter()
        .map(|&(name, v)| Constraint::strict(format!("R < {name}"), spec.target_rate, v, margin))
        .collect();
    let mut report = BoundReport::from_constraints("hybrid coding diamond", constraints);
    let min = terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    report.clamped = min < 0.0;
    report.value = Some(min.max(0.0));
    Ok(report)
}

/// Input-distribution family maximized over for the deterministic diamond.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFamily {
    /// `p(x1) p(x2|y2) p(x3|y3)`.
    Hybrid,
    /// `p(x1) p(x2) p(x3)`.
    Independent,
    /// `p(x1) p(x2, x3)`.
    Cutset,
}

pub const DET_TERMS: [&str; 4] = ["H(Y2,Y3)", "H(Y2)+H(Y4|X2,Y2)", "H(Y3)+H(Y4|X3,Y3)", "H(Y4)"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetBound {
    pub family: InputFamily,
    pub value: f64,
    pub binding_constraint: String,
    pub terms: [f64; 4],
    pub source_input: Vec<f64>,
    /// Hybrid: `p(x2|y2)` and `p(x3|y3)` rows. Independent: `p(x2)`, `p(x3)`.
    /// Cutset: the single row `p(x2, x3)`, indexed `x2 * |X3| + x3`.
    pub relay_inputs: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetDiamondBounds {
    pub hybrid: DetBound,
    pub independent: DetBound,
    pub cutset: DetBound,
    pub grid_denominator: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetSearchConfig {
    pub grid_denominator: usize,
    pub max_candidates: u64,
}

impl Default for DetSearchConfig {
    fn default() -> Self {
        Self {
            grid_denominator: 12,
            max_candidates: 200_000_000,
        }
    }
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

struct DetDiamond {
    ny: [usize; 2],
    nx: [usize; 2],
    y4: Vec<usize>,
    n4: usize,
}

/// Marginal buffers reused across evaluations.
#[derive(Default)]
struct Scratch {
    p_y2: Vec<f64>,
    p_y3: Vec<f64>,
    p_x2y2: Vec<f64>,
    p_x2y2y4: Vec<f64>,
    p_x3y3: Vec<f64>,
    p_x3y3y4: Vec<f64>,
    p_y4: Vec<f64>,
}

fn reset(v: &mut Vec<f64>, len: usize) {
    v.clear();
    v.resize(len, 0.0);
}

impl DetDiamond {
    /// The four terms given `p(y2, y3)` and `p(x2, x3 | y2, y3)`.
    fn terms(&self, py: &[f64], relay: impl Fn(usize, usize, usize, usize) -> f64, sc: &mut Scratch) -> [f64; 4] {
        let [a, b] = self.ny;
        let [c, d] = self.nx;
        let n4 = self.n4;
        reset(&mut sc.p_y2, a);
        reset(&mut sc.p_y3, b);
        reset(&mut sc.p_x2y2, c * a);
        reset(&mut sc.p_x2y2y4, c * a * n4);
        reset(&mut sc.p_x3y3, d * b);
        reset(&mut sc.p_x3y3y4, d * b * n4);
        reset(&mut sc.p_y4, n4);
        for y2 in 0..a {
            for y3 in 0..b {
                let pyy = py[y2 * b + y3];
                if pyy == 0.0 {
                    continue;
                }
                sc.p_y2[y2] += pyy;
                sc.p_y3[y3] += pyy;
                for x2 in 0..c {
                    for x3 in 0..d {
                        let p = pyy * relay(y2, y3, x2, x3);
                        if p == 0.0 {
                            continue;
                        }
                        let y4 = self.y4[x2 * d + x3];
                        sc.p_x2y2[x2 * a + y2] += p;
                        sc.p_x2y2y4[(x2 * a + y2) * n4 + y4] += p;
                        sc.p_x3y3[x3 * b + y3] += p;
                        sc.p_x3y3y4[(x3 * b + y3) * n4 + y4] += p;
                        sc.p_y4[y4] += p;
                    }
                }
            }
        }
        let h = |v: &[f64]| v.iter().map(|&p| plogp(p)).sum::<f64>();
        [
            h(py),
            h(&sc.p_y2) + h(&sc.p_x2y2y4) - h(&sc.p_x2y2),
            h(&sc.p_y3) + h(&sc.p_x3y3y4) - h(&sc.p_x3y3),
            h(&sc.p_y4),
        ]
    }
}

fn min_term(t: &[f64; 4]) -> (f64, usize) {
    let mut best = (t[0], 0);
    for (i, &v) in t.iter().enumerate().skip(1) {
        if v < best.0 {
            best = (v, i);
        }
    }
    best
}

fn digits(mut index: u64, base: u64, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (index % base) as usize;
        index /= base;
    }
    out
}

/// Maximizes `min{H(Y2,Y3), H(Y2)+H(Y4|X2,Y2), H(Y3)+H(Y4|X3,Y3), H(Y4)}`
/// over the three input families on a simplex grid. Every conditional row
/// and joint pmf is a grid point of resolution `1/grid_denominator`; ties go
/// to the lexicographically first candidate.
pub fn det_diamond_bounds(ch: &DiamondChannel, cfg: &DetSearchConfig) -> Result<DetDiamondBounds> {
    ch.validate()?;
    let bmap = ch
        .broadcast
        .as_map()
        .ok_or_else(|| Error::NotDeterministic("broadcast p(y2,y3|x1)".into()))?;
    let y4 = ch
        .mac
        .as_map()
        .ok_or_else(|| Error::NotDeterministic("MAC p(y4|x2,x3)".into()))?;
    let m = cfg.grid_denominator;
    if m == 0 {
        return Err(Error::InvalidParameter("grid denominator must be positive".into()));
    }
    let det = DetDiamond {
        ny: ch.relay_output_sizes,
        nx: ch.relay_input_sizes,
        y4,
        n4: ch.mac.outputs(),
    };
    let [a, b] = det.ny;
    let [c, d] = det.nx;
    let g1 = enumerate_simplex(ch.source_input_size(), m, DEFAULT_GRID_CAP)?;
    let g2 = enumerate_simplex(c, m, DEFAULT_GRID_CAP)?;
    let g3 = enumerate_simplex(d, m, DEFAULT_GRID_CAP)?;
    let g23 = enumerate_simplex(c * d, m, DEFAULT_GRID_CAP)?;
    let n2 = (g2.len() as u64).saturating_pow(a as u32);
    let n3 = (g3.len() as u64).saturating_pow(b as u32);
    let hybrid_inner = n2.saturating_mul(n3);
    let indep_inner = (g2.len() * g3.len()) as u64;
    let total = (g1.len() as u64).saturating_mul(hybrid_inner + indep_inner + g23.len() as u64);
    if total > cfg.max_candidates {
        return Err(Error::ResourceCap(format!(
            "deterministic diamond search needs {total} candidates, cap is {}",
            cfg.max_candidates
        )));
    }
    let fill_py = |p1: &[f64], py: &mut Vec<f64>| {
        reset(py, a * b);
        for (x1, &p) in p1.iter().enumerate() {
            py[bmap[x1]] += p;
        }
    };
    // Grid-row indices of each relay kernel, in enumeration order.
    let k2s: Vec<Vec<usize>> = (0..n2).map(|i| digits(i, g2.len() as u64, a)).collect();
    let k3s: Vec<Vec<usize>> = (0..n3).map(|i| digits(i, g3.len() as u64, b)).collect();

    type Key = (u64, u64);
    type Eval<'e> = dyn Fn(&[f64], u64, &mut Scratch) -> [f64; 4] + Sync + 'e;
    let search = |inner: u64, eval: &Eval| -> (f64, Key) {
        (0..g1.len() as u64 * inner)
            .into_par_iter()
            .map_init(
                || (Scratch::default(), Vec::new()),
                |(sc, py), idx| {
                    let (i1, ii) = (idx / inner, idx % inner);
                    fill_py(&g1[i1 as usize], py);
                    (min_term(&eval(py, ii, sc)).0, (i1, ii))
                },
            )
            .reduce(|| (f64::NEG_INFINITY, (u64::MAX, u64::MAX)), better)
    };

    let hybrid_eval = |py: &[f64], ii: u64, sc: &mut Scratch| {
        let (k2, k3) = (&k2s[(ii / n3) as usize], &k3s[(ii % n3) as usize]);
        det.terms(py, |y2, y3, x2, x3| g2[k2[y2]][x2] * g3[k3[y3]][x3], sc)
    };
    let indep_eval = |py: &[f64], ii: u64, sc: &mut Scratch| {
        let (i2, i3) = ((ii / g3.len() as u64) as usize, (ii % g3.len() as u64) as usize);
        det.terms(py, |_, _, x2, x3| g2[i2][x2] * g3[i3][x3], sc)
    };
    let cutset_eval =
        |py: &[f64], ii: u64, sc: &mut Scratch| det.terms(py, |_, _, x2, x3| g23[ii as usize][x2 * d + x3], sc);

    let finish = |family: InputFamily, (_, (i1, ii)): (f64, Key), eval: &Eval| {
        let p1 = g1[i1 as usize].clone();
        let mut py = vec![];
        fill_py(&p1, &mut py);
        let terms = eval(&py, ii, &mut Scratch::default());
        let (value, arg) = min_term(&terms);
        let relay_inputs = match family {
            InputFamily::Hybrid => vec![
                k2s[(ii / n3) as usize].iter().map(|&k| g2[k].clone()).collect(),
                k3s[(ii % n3) as usize].iter().map(|&k| g3[k].clone()).collect(),
            ],
            InputFamily::Independent => vec![
                vec![g2[(ii / g3.len() as u64) as usize].clone()],
                vec![g3[(ii % g3.len() as u64) as usize].clone()],
            ],
            InputFamily::Cutset => vec![vec![g23[ii as usize].clone()]],
        };
        DetBound {
            family,
            value,
            binding_constraint: DET_TERMS[arg].to_string(),
            terms,
            source_input: p1,
            relay_inputs,
        }
    };

    let hybrid = finish(InputFamily::Hybrid, search(hybrid_inner, &hybrid_eval), &hybrid_eval);
    let independent = finish(InputFamily::Independent, search(indep_inner, &indep_eval), &indep_eval);
    let cutset = finish(InputFamily::Cutset, search(g23.len() as u64, &cutset_eval), &cutset_eval);
    Ok(DetDiamondBounds {
        hybrid,
        independent,
        cutset,
        grid_denominator: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Blackwell broadcast and binary erasure MAC `Y4 = X2 + X3`.
    pub(crate) fn example_one() -> DiamondChannel {
        DiamondChannel::deterministic(&[(0, 0), (0, 1), (1, 1)], [2, 2], &[vec![0, 1], vec![1, 2]], 3).unwrap()
    }

    #[test]
    fn example_one_values() {
        let b = det_diamond_bounds(&example_one(), &DetSearchConfig::default()).unwrap();
        assert!((b.hybrid.value - 3f64.log2()).abs() < 1e-9, "{}", b.hybrid.value);
        assert!((b.independent.value - 1.5).abs() < 1e-6, "{}", b.independent.value);
        assert!(b.cutset.value >= b.hybrid.value - 1e-12);
        assert!(DET_TERMS.contains(&b.hybrid.binding_constraint.as_str()));
    }

    #[test]
    fn example_one_general_bound_with_forwarding_relays() {
        let ch = example_one();
        let id = ConditionalPmf::identity(2).unwrap();
        let spec = DiamondSpec::from_relay_inputs(Pmf::uniform(3).unwrap(), [&id, &id]).unwrap();
        let r = thm4_bound(&ch, &spec, 0.0).unwrap();
        assert!((r.value.unwrap() - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn deterministic_substitution_matches_entropy_form() {
        let ch = example_one();
        let k2 = ConditionalPmf::new(vec![vec![0.7, 0.3], vec![0.2, 0.8]]).unwrap();
        let k3 = ConditionalPmf::new(vec![vec![0.5, 0.5], vec![0.1, 0.9]]).unwrap();
        let p1 = Pmf::new(vec![0.2, 0.5, 0.3]).unwrap();
        let spec = DiamondSpec::from_relay_inputs(p1.clone(), [&k2, &k3]).unwrap();
        let r = thm4_bound(&ch, &spec, 0.0).unwrap();
        let det = DetDiamond {
            ny: [2, 2],
            nx: [2, 2],
            y4: vec![0, 1, 1, 2],
            n4: 3,
        };
        let mut py = vec![0.0; 4];
        for (x1, &(y2, y3)) in [(0, 0), (0, 1), (1, 1)].iter().enumerate() {
            py[y2 * 2 + y3] += p1.get(x1);
        }
        let t = det.terms(&py, |y2, y3, x2, x3| k2.prob(y2, x2) * k3.prob(y3, x3), &mut Scratch::default());
        // The general T2 (relay 2 on the source side) is the entropy term
        // through relay 3, and vice versa.
        for (c, k) in r.constraints.iter().zip([0, 2, 1, 3]) {
            assert!((c.rhs - t[k]).abs() < 1e-12, "{}: {} vs {}", c.name, c.rhs, t[k]);
        }
    }

    #[test]
    fn silent_relays_give_zero() {
        let ch = example_one();
        let spec = DiamondSpec {
            source_input: Pmf::uniform(3).unwrap(),
            relay_kernels: [
                ConditionalPmf::new(vec![vec![1.0]; 2]).unwrap(),
                ConditionalPmf::new(vec![vec![1.0]; 2]).unwrap(),
            ],
            relay_maps: [vec![vec![0, 0]], vec![vec![0, 0]]],
            target_rate: 0.0,
        };
        let r = thm4_bound(&ch, &spec, 0.0).unwrap();
        assert!(r.value.unwrap().abs() < 1e-12);
    }

    #[test]
    fn single_relay_degenerate() {
        // X1 binary, Y2 = X1, Y3 constant, Y4 = X2: one relay path of capacity 1.
        let ch = DiamondChannel::deterministic(&[(0, 0), (1, 0)], [2, 1], &[vec![0], vec![1]], 2).unwrap();
        let b = det_diamond_bounds(&ch, &DetSearchConfig::default()).unwrap();
        assert!((b.hybrid.value - 1.0).abs() < 1e-12);
        assert!(b.independent.value <= b.hybrid.value + 1e-12);
        assert!(b.hybrid.value <= b.cutset.value + 1e-12);
    }

    #[test]
    fn noisy_stage_is_rejected() {
        let mut ch = example_one();
        ch.mac = ConditionalPmf::new(vec![vec![0.9, 0.1, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]])
            .unwrap();
        assert!(matches!(
            det_diamond_bounds(&ch, &DetSearchConfig::default()),
            Err(Error::NotDeterministic(_))
        ));
    }

    /// Separately coded quantize-and-forward evaluation over the four cuts.
    #[test]
    fn quantize_forward_matches_cut_evaluation() {
        // Noisy diamond: X1 ternary, BSC-like broadcast, noisy binary MAC.
        let bc = ConditionalPmf::new(vec![
            vec![0.7, 0.1, 0.1, 0.1],
            vec![0.1, 0.6, 0.2, 0.1],
            vec![0.05, 0.15, 0.2, 0.6],
        ])
        .unwrap();
        let mac = ConditionalPmf::new(vec![
            vec![0.9, 0.05, 0.05],
            vec![0.1, 0.8, 0.1],
            vec![0.2, 0.7, 0.1],
            vec![0.05, 0.15, 0.8],
        ])
        .unwrap();
        let ch = DiamondChannel {
            relay_output_sizes: [2, 2],
            broadcast: bc.clone(),
            relay_input_sizes: [2, 2],
            mac: mac.clone(),
        };
        let p1 = Pmf::new(vec![0.3, 0.3, 0.4]).unwrap();
        let px2 = Pmf::new(vec![0.4, 0.6]).unwrap();
        let px3 = Pmf::new(vec![0.55, 0.45]).unwrap();
        let q2 = ConditionalPmf::new(vec![vec![0.8, 0.15, 0.05], vec![0.1, 0.2, 0.7]]).unwrap();
        let q3 = ConditionalPmf::bsc(0.2).unwrap();
        let spec = DiamondSpec::quantize_forward(p1.clone(), [&px2, &px3], [&q2, &q3]).unwrap();
        let r = thm4_bound(&ch, &spec, 0.0).unwrap();

        // Axes: X1, X2, X3, Y2, Y3, Ŷ2, Ŷ3, Y4.
        let j = compose_joint(
            &JointPmf::product(&[&p1, &px2, &px3]).unwrap(),
            &[],
        )
        .unwrap()
        .extend(&[0], &bc)
        .unwrap()
        .split_axis(3, &[2, 2])
        .unwrap()
        .extend(&[3], &q2)
        .unwrap()
        .extend(&[4], &q3)
        .unwrap()
        .extend(&[1, 2], &mac)
        .unwrap();
        let cmi = |a: &[usize], b: &[usize], c: &[usize]| j.conditional_mutual_information(a, b, c).unwrap();
        let cuts = [
            cmi(&[0], &[5, 6, 7], &[1, 2]),
            cmi(&[0, 1], &[6, 7], &[2]) - cmi(&[3], &[5], &[0, 1, 2, 6, 7]),
            cmi(&[0, 2], &[5, 7], &[1]) - cmi(&[4], &[6], &[0, 1, 2, 5, 7]),
            cmi(&[0, 1, 2], &[7], &[]) - cmi(&[3, 4], &[5, 6], &[0, 1, 2, 7]),
        ];
        for (c, v) in r.constraints.iter().zip(cuts) {
            assert!((c.rhs - v).abs() < 1e-12, "{}: {} vs {v}", c.name, c.rhs);
        }
    }
}
