//! Finite-alphabet probability primitives.
//!
//! Alphabets are index sets `0..k`. Every distribution is stored densely in
//! double precision and all information quantities are reported in bits.
//! Multi-variable joints use row-major layout with the last axis fastest, so
//! splitting or merging adjacent axes is a pure relabeling of `dims`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs whose total deviates from one by at most this much are renormalized.
pub const NORMALIZATION_SLACK: f64 = 1e-9;

/// Negative mutual information down to this magnitude is treated as round-off.
pub const MI_ROUNDOFF: f64 = 1e-9;

/// Absolute slack (in counts) absorbing float error in the typicality test.
const TYPICALITY_COUNT_SLACK: f64 = 1e-9;

fn normalize(mut probs: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::InvalidPmf(format!("{what}: empty alphabet")));
    }
    if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidPmf(format!("{what}: entry {bad} is not a probability")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_SLACK {
        return Err(Error::InvalidPmf(format!("{what}: entries sum to {total}")));
    }
    if total != 1.0 {
        probs.iter_mut().for_each(|p| *p /= total);
    }
    Ok(probs)
}

fn plogp_sum(probs: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    h.max(0.0)
}

/// Probability vector over a finite alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Ok(Self {
            probs: normalize(probs, "pmf")?,
        })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPmf("uniform pmf over empty alphabet".into()));
        }
        Ok(Self {
            probs: vec![1.0 / k as f64; k],
        })
    }

    pub fn point_mass(k: usize, at: usize) -> Result<Self> {
        if at >= k {
            return Err(Error::InvalidPmf(format!("point mass at {at} outside alphabet of size {k}")));
        }
        let mut probs = vec![0.0; k];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Shannon entropy in bits, with `0 log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        entropy(self)
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Pmf::new(probs)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Self {
        p.probs
    }
}

/// `H(p) = -sum p log2 p`.
pub fn entropy(p: &Pmf) -> f64 {
    plogp_sum(p.probs.iter().copied())
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    plogp_sum([p, 1.0 - p])
}

/// Row-stochastic kernel `p(out | in)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ConditionalPmf {
    inputs: usize,
    outputs: usize,
    probs: Vec<f64>,
}

impl ConditionalPmf {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let inputs = rows.len();
        if inputs == 0 {
            return Err(Error::InvalidPmf("kernel with no rows".into()));
        }
        let outputs = rows[0].len();
        let mut probs = Vec::with_capacity(inputs * outputs);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::DimensionMismatch(format!(
                    "kernel row {i} has {} entries, expected {outputs}",
                    row.len()
                )));
            }
            probs.extend(normalize(row, &format!("kernel row {i}"))?);
        }
        Ok(Self { inputs, outputs, probs })
    }

    /// 0/1 kernel of the map `in -> map[in]`.
    pub fn deterministic(map: &[usize], outputs: usize) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::InvalidPmf("deterministic map with empty domain".into()));
        }
        let mut probs = vec![0.0; map.len() * outputs];
        for (i, &o) in map.iter().enumerate() {
            if o >= outputs {
                return Err(Error::DimensionMismatch(format!(
                    "map sends {i} to {o}, outside output alphabet of size {outputs}"
                )));
            }
            probs[i * outputs + o] = 1.0;
        }
        Ok(Self {
            inputs: map.len(),
            outputs,
            probs,
        })
    }

    pub fn identity(k: usize) -> Result<Self> {
        Self::deterministic(&(0..k).collect::<Vec<_>>(), k)
    }

    /// Binary symmetric channel with the given crossover probability.
    pub fn bsc(crossover: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&crossover) {
            return Err(Error::InvalidParameter(format!("crossover {crossover} outside [0,1]")));
        }
        Self::new(vec![
            vec![1.0 - crossover, crossover],
            vec![crossover, 1.0 - crossover],
        ])
    }

    /// Kernel whose every row is `p`, i.e. output independent of input.
    pub fn constant(inputs: usize, p: &Pmf) -> Result<Self> {
        Self::new(vec![p.probs().to_vec(); inputs])
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.probs[input * self.outputs + output]
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.probs[input * self.outputs..(input + 1) * self.outputs]
    }

    /// The underlying map when every row is a point mass.
    pub fn as_map(&self) -> Option<Vec<usize>> {
        (0..self.inputs)
            .map(|i| {
                let row = self.row(i);
                let hit = row.iter().position(|&p| p == 1.0)?;
                row.iter()
                    .enumerate()
                    .all(|(j, &p)| j == hit || p == 0.0)
                    .then_some(hit)
            })
            .collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for ConditionalPmf {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        ConditionalPmf::new(rows)
    }
}

impl From<ConditionalPmf> for Vec<Vec<f64>> {
    fn from(k: ConditionalPmf) -> Self {
        k.probs.chunks(k.outputs).map(|r| r.to_vec()).collect()
    }
}

/// One stage of a joint construction: a kernel conditioned on existing axes.
/// The kernel input index is the row-major index of `given` in the listed order.
#[derive(Clone, Copy, Debug)]
pub struct Stage<'a> {
    pub given: &'a [usize],
    pub kernel: &'a ConditionalPmf,
}

impl<'a> Stage<'a> {
    pub fn new(given: &'a [usize], kernel: &'a ConditionalPmf) -> Self {
        Self { given, kernel }
    }
}

/// Dense joint pmf over several finite alphabets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJoint")]
pub struct JointPmf {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawJoint {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl TryFrom<RawJoint> for JointPmf {
    type Error = Error;

    fn try_from(raw: RawJoint) -> Result<Self> {
        JointPmf::new(raw.dims, raw.probs)
    }
}

impl JointPmf {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let cells: usize = dims.iter().product();
        if dims.contains(&0) {
            return Err(Error::DimensionMismatch("joint with an empty alphabet".into()));
        }
        if cells != probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} need {cells} cells, got {}",
                probs.len()
            )));
        }
        Ok(Self {
            dims,
            probs: normalize(probs, "joint pmf")?,
        })
    }

    pub fn from_pmf(p: &Pmf) -> Self {
        Self {
            dims: vec![p.alphabet_size()],
            probs: p.probs().to_vec(),
        }
    }

    /// Product of independent marginals, in the given axis order.
    pub fn product(marginals: &[&Pmf]) -> Result<Self> {
        let mut joint = Self {
            dims: vec![],
            probs: vec![1.0],
        };
        for p in marginals {
            let k = ConditionalPmf::constant(1, p)?;
            joint = joint.extend(&[], &k)?;
        }
        Ok(joint)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn prob(&self, index: &[usize]) -> f64 {
        let flat = index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i);
        self.probs[flat]
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for a in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.dims[a + 1];
        }
        strides
    }

    fn check_axes(&self, axes: &[usize]) -> Result<()> {
        for (i, &a) in axes.iter().enumerate() {
            if a >= self.dims.len() || axes[..i].contains(&a) {
                return Err(Error::InvalidAxes(format!(
                    "{axes:?} on a joint with {} axes",
                    self.dims.len()
                )));
            }
        }
        Ok(())
    }

    fn index_of(&self, flat: usize, strides: &[usize], axes: &[usize]) -> usize {
        axes.iter()
            .fold(0, |acc, &a| acc * self.dims[a] + (flat / strides[a]) % self.dims[a])
    }

    /// Appends one axis drawn from `kernel` given the listed axes.
    pub fn extend(&self, given: &[usize], kernel: &ConditionalPmf) -> Result<JointPmf> {
        self.check_axes(given)?;
        let inputs: usize = given.iter().map(|&a| self.dims[a]).product();
        if inputs != kernel.inputs() {
            return Err(Error::DimensionMismatch(format!(
                "kernel expects {} inputs, conditioning axes {given:?} provide {inputs}",
                kernel.inputs()
            )));
        }
        let out = kernel.outputs();
        let strides = self.strides();
        let mut probs = vec![0.0; self.probs.len() * out];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let row = kernel.row(self.index_of(flat, &strides, given));
            for (y, &q) in row.iter().enumerate() {
                probs[flat * out + y] = p * q;
            }
        }
        let mut dims = self.dims.clone();
        dims.push(out);
        Ok(JointPmf { dims, probs })
    }

    /// Marginal over `axes`, laid out in the listed order.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointPmf> {
        self.check_axes(axes)?;
        let dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let strides = self.strides();
        let mut probs = vec![0.0; dims.iter().product()];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p != 0.0 {
                probs[self.index_of(flat, &strides, axes)] += p;
            }
        }
        Ok(JointPmf { dims, probs })
    }

    pub fn marginal_pmf(&self, axis: usize) -> Result<Pmf> {
        Pmf::new(self.marginal(&[axis])?.probs)
    }

    /// Joint entropy `H(axes)` in bits; the empty set has entropy zero.
    pub fn entropy_of(&self, axes: &[usize]) -> Result<f64> {
        Ok(plogp_sum(self.marginal(axes)?.probs))
    }

    /// `I(A;B) = H(A) + H(B) - H(A,B)`.
    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        self.conditional_mutual_information(a, b, &[])
    }

    /// `I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)`.
    pub fn conditional_mutual_information(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        let disjoint = |x: &[usize], y: &[usize]| x.iter().all(|i| !y.contains(i));
        if !disjoint(a, b) || !disjoint(a, c) || !disjoint(b, c) {
            return Err(Error::InvalidAxes(format!("{a:?}, {b:?}, {c:?} are not disjoint")));
        }
        let cat = |parts: &[&[usize]]| parts.concat();
        let value = self.entropy_of(&cat(&[a, c]))? + self.entropy_of(&cat(&[b, c]))?
            - self.entropy_of(&cat(&[a, b, c]))?
            - self.entropy_of(c)?;
        clamp_information(value)
    }

    /// `E f(A,B)` for a table indexed `[a][b]`.
    pub fn expectation(&self, a: usize, b: usize, table: &DistortionMeasure) -> Result<f64> {
        let m = self.marginal(&[a, b])?;
        if m.dims[0] != table.source_size() || m.dims[1] != table.reconstruction_size() {
            return Err(Error::DimensionMismatch(format!(
                "table is {}x{}, axes are {}x{}",
                table.source_size(),
                table.reconstruction_size(),
                m.dims[0],
                m.dims[1]
            )));
        }
        Ok(m.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| p * table.get(i / m.dims[1], i % m.dims[1]))
            .sum())
    }

    /// Replaces axis `axis` by consecutive axes of the given sizes.
    pub fn split_axis(mut self, axis: usize, sizes: &[usize]) -> Result<JointPmf> {
        if axis >= self.dims.len() || sizes.iter().product::<usize>() != self.dims[axis] {
            return Err(Error::DimensionMismatch(format!(
                "cannot split axis {axis} of {:?} into {sizes:?}",
                self.dims
            )));
        }
        self.dims.splice(axis..=axis, sizes.iter().copied());
        Ok(self)
    }

    /// Merges `count` consecutive axes starting at `start` into one.
    pub fn merge_axes(mut self, start: usize, count: usize) -> Result<JointPmf> {
        if count == 0 || start + count > self.dims.len() {
            return Err(Error::InvalidAxes(format!("merge {start}+{count} on {:?}", self.dims)));
        }
        let size = self.dims[start..start + count].iter().product();
        self.dims.splice(start..start + count, [size]);
        Ok(self)
    }

    /// Reorders axes so that new axis `i` is old axis `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<JointPmf> {
        if order.len() != self.dims.len() {
            return Err(Error::InvalidAxes(format!("permutation {order:?} of {} axes", self.dims.len())));
        }
        self.marginal(order)
    }
}

/// Clamps float noise in an information value; larger negatives are logic errors.
pub fn clamp_information(value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -MI_ROUNDOFF {
        Ok(0.0)
    } else {
        Err(Error::Invariant(format!("negative mutual information {value}")))
    }
}

/// Builds a joint by applying kernels in order; each appends one axis.
pub fn compose_joint(source: &JointPmf, stages: &[Stage<'_>]) -> Result<JointPmf> {
    stages
        .iter()
        .try_fold(source.clone(), |joint, s| joint.extend(s.given, s.kernel))
}

/// Length-n sequence over an alphabet of the given size.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sequence {
    symbols: Vec<usize>,
    alphabet_size: usize,
}

impl Sequence {
    pub fn new(symbols: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidParameter("empty sequence".into()));
        }
        if let Some(&s) = symbols.iter().find(|&&s| s >= alphabet_size) {
            return Err(Error::InvalidParameter(format!(
                "symbol {s} outside alphabet of size {alphabet_size}"
            )));
        }
        Ok(Self { symbols, alphabet_size })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }
}

/// Nonnegative per-letter distortion table `[source][reconstruction]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DistortionMeasure {
    cols: usize,
    table: Vec<f64>,
}

impl DistortionMeasure {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        if cols == 0 {
            return Err(Error::DimensionMismatch("empty distortion table".into()));
        }
        let mut table = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch("ragged distortion table".into()));
            }
            if row.iter().any(|d| !d.is_finite() || *d < 0.0) {
                return Err(Error::InvalidParameter("distortion entries must be finite and >= 0".into()));
            }
            table.extend(row);
        }
        Ok(Self { cols, table })
    }

    pub fn hamming(k: usize) -> Self {
        let table = (0..k * k)
            .map(|i| if i / k == i % k { 0.0 } else { 1.0 })
            .collect();
        Self { cols: k, table }
    }

    pub fn source_size(&self) -> usize {
        self.table.len() / self.cols
    }

    pub fn reconstruction_size(&self) -> usize {
        self.cols
    }

    pub fn get(&self, s: usize, shat: usize) -> f64 {
        self.table[s * self.cols + shat]
    }
}

impl TryFrom<Vec<Vec<f64>>> for DistortionMeasure {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        DistortionMeasure::new(rows)
    }
}

impl From<DistortionMeasure> for Vec<Vec<f64>> {
    fn from(d: DistortionMeasure) -> Self {
        d.table.chunks(d.cols).map(|r| r.to_vec()).collect()
    }
}

/// `(1/n) sum d(s_i, shat_i)`.
pub fn empirical_distortion(s: &Sequence, shat: &Sequence, d: &DistortionMeasure) -> Result<f64> {
    if s.len() != shat.len() {
        return Err(Error::LengthMismatch(s.len(), shat.len()));
    }
    if s.alphabet_size() > d.source_size() || shat.alphabet_size() > d.reconstruction_size() {
        return Err(Error::DimensionMismatch("sequence alphabets exceed distortion table".into()));
    }
    Ok(mean_distortion(s.symbols(), shat.symbols(), d))
}

pub(crate) fn mean_distortion(s: &[usize], shat: &[usize], d: &DistortionMeasure) -> f64 {
    let total: f64 = s.iter().zip(shat).map(|(&a, &b)| d.get(a, b)).sum();
    total / s.len() as f64
}

/// Robust typicality test: every symbol tuple `x` must satisfy
/// `|#{i: x_i = x}/n - p(x)| <= eps p(x)`, which forces zero counts where
/// `p(x) = 0`. Tuples are indexed row-major against `model.dims()`.
pub fn is_typical(seqs: &[&Sequence], model: &JointPmf, eps: f64) -> Result<bool> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {eps}")));
    }
    if seqs.len() != model.ndim() {
        return Err(Error::DimensionMismatch(format!(
            "{} sequences against a {}-variable model",
            seqs.len(),
            model.ndim()
        )));
    }
    let n = seqs[0].len();
    for (s, &d) in seqs.iter().zip(model.dims()) {
        if s.len() != n {
            return Err(Error::LengthMismatch(n, s.len()));
        }
        if s.alphabet_size() > d {
            return Err(Error::DimensionMismatch(format!(
                "sequence alphabet {} exceeds model alphabet {d}",
                s.alphabet_size()
            )));
        }
    }
    let mut counts = vec![0usize; model.probs().len()];
    for i in 0..n {
        let cell = seqs
            .iter()
            .zip(model.dims())
            .fold(0, |acc, (s, &d)| acc * d + s.symbols()[i]);
        counts[cell] += 1;
    }
    let n = n as f64;
    Ok(counts.iter().zip(model.probs()).all(|(&c, &p)| {
        let expected = n * p;
        (c as f64 - expected).abs() <= eps * expected + TYPICALITY_COUNT_SLACK
    }))
}

/// Single-sequence form of [`is_typical`].
pub fn is_typical_pmf(seq: &Sequence, p: &Pmf, eps: f64) -> Result<bool> {
    is_typical(&[seq], &JointPmf::from_pmf(p), eps)
}

/// Integer count windows of the typical set for a fixed block length,
/// equivalent to [`is_typical`] but cheap enough for codebook searches.
#[derive(Clone, Debug)]
pub struct TypicalWindow {
    dims: Vec<usize>,
    lo: Vec<u32>,
    hi: Vec<u32>,
    n: usize,
}

impl TypicalWindow {
    pub fn new(model: &JointPmf, eps: f64, n: usize) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {eps}")));
        }
        let nf = n as f64;
        let (lo, hi) = model
            .probs()
            .iter()
            .map(|&p| {
                let expected = nf * p;
                let slack = eps * expected + TYPICALITY_COUNT_SLACK;
                let lo = (expected - slack).ceil().max(0.0);
                let hi = (expected + slack).floor().min(nf);
                (lo as u32, hi as u32)
            })
            .unzip();
        Ok(Self {
            dims: model.dims().to_vec(),
            lo,
            hi,
            n,
        })
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> usize {
        self.lo.len()
    }

    /// Tests the tuple of symbol slices; `scratch` is reused between calls.
    pub fn contains_with(&self, seqs: &[&[usize]], scratch: &mut Vec<u32>) -> bool {
        debug_assert_eq!(seqs.len(), self.dims.len());
        scratch.clear();
        scratch.resize(self.lo.len(), 0);
        for i in 0..self.n {
            let mut cell = 0;
            for (s, &d) in seqs.iter().zip(&self.dims) {
                cell = cell * d + s[i];
            }
            scratch[cell] += 1;
            if scratch[cell] > self.hi[cell] {
                return false;
            }
        }
        scratch.iter().zip(&self.lo).all(|(c, lo)| c >= lo)
    }

    pub fn contains(&self, seqs: &[&[usize]]) -> bool {
        self.contains_with(seqs, &mut Vec::new())
    }
}
