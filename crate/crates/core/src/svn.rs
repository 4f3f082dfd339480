// SPDX-License-Identifier: Apache-2.0

//! Signal-via-noise channels and their capacity.
//!
//! An input is a pair `(a, b)`: `a` packets that arrive as 1 with
//! probability `ε` and `b` packets that arrive as 1 with probability `1−ε`.
//! The receiver sees only the total `Y`. All admissible pairs share a mean
//! close to `μ`, so information can ride only on the spread of `Y`.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::Epsilon;

/// Parameters of one channel in the `(M, ε, c)` family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SvnChannelSpec {
    #[serde(rename = "M")]
    pub m: u64,
    pub epsilon: Epsilon,
    pub c: u64,
    pub mu: u64,
}

impl SvnChannelSpec {
    pub fn new(m: u64, epsilon: Epsilon, c: u64, mu: u64) -> Result<Self> {
        let spec = SvnChannelSpec { m, epsilon, c, mu };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_zero() {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if self.m == 0 || self.c == 0 {
            return Err(Error::InvalidParameter("M and c must be positive".into()));
        }
        // M/c ≤ μ ≤ M
        if self.mu * self.c < self.m || self.mu > self.m {
            return Err(Error::InvalidParameter(format!(
                "mu = {} outside [M/c, M] = [{}/{}, {}]",
                self.mu, self.m, self.c, self.m
            )));
        }
        Ok(())
    }
}

/// An admissible input `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InputSymbol {
    pub a: u64,
    pub b: u64,
}

impl InputSymbol {
    /// `εa + (1−ε)b`, exactly.
    pub fn signature(&self, epsilon: Epsilon) -> Ratio<u64> {
        epsilon.ratio() * self.a + epsilon.complement() * self.b
    }

    pub fn is_admissible(&self, spec: &SvnChannelSpec) -> bool {
        let s = self.signature(spec.epsilon) * 2;
        let mu2 = Ratio::from_integer(2 * spec.mu);
        self.a + self.b <= spec.m && s + 1 > mu2 && s <= mu2 + 1
    }
}

/// All pairs with `μ − 1/2 < εa + (1−ε)b ≤ μ + 1/2` and `a + b ≤ M`, in
/// lexicographic order.
pub fn enumerate_inputs(spec: &SvnChannelSpec) -> Result<Vec<InputSymbol>> {
    spec.validate()?;
    let eps = Ratio::new(spec.epsilon.numer() as i128, spec.epsilon.denom() as i128);
    let one_minus = Ratio::from_integer(1) - eps;
    let half = Ratio::new(1i128, 2);
    let mu = Ratio::from_integer(spec.mu as i128);
    let m = spec.m as i128;
    let mut out = Vec::new();
    for a in 0..=m {
        // (1−ε)b ∈ (μ − 1/2 − εa, μ + 1/2 − εa]
        let lo = (mu - half - eps * a) / one_minus;
        let hi = (mu + half - eps * a) / one_minus;
        let b_lo = (lo.floor().to_integer() + 1).max(0);
        let b_hi = hi.floor().to_integer().min(m - a);
        for b in b_lo..=b_hi {
            out.push(InputSymbol {
                a: a as u64,
                b: b as u64,
            });
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyChannel {
            m: spec.m,
            epsilon: spec.epsilon.to_string(),
            mu: spec.mu,
        });
    }
    Ok(out)
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Relative mass below which binomial tails are dropped.
const TAIL_CUTOFF: f64 = 1e-40;

/// A probability vector supported on `offset .. offset + values.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRow {
    pub offset: usize,
    pub values: Vec<f64>,
}

impl SparseRow {
    pub fn point(at: usize) -> Self {
        SparseRow {
            offset: at,
            values: vec![1.0],
        }
    }

    pub fn get(&self, y: usize) -> f64 {
        y.checked_sub(self.offset)
            .and_then(|i| self.values.get(i).copied())
            .unwrap_or(0.0)
    }

    pub fn end(&self) -> usize {
        self.offset + self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.offset + i, p))
    }

    pub fn sum(&self) -> f64 {
        compensated_sum(self.values.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.iter().map(|(y, p)| y as f64 * p))
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        compensated_sum(self.iter().map(|(y, p)| {
            let d = y as f64 - mean;
            d * d * p
        }))
    }

    /// Entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.values)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    fn normalize(&mut self) {
        let s = self.sum();
        for v in &mut self.values {
            *v /= s;
        }
    }
}

fn entropy_bits(p: &[f64]) -> f64 {
    compensated_sum(p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.log2()))
}

/// Binomial(n, p) pmf, windowed around the mode and renormalized.
fn binomial_row(n: u64, p: f64) -> SparseRow {
    if n == 0 || p == 0.0 {
        return SparseRow::point(0);
    }
    if p == 1.0 {
        return SparseRow::point(n as usize);
    }
    let mode = (((n + 1) as f64 * p).floor() as u64).min(n);
    let ln_peak = ln_binomial(n, mode) + mode as f64 * p.ln() + (n - mode) as f64 * (-p).ln_1p();
    let peak = ln_peak.exp();
    let odds = p / (1.0 - p);

    let mut up = Vec::new();
    let mut v = peak;
    let mut k = mode;
    while k < n {
        v *= (n - k) as f64 / (k + 1) as f64 * odds;
        k += 1;
        if v < TAIL_CUTOFF * peak {
            break;
        }
        up.push(v);
    }
    let mut down = Vec::new();
    let mut v = peak;
    let mut k = mode;
    while k > 0 {
        v *= k as f64 / (n - k + 1) as f64 / odds;
        k -= 1;
        if v < TAIL_CUTOFF * peak {
            break;
        }
        down.push(v);
    }
    let offset = mode as usize - down.len();
    down.reverse();
    down.push(peak);
    down.extend(up);
    let mut row = SparseRow {
        offset,
        values: down,
    };
    row.normalize();
    row
}

fn convolve(x: &SparseRow, y: &SparseRow) -> SparseRow {
    let len = x.values.len() + y.values.len() - 1;
    // Per-output Neumaier accumulators.
    let mut sum = vec![0.0f64; len];
    let mut comp = vec![0.0f64; len];
    for (i, &p) in x.values.iter().enumerate() {
        for (j, &q) in y.values.iter().enumerate() {
            let v = p * q;
            let s = &mut sum[i + j];
            let t = *s + v;
            comp[i + j] += if s.abs() >= v.abs() {
                (*s - t) + v
            } else {
                (v - t) + *s
            };
            *s = t;
        }
    }
    let values = sum.iter().zip(&comp).map(|(s, c)| s + c).collect();
    let mut row = SparseRow {
        offset: x.offset + y.offset,
        values,
    };
    row.normalize();
    row
}

/// Distribution of `Y = Σ_{i<a} U_i + Σ_{j<b} V_j` with `U ~ Bernoulli(ε)`,
/// `V ~ Bernoulli(1−ε)`, all independent. Support is a subset of
/// `0..=a+b`; negligible tails are trimmed.
pub fn transition_row(a: u64, b: u64, epsilon: Epsilon) -> SparseRow {
    let p = epsilon.as_f64();
    let q = Ratio::from_integer(1u64) - epsilon.ratio();
    let q = *q.numer() as f64 / *q.denom() as f64;
    convolve(&binomial_row(a, p), &binomial_row(b, q))
}

/// A row-stochastic matrix with sparse rows over outputs `0..outputs`.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    outputs: usize,
    rows: Vec<SparseRow>,
}

impl TransitionMatrix {
    pub fn new(outputs: usize, rows: Vec<SparseRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("matrix has no rows".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.end() > outputs {
                return Err(Error::InvalidParameter(format!(
                    "row {i} exceeds {outputs} outputs"
                )));
            }
            if r.values.iter().any(|&v| !(v >= 0.0)) {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has a negative entry"
                )));
            }
            if (r.sum() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "row {i} sums to {}",
                    r.sum()
                )));
            }
        }
        Ok(TransitionMatrix { outputs, rows })
    }

    pub fn from_dense(rows: Vec<Vec<f64>>) -> Result<Self> {
        let outputs = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != outputs) {
            return Err(Error::InvalidParameter("ragged matrix".into()));
        }
        Self::new(
            outputs,
            rows.into_iter()
                .map(|values| SparseRow { offset: 0, values })
                .collect(),
        )
    }

    /// The matrix of an `(M, ε, c)` channel with its row labels.
    pub fn for_spec(spec: &SvnChannelSpec) -> Result<(Vec<InputSymbol>, Self)> {
        let inputs = enumerate_inputs(spec)?;
        let rows = inputs
            .par_iter()
            .map(|s| transition_row(s.a, s.b, spec.epsilon))
            .collect();
        let matrix = Self::new(spec.m as usize + 1, rows)?;
        Ok((inputs, matrix))
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Output distribution under `input`.
    pub fn output_distribution(&self, input: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.outputs];
        for (row, &p) in self.rows.iter().zip(input) {
            if p == 0.0 {
                continue;
            }
            for (y, w) in row.iter() {
                q[y] += p * w;
            }
        }
        q
    }

    /// `D(W(·|x) ‖ q)` in nats for every row, as `Σ w ln w − Σ w ln q`.
    fn divergences(&self, q: &[f64], neg_entropy: &[f64]) -> Vec<f64> {
        let ln_q: Vec<f64> = q.iter().map(|&v| v.max(f64::MIN_POSITIVE).ln()).collect();
        self.rows
            .iter()
            .zip(neg_entropy)
            .map(|(row, &h)| {
                let cross: f64 = row
                    .values
                    .iter()
                    .zip(&ln_q[row.offset..])
                    .map(|(w, l)| w * l)
                    .sum();
                h - cross
            })
            .collect()
    }

    /// `Σ_y w ln w` for every row, nats.
    fn neg_entropies(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| compensated_sum(r.values.iter().filter(|&&w| w > 0.0).map(|&w| w * w.ln())))
            .collect()
    }
}

/// `I(X; Y) = H(Y) − H(Y|X)` in bits.
pub fn mutual_information(input: &[f64], matrix: &TransitionMatrix) -> Result<f64> {
    if input.len() != matrix.inputs() {
        return Err(Error::LengthMismatch {
            expected: matrix.inputs(),
            found: input.len(),
        });
    }
    if (compensated_sum(input.iter().copied()) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(
            "input distribution does not sum to 1".into(),
        ));
    }
    let hy = entropy_bits(&matrix.output_distribution(input));
    let hyx = compensated_sum(matrix.rows.iter().zip(input).map(|(r, &p)| {
        if p > 0.0 {
            p * r.entropy()
        } else {
            0.0
        }
    }));
    Ok(hy - hyx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityReport {
    pub capacity_bits: f64,
    /// `max_x D(W(·|x)‖q) − I`, an upper bound on the distance to capacity.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub input_distribution: Vec<f64>,
    /// Lower bound `I(p_t)` at each iteration, in bits.
    #[serde(skip)]
    pub history: Vec<f64>,
}

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Keeps every input weight positive so no output loses all its mass.
const P_FLOOR: f64 = 1e-280;

struct BaState {
    p: Vec<f64>,
    d: Vec<f64>,
    /// `Σ p_x D_x`, nats.
    lower: f64,
    /// `max_x D_x`, nats.
    upper: f64,
}

impl BaState {
    fn new(matrix: &TransitionMatrix, neg_entropy: &[f64], p: Vec<f64>) -> Self {
        let q = matrix.output_distribution(&p);
        let d = matrix.divergences(&q, neg_entropy);
        let lower = compensated_sum(p.iter().zip(&d).map(|(pi, di)| pi * di));
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        BaState { p, d, lower, upper }
    }

    /// `p_x ∝ p_x·exp(λ·D_x)`; `λ = 1` is the classical update.
    fn step(&self, lambda: f64) -> Vec<f64> {
        let w: Vec<f64> = self
            .p
            .iter()
            .zip(&self.d)
            .map(|(pi, di)| (pi * (lambda * (di - self.upper)).exp()).max(P_FLOOR))
            .collect();
        let z = compensated_sum(w.iter().copied());
        w.into_iter().map(|v| v / z).collect()
    }
}

/// Blahut–Arimoto iteration from the uniform input, stopped once the
/// capacity gap `max_x D(W(·|x)‖q) − I(p)` drops to `tol` bits.
///
/// Steps are over-relaxed (`λ > 1`) while that keeps increasing `I(p)`, and
/// fall back to the classical step otherwise, so the lower bound never
/// decreases.
pub fn blahut_arimoto(matrix: &TransitionMatrix, tol: f64, max_iter: usize) -> CapacityReport {
    const LN2: f64 = std::f64::consts::LN_2;
    const MAX_LAMBDA: f64 = 64.0;
    let n = matrix.inputs();
    let neg_entropy = matrix.neg_entropies();
    let mut state = BaState::new(matrix, &neg_entropy, vec![1.0 / n as f64; n]);
    let mut lambda = 1.0f64;
    let mut history = vec![state.lower / LN2];
    let mut iterations = 0;
    loop {
        let gap = (state.upper - state.lower).max(0.0) / LN2;
        if gap <= tol || iterations >= max_iter {
            return CapacityReport {
                capacity_bits: state.lower / LN2,
                gap,
                iterations,
                converged: gap <= tol,
                input_distribution: state.p,
                history,
            };
        }
        iterations += 1;
        let mut next = BaState::new(matrix, &neg_entropy, state.step(lambda));
        if lambda > 1.0 && next.lower < state.lower {
            lambda = 1.0;
            next = BaState::new(matrix, &neg_entropy, state.step(1.0));
        } else {
            lambda = (lambda * 1.5).min(MAX_LAMBDA);
        }
        state = next;
        history.push(state.lower / LN2);
    }
}

/// Capacity of one spec, serialized as a flat record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityRecord {
    #[serde(rename = "M")]
    pub m: u64,
    pub epsilon: Epsilon,
    pub c: u64,
    pub mu: u64,
    pub capacity_bits: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// Capacity plus the entropy decomposition under the optimal input.
#[derive(Clone, Debug, Serialize)]
pub struct SvnCapacity {
    pub spec: SvnChannelSpec,
    pub inputs: usize,
    pub report: CapacityReport,
    /// `(3/2)·log2(c/ε) + 3`: the gap between `½·log2 M` and the smallest
    /// admissible `H(Y|X=x)` guaranteed by the point-probability bound.
    pub c1: f64,
    /// `H(Y) − ½·log2 M` under the optimal input.
    pub c2: f64,
}

impl SvnCapacity {
    pub fn record(&self) -> CapacityRecord {
        CapacityRecord {
            m: self.spec.m,
            epsilon: self.spec.epsilon,
            c: self.spec.c,
            mu: self.spec.mu,
            capacity_bits: self.report.capacity_bits,
            gap: self.report.gap,
            iterations: self.report.iterations,
        }
    }
}

fn c_over_eps(spec: &SvnChannelSpec) -> f64 {
    spec.c as f64 / spec.epsilon.as_f64()
}

pub fn svn_capacity(spec: &SvnChannelSpec, tol: f64, max_iter: usize) -> Result<SvnCapacity> {
    let (_, matrix) = TransitionMatrix::for_spec(spec)?;
    let report = blahut_arimoto(&matrix, tol, max_iter);
    let hy = entropy_bits(&matrix.output_distribution(&report.input_distribution));
    Ok(SvnCapacity {
        spec: *spec,
        inputs: matrix.inputs(),
        c1: 1.5 * c_over_eps(spec).log2() + 3.0,
        c2: hy - 0.5 * (spec.m as f64).log2(),
        report,
    })
}

/// Exact-computation checks of the entropy bounds for one spec.
#[derive(Clone, Debug, Serialize)]
pub struct EntropyBoundReport {
    pub spec: SvnChannelSpec,
    /// `max_{x, j} Pr[Y = j | X = x]`.
    pub max_point_probability: f64,
    /// `8·(c/ε)^{3/2}·M^{−1/2}`.
    pub point_bound: f64,
    pub min_conditional_entropy: f64,
    /// `½·log2 M − (3/2)·log2(c/ε) − 3`.
    pub conditional_entropy_bound: f64,
    /// `H(Y) − ½·log2 M` under the uniform input.
    pub output_entropy_excess: f64,
}

impl EntropyBoundReport {
    pub fn point_bound_is_vacuous(&self) -> bool {
        self.point_bound >= 1.0
    }
}

/// Checks the point-probability and conditional-entropy lower bounds on
/// every row. A violation is an error: it would mean the rows are wrong.
pub fn entropy_bound_checks(spec: &SvnChannelSpec) -> Result<EntropyBoundReport> {
    let (_, matrix) = TransitionMatrix::for_spec(spec)?;
    let m = spec.m as f64;
    let k = c_over_eps(spec);
    let point_bound = 8.0 * k.powf(1.5) / m.sqrt();
    let conditional_entropy_bound = 0.5 * m.log2() - 1.5 * k.log2() - 3.0;
    let max_point_probability = matrix.rows.iter().map(SparseRow::max).fold(0.0, f64::max);
    let min_conditional_entropy = matrix
        .rows
        .iter()
        .map(SparseRow::entropy)
        .fold(f64::INFINITY, f64::min);
    if max_point_probability > point_bound {
        return Err(Error::BoundViolation(format!(
            "point probability {max_point_probability} > {point_bound}"
        )));
    }
    if min_conditional_entropy < conditional_entropy_bound - 1e-12 {
        return Err(Error::BoundViolation(format!(
            "conditional entropy {min_conditional_entropy} < {conditional_entropy_bound}"
        )));
    }
    let uniform = vec![1.0 / matrix.inputs() as f64; matrix.inputs()];
    let hy = entropy_bits(&matrix.output_distribution(&uniform));
    Ok(EntropyBoundReport {
        spec: *spec,
        max_point_probability,
        point_bound,
        min_conditional_entropy,
        conditional_entropy_bound,
        output_entropy_excess: hy - 0.5 * m.log2(),
    })
}

/// Lower bound on decoding error when the channel confines its output to a
/// set of `size_r` signals except with probability `tau`, for `size_s`
/// equally likely messages.
pub fn fano_style_lower_bound(tau: f64, size_r: u64, size_s: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) || size_r == 0 || size_s == 0 {
        return Err(Error::InvalidParameter(
            "need 0 ≤ tau ≤ 1 and positive set sizes".into(),
        ));
    }
    Ok((1.0 - (tau + size_r as f64 / size_s as f64)).max(0.0))
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(n: u64, d: u64) -> Epsilon {
        Epsilon::new(n, d).unwrap()
    }

    #[test]
    fn half_epsilon_closed_form() {
        // ε = 1/2: μ − 1/2 < (a+b)/2 ≤ μ + 1/2 ⇔ a + b ∈ {2μ, 2μ+1}.
        let spec = SvnChannelSpec::new(12, eps(1, 2), 4, 5).unwrap();
        let got = enumerate_inputs(&spec).unwrap();
        let mut want = Vec::new();
        for a in 0..=12u64 {
            for s in [10u64, 11] {
                if a <= s {
                    want.push(InputSymbol { a, b: s - a });
                }
            }
        }
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn small_rows() {
        let r = transition_row(0, 0, eps(1, 4));
        assert_eq!(r, SparseRow::point(0));
        let r = transition_row(1, 0, eps(1, 4));
        assert_eq!((r.get(0), r.get(1)), (0.75, 0.25));
    }

    #[test]
    fn binomial_window_is_normalized() {
        let r = binomial_row(4096, 0.25);
        assert!((r.sum() - 1.0).abs() < 1e-14);
        assert!((r.mean() - 1024.0).abs() < 1e-9);
        assert!(r.offset > 0 && r.end() < 4097);
    }

    #[test]
    fn bsc_mutual_information() {
        let w = TransitionMatrix::from_dense(vec![vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        let i = mutual_information(&[0.5, 0.5], &w).unwrap();
        assert!((i - (1.0 - h2(0.25))).abs() < 1e-12);
        assert!((i - 0.188_721_875_540_867).abs() < 1e-12);
    }

    #[test]
    fn identity_and_single_row() {
        let id = TransitionMatrix::from_dense(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let c = blahut_arimoto(&id, 1e-9, 100);
        assert!((c.capacity_bits - 3f64.log2()).abs() < 1e-9);
        let one = TransitionMatrix::from_dense(vec![vec![0.3, 0.7]]).unwrap();
        assert_eq!(mutual_information(&[1.0], &one).unwrap(), 0.0);
    }

    #[test]
    fn fano_arithmetic() {
        assert_eq!(fano_style_lower_bound(0.0, 8, 8).unwrap(), 0.0);
        assert!((fano_style_lower_bound(0.1, 4, 64).unwrap() - 0.8375).abs() < 1e-15);
        assert!(fano_style_lower_bound(1.5, 1, 1).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(SvnChannelSpec::new(16, eps(1, 4), 4, 3).is_err());
        assert!(SvnChannelSpec::new(16, eps(1, 4), 4, 17).is_err());
        assert!(SvnChannelSpec::new(16, Epsilon::ZERO, 4, 8).is_err());
    }

    #[test]
    fn m16_bounds() {
        let spec = SvnChannelSpec::new(16, eps(1, 4), 4, 8).unwrap();
        let r = entropy_bound_checks(&spec).unwrap();
        // c/ε = 16: 8·16^{3/2}/4 = 128.
        assert!((r.point_bound - 128.0).abs() < 1e-9);
        assert!(r.point_bound_is_vacuous());
        assert!(r.min_conditional_entropy > 0.0);
    }
}
