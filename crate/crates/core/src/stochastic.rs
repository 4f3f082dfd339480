// SPDX-License-Identifier: Apache-2.0

//! Random noise and random delay.
//!
//! Exponential delay of mean one time unit becomes, after discretization, a
//! memoryless queue: every micro-interval each waiting packet leaves
//! independently with probability `1/M`. The delay of a single packet is
//! therefore geometric with success probability `1/M`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::distr::{Bernoulli, Distribution};
use rand::Rng;
use rand_distr::Exp;
use serde::{Deserialize, Serialize};

use crate::channel::{DelayPattern, Discretization, NoisePattern};
use crate::error::{check_len, Error, Result};
use crate::rng::{self, Stream};
use crate::Epsilon;

/// I.i.d. Bernoulli(`ε`) flips.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub epsilon: Epsilon,
}

impl NoiseModel {
    pub fn new(epsilon: Epsilon) -> Self {
        NoiseModel { epsilon }
    }

    fn bernoulli(&self) -> Bernoulli {
        let (n, d) = (self.epsilon.numer(), self.epsilon.denom());
        match (u32::try_from(n), u32::try_from(d)) {
            (Ok(n), Ok(d)) => Bernoulli::from_ratio(n, d),
            _ => Bernoulli::new(self.epsilon.as_f64()),
        }
        .expect("epsilon is validated to lie in [0, 1/2]")
    }

    pub fn sample<R: Rng + ?Sized>(&self, slots: usize, rng: &mut R) -> NoisePattern {
        let dist = self.bernoulli();
        NoisePattern::from_raw((0..slots).map(|_| u8::from(dist.sample(rng))).collect())
    }
}

/// Which support the geometric delay uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayConvention {
    /// `Δ ∈ {1, 2, …}`, `P[Δ = d] = (1/M)(1 − 1/M)^{d−1}`, mean `M`.
    #[default]
    FromOne,
    /// `Δ ∈ {0, 1, …}`, mean `M − 1`.
    FromZero,
}

impl DelayConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            DelayConvention::FromOne => "from_one",
            DelayConvention::FromZero => "from_zero",
        }
    }
}

/// Geometric delays with per-micro-interval departure probability `1/M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayModel {
    pub m: u64,
    pub convention: DelayConvention,
}

impl DelayModel {
    pub fn new(m: u64, convention: DelayConvention) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("M must be positive".into()));
        }
        Ok(DelayModel { m, convention })
    }

    pub fn departure_probability(&self) -> f64 {
        1.0 / self.m as f64
    }

    fn offset(&self) -> u64 {
        match self.convention {
            DelayConvention::FromOne => 1,
            DelayConvention::FromZero => 0,
        }
    }

    pub fn mean(&self) -> f64 {
        (self.m - 1 + self.offset()) as f64
    }

    /// `P[Δ > d]`.
    pub fn survival(&self, d: u64) -> f64 {
        let q = 1.0 - self.departure_probability();
        let exponent = d + 1 - self.offset();
        q.powf(exponent as f64)
    }

    /// Probability that a packet arriving in slot `t` departs in `[t + lo, t + hi]`.
    pub fn depart_within(&self, lo: u64, hi: u64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        let below = if lo == 0 { 1.0 } else { self.survival(lo - 1) };
        (below - self.survival(hi)).max(0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, slots: usize, rng: &mut R) -> DelayPattern {
        let offset = self.offset();
        if self.m == 1 {
            return DelayPattern::new(vec![offset; slots]);
        }
        // ⌊E⌋ for E ~ Exp(−ln(1 − p)) is geometric on {0, 1, …} with success
        // probability p, and the ziggurat sampler does not slow down as p → 0.
        let rate = -(-self.departure_probability()).ln_1p();
        let exp = Exp::new(rate).expect("rate is positive and finite");
        DelayPattern::new(
            (0..slots)
                .map(|_| exp.sample(rng).floor() as u64 + offset)
                .collect(),
        )
    }
}

/// I.i.d. noise for `slots` slots from the noise stream of `seed`.
pub fn sample_noise(model: NoiseModel, slots: usize, seed: u64) -> NoisePattern {
    model.sample(slots, &mut rng::stream(seed, Stream::Noise))
}

/// I.i.d. geometric delays for `slots` slots from the delay stream of `seed`.
pub fn sample_delay(model: DelayModel, slots: usize, seed: u64) -> DelayPattern {
    model.sample(slots, &mut rng::stream(seed, Stream::Delay))
}

/// Probability that a queued packet leaves in `{t+ℓ1+1, …, t+ℓ1+ℓ2}`, with
/// its polynomial sandwich.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepartureBounds {
    pub lower: f64,
    pub upper: f64,
    pub exact: f64,
}

impl DepartureBounds {
    pub fn is_sandwiched(&self) -> bool {
        let slack = 1e-12 * self.exact.abs().max(1e-300);
        self.lower <= self.exact + slack && self.exact <= self.upper + slack
    }
}

pub fn departure_probability_bounds(m: u64, ell1: u64, ell2: u64) -> DepartureBounds {
    let m = m as f64;
    let (l1, l2) = (ell1 as f64, ell2 as f64);
    let log_stay = (-1.0 / m).ln_1p();
    let exact = (l1 * log_stay).exp() * -(l2 * log_stay).exp_m1();
    let bounds = DepartureBounds {
        lower: (1.0 - l1 / m) * (l2 / m - l2 * l2 / (m * m)),
        upper: (1.0 - l1 / m + l1 * l1 / (m * m)) * (l2 / m),
        exact,
    };
    debug_assert!(bounds.is_sandwiched(), "{bounds:?}");
    bounds
}

/// [`departure_probability_bounds`] in exact rational arithmetic, as
/// `(lower, exact, upper)`.
pub fn departure_probability_bounds_exact(
    m: u64,
    ell1: u64,
    ell2: u64,
) -> (BigRational, BigRational, BigRational) {
    let one = BigRational::one();
    let inv_m = BigRational::new(BigInt::one(), BigInt::from(m));
    let stay = &one - &inv_m;
    let pow = |base: &BigRational, e: u64| (0..e).fold(BigRational::one(), |acc, _| acc * base);
    let l1 = BigRational::from_integer(BigInt::from(ell1));
    let l2 = BigRational::from_integer(BigInt::from(ell2));
    let exact = pow(&stay, ell1) * (&one - pow(&stay, ell2));
    let lower = (&one - &l1 * &inv_m) * (&l2 * &inv_m - &l2 * &l2 * &inv_m * &inv_m);
    let upper = (&one - &l1 * &inv_m + &l1 * &l1 * &inv_m * &inv_m) * (&l2 * &inv_m);
    (lower, exact, upper)
}

/// Queue occupancy over the horizon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueueTrace {
    pub m: u64,
    /// `N_t`: packets that have arrived by slot `t` and leave strictly after it.
    pub occupancy: Vec<u64>,
    /// `W = Σ_j Δ(j)`, each delay counted in full even past the horizon.
    pub total_wait: u64,
}

impl QueueTrace {
    /// Largest one-step increase of the occupancy.
    pub fn max_rise(&self) -> i64 {
        self.occupancy
            .windows(2)
            .map(|w| w[1] as i64 - w[0] as i64)
            .max()
            .unwrap_or(0)
    }

    /// `Σ_t N_t` over the horizon, which equals `W` when nothing is truncated.
    pub fn horizon_wait(&self) -> u64 {
        self.occupancy.iter().sum()
    }
}

pub fn queue_trace(d: &DelayPattern, disc: &Discretization) -> Result<QueueTrace> {
    check_len(disc.slots(), d.len())?;
    let slots = d.len();
    let mut diff = vec![0i64; slots + 1];
    for (j, &delay) in d.delays().iter().enumerate() {
        if delay == 0 {
            continue;
        }
        diff[j] += 1;
        let leave = (j as u64).saturating_add(delay).min(slots as u64) as usize;
        diff[leave] -= 1;
    }
    let mut occupancy = Vec::with_capacity(slots);
    let mut running = 0i64;
    for delta in &diff[..slots] {
        running += delta;
        occupancy.push(running as u64);
    }
    Ok(QueueTrace {
        m: disc.m(),
        occupancy,
        total_wait: d.total_wait(),
    })
}

/// Fraction of blocks of `block_len` slots whose starting occupancy exceeds `c·M`.
pub fn heavy_interval_fraction(trace: &QueueTrace, c: f64, block_len: usize) -> Result<f64> {
    if !(c > 0.0) || block_len == 0 {
        return Err(Error::InvalidParameter(format!(
            "need c > 0 and a positive block length, got c={c}, block_len={block_len}"
        )));
    }
    let threshold = c * trace.m as f64;
    let starts: Vec<u64> = trace.occupancy.iter().step_by(block_len).copied().collect();
    if starts.is_empty() {
        return Ok(0.0);
    }
    let heavy = starts.iter().filter(|&&n| n as f64 > threshold).count();
    Ok(heavy as f64 / starts.len() as f64)
}

/// Checks the ramp argument behind the heavy-interval bound.
///
/// Occupancy rises by at most one per slot, so if `N_t > 4M/δ` then each of
/// the `M/δ` slots ending at `t` holds more than `3M/δ` packets, and that
/// stretch alone adds more than `(M/δ)(3M/δ)` to `W`. Returns `false` if
/// some heavy slot with a full stretch behind it violates this.
pub fn chunk_accounting_holds(trace: &QueueTrace, delta: f64) -> bool {
    let chunk = (trace.m as f64 / delta).floor() as usize;
    if chunk == 0 {
        return true;
    }
    let heavy = 4.0 * trace.m as f64 / delta;
    let floor = chunk as f64 * (3.0 * trace.m as f64 / delta);
    let mut prefix = vec![0u64; trace.occupancy.len() + 1];
    for (i, &n) in trace.occupancy.iter().enumerate() {
        prefix[i + 1] = prefix[i] + n;
    }
    trace.occupancy.iter().enumerate().all(|(t, &n)| {
        if (n as f64) <= heavy || t + 1 < chunk {
            return true;
        }
        let stretch = prefix[t + 1] - prefix[t + 1 - chunk];
        stretch as f64 > floor
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Discretization;

    fn disc(m: u64, t: u64) -> Discretization {
        Discretization::new(m, t).unwrap()
    }

    #[test]
    fn zero_noise_is_all_zero() {
        let p = sample_noise(NoiseModel::new(Epsilon::ZERO), 1000, 5);
        assert_eq!(p.weight(), 0);
    }

    #[test]
    fn half_noise_mean() {
        let n = 100_000;
        let p = sample_noise(NoiseModel::new(Epsilon::HALF), n, 11);
        let mean = p.weight() as f64 / n as f64;
        // 3σ for Binomial(1e5, 1/2) is 0.0047.
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = DelayModel::new(50, DelayConvention::FromOne).unwrap();
        assert_eq!(sample_delay(model, 500, 9), sample_delay(model, 500, 9));
        let noise = NoiseModel::new(Epsilon::new(1, 3).unwrap());
        assert_eq!(sample_noise(noise, 500, 9), sample_noise(noise, 500, 9));
    }

    #[test]
    fn unit_m_delays_are_constant() {
        let d = sample_delay(DelayModel::new(1, DelayConvention::FromOne).unwrap(), 64, 1);
        assert!(d.delays().iter().all(|&v| v == 1));
        let d = sample_delay(
            DelayModel::new(1, DelayConvention::FromZero).unwrap(),
            64,
            1,
        );
        assert!(d.delays().iter().all(|&v| v == 0));
    }

    #[test]
    fn geometric_mean_and_survival() {
        let model = DelayModel::new(100, DelayConvention::FromOne).unwrap();
        let n = 100_000usize;
        let d = sample_delay(model, n, 21);
        let mean = d.total_wait() as f64 / n as f64;
        // var = M(M−1) → σ_mean = sqrt(9900/1e5) ≈ 0.315.
        assert!((mean - 100.0).abs() < 1.0, "{mean}");
        for thr in [50u64, 100, 200] {
            let p = model.survival(thr);
            assert!((p - 0.99f64.powi(thr as i32)).abs() < 1e-12);
            let emp = d.delays().iter().filter(|&&v| v > thr).count() as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((emp - p).abs() < 3.0 * se, "d={thr}: {emp} vs {p}");
        }
    }

    #[test]
    fn from_zero_shifts_support() {
        let model = DelayModel::new(10, DelayConvention::FromZero).unwrap();
        assert_eq!(model.mean(), 9.0);
        assert!((model.survival(0) - 0.9).abs() < 1e-15);
        let d = sample_delay(model, 50_000, 3);
        assert!(d.delays().iter().any(|&v| v == 0));
    }

    #[test]
    fn departure_examples() {
        let b = departure_probability_bounds(100, 3, 0);
        assert_eq!((b.lower, b.upper, b.exact), (0.0, 0.0, 0.0));
        let b = departure_probability_bounds(100, 0, 10);
        assert!((b.exact - (1.0 - 0.99f64.powi(10))).abs() < 1e-15);
        assert!((b.exact - 0.095_617_924_991_1).abs() < 1e-12);
        assert!((b.lower - 0.09).abs() < 1e-15);
        assert!((b.upper - 0.1).abs() < 1e-15);
        assert!(b.is_sandwiched());
        let b = departure_probability_bounds(20, 20, 5);
        assert!(b.lower <= 0.0 && 0.0 <= b.exact);
    }

    #[test]
    fn queue_trace_hand_examples() {
        let t = queue_trace(&DelayPattern::new(vec![1; 6]), &disc(6, 1)).unwrap();
        assert_eq!(t.occupancy, vec![1; 6]);
        // Δ = (3, 1, 2, 1): packet 0 waits over slots 0..3, packet 1 over 1,
        // packet 2 over 2..4, packet 3 over 3.
        let t = queue_trace(&DelayPattern::new(vec![3, 1, 2, 1]), &disc(4, 1)).unwrap();
        assert_eq!(t.occupancy, vec![1, 2, 2, 2]);
        assert_eq!(t.total_wait, 7);
        assert_eq!(t.horizon_wait(), 7);
    }

    #[test]
    fn random_trace_rises_by_at_most_one() {
        let d = sample_delay(
            DelayModel::new(32, DelayConvention::FromOne).unwrap(),
            32 * 16,
            4,
        );
        let t = queue_trace(&d, &disc(32, 16)).unwrap();
        assert!(t.max_rise() <= 1);
        assert!(t.horizon_wait() <= t.total_wait);
    }

    #[test]
    fn no_heavy_blocks_with_unit_delays() {
        let t = queue_trace(&DelayPattern::new(vec![1; 40]), &disc(4, 10)).unwrap();
        assert_eq!(heavy_interval_fraction(&t, 1.0, 4).unwrap(), 0.0);
        assert!(heavy_interval_fraction(&t, 0.0, 4).is_err());
    }

    #[test]
    fn ramp_accounting_on_backlogged_queue() {
        // Every packet stays to the horizon, so occupancy ramps 1, 2, 3, …
        let slots = 400;
        let d = DelayPattern::new(vec![10_000; slots]);
        let t = queue_trace(&d, &disc(4, 100)).unwrap();
        assert!(t.occupancy.iter().any(|&n| n as f64 > 4.0 * 4.0 / 0.5));
        assert!(chunk_accounting_holds(&t, 0.5));
    }

    #[test]
    fn bad_chunk_start_alone_does_not_bound_w() {
        // A backlog that drains in one slot: the chunk starting at the peak
        // adds almost nothing to W, so the bound must look backwards.
        let m = 2u64;
        let delta = 0.5;
        let chunk = 4usize;
        let slots = 40;
        let mut delays = vec![1u64; slots];
        for (j, v) in delays.iter_mut().enumerate().take(20) {
            *v = 20 - j as u64;
        }
        let t = queue_trace(&DelayPattern::new(delays), &disc(m, 20)).unwrap();
        let start = 19;
        assert!(t.occupancy[start] as f64 > 3.0 * m as f64 / delta);
        let forward: u64 = t.occupancy[start + 1..start + 1 + chunk].iter().sum();
        assert!((forward as f64) < chunk as f64 * 2.0 * m as f64 / delta);
        assert!(chunk_accounting_holds(&t, delta));
    }
}
