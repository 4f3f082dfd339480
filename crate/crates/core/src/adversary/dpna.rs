// SPDX-License-Identifier: Apache-2.0

//! Noise adversary acting after a random delay.
//!
//! Time is cut into intervals of `L = εM/5` slots. In each interval the
//! adversary zeroes every packet that both arrives and leaves inside the
//! interval, then flips the fewest remaining packets so that exactly
//! `min(ñ, L − y)` of them are ones, where `ñ` is the interval's weight
//! rounded down to a multiple of the quantum `ε'L` and `y` is the number of
//! packets zeroed. Because the delay is memoryless, packets still queued at
//! the end of the interval are interchangeable, so what the receiver sees
//! depends on the input only through the rounded weights.

use num_rational::Ratio;

use crate::channel::{BitSignal, DelayPattern, NoiseAdversary, NoiseOutcome, NoisePattern};
use crate::error::{check_len, Error, Result};
use crate::{Epsilon, SimRng};

/// Interval layout and budget of the adversary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DpnaParams {
    pub epsilon: Epsilon,
    pub m: u64,
    pub t: u64,
    /// `L`, slots per interval.
    pub interval_len: usize,
    /// Rounding step for interval weights.
    pub quantum: u64,
    /// `⌊εMT⌋`.
    pub budget: u64,
}

impl DpnaParams {
    /// `L = εM/5`, quantum `ε'L = ε²M/25`.
    ///
    /// `L` must be an integer dividing `M·T`. A fractional quantum is rounded
    /// down, and to 1 if it is below 1; [`DpnaParams::quantum_is_exact`]
    /// reports whether that happened.
    pub fn new(epsilon: Epsilon, m: u64, t: u64) -> Result<Self> {
        if epsilon.is_zero() {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        let eps_prime = epsilon.ratio() / Ratio::from_integer(5);
        let interval = eps_prime * Ratio::from_integer(m);
        if !interval.is_integer() || interval.to_integer() == 0 {
            return Err(Error::NonIntegral {
                what: "interval length εM/5",
                value: interval.to_string(),
            });
        }
        let interval_len = interval.to_integer();
        let quantum = (eps_prime * interval).to_integer().max(1);
        Self::with_layout(epsilon, m, t, interval_len as usize, quantum)
    }

    /// Explicit interval length and rounding step.
    pub fn with_layout(
        epsilon: Epsilon,
        m: u64,
        t: u64,
        interval_len: usize,
        quantum: u64,
    ) -> Result<Self> {
        let slots = m * t;
        if interval_len == 0 || slots % interval_len as u64 != 0 {
            return Err(Error::NonIntegral {
                what: "number of intervals M·T/L",
                value: format!("{slots}/{interval_len}"),
            });
        }
        if quantum == 0 {
            return Err(Error::InvalidParameter("quantum must be positive".into()));
        }
        Ok(DpnaParams {
            epsilon,
            m,
            t,
            interval_len,
            quantum,
            budget: epsilon.times_floor(slots),
        })
    }

    pub fn slots(&self) -> usize {
        (self.m * self.t) as usize
    }

    pub fn intervals(&self) -> usize {
        self.slots() / self.interval_len
    }

    /// Whether `quantum` equals `ε'L` exactly.
    pub fn quantum_is_exact(&self) -> bool {
        let eps_prime = self.epsilon.ratio() / Ratio::from_integer(5);
        eps_prime * Ratio::from_integer(self.interval_len as u64)
            == Ratio::from_integer(self.quantum)
    }

    /// `n` rounded down to a multiple of the quantum.
    pub fn round_weight(&self, n: u64) -> u64 {
        n - n % self.quantum
    }
}

/// What the adversary did in one interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DpnaInterval {
    /// `n`, weight of the input in the interval.
    pub weight: u64,
    /// `ñ`, weight rounded down to a multiple of the quantum.
    pub rounded: u64,
    /// `y = |R|`, packets that arrive and leave inside the interval.
    pub departed: u64,
    /// `n̂ = min(ñ, L − y)`, ones left among the queued packets.
    pub target: u64,
    pub flips: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpnaState {
    pub params: DpnaParams,
    pub intervals: Vec<DpnaInterval>,
    pub flips_used: u64,
    pub budget_exceeded: bool,
}

/// Positions of interval `i` whose packet also leaves inside interval `i`.
fn departs_inside(d: &DelayPattern, start: usize, end: usize, j: usize) -> bool {
    let at = j as u64 + d.delays()[j];
    at < end as u64 && at >= start as u64
}

/// Runs the adversary on input `x` and realized delay `d`.
pub fn dpna_noise(
    x: &BitSignal,
    d: &DelayPattern,
    params: &DpnaParams,
) -> Result<(NoisePattern, DpnaState)> {
    check_len(params.slots(), x.len())?;
    check_len(x.len(), d.len())?;
    let len = params.interval_len;
    let mut z = x.bits().to_vec();
    let mut flips = vec![0u8; x.len()];
    let mut used = 0u64;
    let mut exceeded = false;
    let mut intervals = Vec::with_capacity(params.intervals());

    // Flips position `j` unless the budget is spent.
    let mut flip = |j: usize, z: &mut Vec<u8>, flips: &mut Vec<u8>, count: &mut u64| -> bool {
        if used >= params.budget {
            exceeded = true;
            return false;
        }
        used += 1;
        *count += 1;
        z[j] ^= 1;
        flips[j] ^= 1;
        true
    };

    'outer: for i in 0..params.intervals() {
        let (start, end) = (i * len, (i + 1) * len);
        let weight = x.bits()[start..end].iter().map(|&b| b as u64).sum::<u64>();
        let rounded = params.round_weight(weight);
        let inside: Vec<bool> = (start..end)
            .map(|j| departs_inside(d, start, end, j))
            .collect();
        let departed = inside.iter().filter(|&&r| r).count() as u64;
        let target = rounded.min(len as u64 - departed);
        let mut rec = DpnaInterval {
            weight,
            rounded,
            departed,
            target,
            flips: 0,
        };

        for (off, &r) in inside.iter().enumerate() {
            let j = start + off;
            if r && z[j] == 1 && !flip(j, &mut z, &mut flips, &mut rec.flips) {
                intervals.push(rec);
                break 'outer;
            }
        }

        let queued_ones = (start..end)
            .filter(|&j| !inside[j - start] && z[j] == 1)
            .count() as u64;
        let (from, need) = if queued_ones > target {
            (1u8, queued_ones - target)
        } else {
            (0u8, target - queued_ones)
        };
        let mut remaining = need;
        for j in start..end {
            if remaining == 0 {
                break;
            }
            if !inside[j - start] && z[j] == from {
                if !flip(j, &mut z, &mut flips, &mut rec.flips) {
                    intervals.push(rec);
                    break 'outer;
                }
                remaining -= 1;
            }
        }
        intervals.push(rec);
    }

    Ok((
        NoisePattern::from_raw(flips),
        DpnaState {
            params: *params,
            intervals,
            flips_used: used,
            budget_exceeded: exceeded,
        },
    ))
}

/// Replaces every interval of `x` by `1^ñ 0^{L−ñ}`.
pub fn dpna_canonicalize(x: &BitSignal, params: &DpnaParams) -> Result<BitSignal> {
    check_len(params.slots(), x.len())?;
    let mut out = Vec::with_capacity(x.len());
    for chunk in x.bits().chunks(params.interval_len) {
        let weight = chunk.iter().map(|&b| b as u64).sum::<u64>();
        let rounded = params.round_weight(weight) as usize;
        out.extend(std::iter::repeat_n(1u8, rounded));
        out.extend(std::iter::repeat_n(0u8, chunk.len() - rounded));
    }
    BitSignal::new(out)
}

/// Checks the per-interval guarantees of a finished run against its inputs.
///
/// Returns a description of the first violation. When the budget ran out,
/// only the flip accounting is checked.
pub fn check_dpna_invariants(
    x: &BitSignal,
    d: &DelayPattern,
    noise: &NoisePattern,
    state: &DpnaState,
) -> std::result::Result<(), String> {
    let p = &state.params;
    if state.flips_used != noise.weight() as u64 {
        return Err(format!(
            "flips used {} but pattern weight {}",
            state.flips_used,
            noise.weight()
        ));
    }
    if state.flips_used > p.budget {
        return Err(format!(
            "flips {} exceed budget {}",
            state.flips_used, p.budget
        ));
    }
    let z: Vec<u8> = x
        .bits()
        .iter()
        .zip(noise.flips())
        .map(|(a, b)| a ^ b)
        .collect();
    for (i, rec) in state.intervals.iter().enumerate() {
        if rec.rounded % p.quantum != 0 || rec.rounded > rec.weight {
            return Err(format!("interval {i}: bad rounding {rec:?}"));
        }
        let bound = rec.departed + rec.departed.max(rec.weight - rec.rounded);
        if rec.flips > bound {
            return Err(format!(
                "interval {i}: {} flips exceed y + max(y, n − ñ) = {bound}",
                rec.flips
            ));
        }
        if state.budget_exceeded {
            continue;
        }
        let (start, end) = (i * p.interval_len, (i + 1) * p.interval_len);
        let mut ones = 0;
        for j in start..end {
            if departs_inside(d, start, end, j) {
                if z[j] != 0 {
                    return Err(format!(
                        "interval {i}: packet {j} leaves inside but was not zeroed"
                    ));
                }
            } else {
                ones += z[j] as u64;
            }
        }
        if ones != rec.target {
            return Err(format!(
                "interval {i}: {ones} queued ones, expected {}",
                rec.target
            ));
        }
    }
    if !state.budget_exceeded && state.intervals.len() != p.intervals() {
        return Err("run stopped early without exhausting the budget".into());
    }
    Ok(())
}

/// [`dpna_noise`] as a channel stage. Requires the realized delay.
#[derive(Clone, Debug)]
pub struct DpnaAdversary {
    pub params: DpnaParams,
}

impl NoiseAdversary for DpnaAdversary {
    fn name(&self) -> &str {
        "dpna"
    }

    fn needs_delay(&self) -> bool {
        true
    }

    fn corrupt(
        &self,
        x: &BitSignal,
        delay: Option<&DelayPattern>,
        _rng: &mut SimRng,
    ) -> Result<NoiseOutcome> {
        let d = delay.ok_or_else(|| Error::Adaptivity {
            channel: "D^P|N^A".into(),
            reason: "dpna needs the realized delay".into(),
        })?;
        let (pattern, state) = dpna_noise(x, d, &self.params)?;
        Ok(NoiseOutcome {
            pattern,
            budget_exceeded: state.budget_exceeded,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_delay, apply_noise};

    fn eps(n: u64, d: u64) -> Epsilon {
        Epsilon::new(n, d).unwrap()
    }

    #[test]
    fn layout_from_epsilon() {
        let p = DpnaParams::new(eps(1, 5), 100, 10).unwrap();
        assert_eq!(p.interval_len, 4);
        assert_eq!(p.quantum, 1);
        assert!(!p.quantum_is_exact());
        assert_eq!(p.budget, 200);
        let p = DpnaParams::new(eps(1, 2), 1000, 1).unwrap();
        assert_eq!((p.interval_len, p.quantum), (100, 10));
        assert!(p.quantum_is_exact());
        assert!(matches!(
            DpnaParams::new(eps(1, 4), 10, 1),
            Err(Error::NonIntegral { .. })
        ));
    }

    #[test]
    fn zero_input_uses_no_flips() {
        let p = DpnaParams::new(eps(1, 2), 10, 2).unwrap();
        let x = BitSignal::zeros(20);
        let d = DelayPattern::new((0..20).map(|j| (j % 3) as u64).collect());
        let (noise, state) = dpna_noise(&x, &d, &p).unwrap();
        assert_eq!(noise.weight(), 0);
        assert!(state
            .intervals
            .iter()
            .all(|r| r.rounded == 0 && r.flips == 0));
        check_dpna_invariants(&x, &d, &noise, &state).unwrap();
    }

    #[test]
    fn hand_trace_unit_intervals() {
        // ε = 1/2, M = 10, T = 2: L = 1, quantum 1/10 → 1, budget 10.
        let p = DpnaParams::new(eps(1, 2), 10, 2).unwrap();
        assert_eq!((p.interval_len, p.quantum, p.budget), (1, 1, 10));
        let x: BitSignal = "1101 0011 1000 0110 1011".parse().unwrap();
        // Zero delay means every packet leaves inside its own one-slot interval.
        let mut delays = vec![1u64; 20];
        for j in [0, 3, 6, 12] {
            delays[j] = 0;
        }
        let d = DelayPattern::new(delays);
        let (noise, state) = dpna_noise(&x, &d, &p).unwrap();
        // Slots 0, 3 and 6 carry ones and leave at once: zeroed. Slot 12 is
        // a zero already. Everything else keeps its value.
        let mut expected = vec![0u8; 20];
        for j in [0, 3, 6] {
            expected[j] = 1;
        }
        assert_eq!(noise.flips(), expected.as_slice());
        assert_eq!(state.flips_used, 3);
        assert_eq!(
            state.intervals[0],
            DpnaInterval {
                weight: 1,
                rounded: 1,
                departed: 1,
                target: 0,
                flips: 1
            }
        );
        assert_eq!(
            state.intervals[1],
            DpnaInterval {
                weight: 1,
                rounded: 1,
                departed: 0,
                target: 1,
                flips: 0
            }
        );
        assert_eq!(
            state.intervals[3],
            DpnaInterval {
                weight: 1,
                rounded: 1,
                departed: 1,
                target: 0,
                flips: 1
            }
        );
        assert_eq!(
            state.intervals[12],
            DpnaInterval {
                weight: 0,
                rounded: 0,
                departed: 1,
                target: 0,
                flips: 0
            }
        );
        check_dpna_invariants(&x, &d, &noise, &state).unwrap();
    }

    #[test]
    fn hand_trace_rounding() {
        // L = 4, quantum 2, four intervals, budget ⌊(1/2)·16⌋ = 8.
        let p = DpnaParams::with_layout(eps(1, 2), 8, 2, 4, 2).unwrap();
        let x: BitSignal = "1110 1011 0100 1111".parse().unwrap();
        // Interval 0: slot 1 leaves inside (1 + 2 = 3). Interval 2: slot 9 → 10.
        let mut delays = vec![10u64; 16];
        delays[1] = 2;
        delays[9] = 1;
        let d = DelayPattern::new(delays);
        let (noise, state) = dpna_noise(&x, &d, &p).unwrap();
        // Interval 0: n=3, ñ=2, y=1, n̂=min(2,3)=2. Zero slot 1; queued ones
        // {0, 2} already number 2.
        assert_eq!(
            state.intervals[0],
            DpnaInterval {
                weight: 3,
                rounded: 2,
                departed: 1,
                target: 2,
                flips: 1
            }
        );
        // Interval 1: n=3, ñ=2, y=0. Queued ones {4, 6, 7}: flip slot 4.
        assert_eq!(
            state.intervals[1],
            DpnaInterval {
                weight: 3,
                rounded: 2,
                departed: 0,
                target: 2,
                flips: 1
            }
        );
        // Interval 2: n=1, ñ=0, y=1 (slot 9, a one): zero it; nothing left.
        assert_eq!(
            state.intervals[2],
            DpnaInterval {
                weight: 1,
                rounded: 0,
                departed: 1,
                target: 0,
                flips: 1
            }
        );
        // Interval 3: n=4, ñ=4, y=0.
        assert_eq!(
            state.intervals[3],
            DpnaInterval {
                weight: 4,
                rounded: 4,
                departed: 0,
                target: 4,
                flips: 0
            }
        );
        let z = apply_noise(&x, &noise).unwrap();
        assert_eq!(z.to_string(), "1010001100001111");
        check_dpna_invariants(&x, &d, &noise, &state).unwrap();
        assert_eq!(
            dpna_canonicalize(&x, &p).unwrap().to_string(),
            "1100110000001111"
        );
    }

    #[test]
    fn budget_exhaustion_stops_flipping() {
        let p = DpnaParams::with_layout(eps(1, 8), 8, 2, 4, 4).unwrap();
        assert_eq!(p.budget, 2);
        let x: BitSignal = "1110 1110 1110 1110".parse().unwrap();
        let d = DelayPattern::new(vec![50; 16]);
        let (noise, state) = dpna_noise(&x, &d, &p).unwrap();
        // Each interval wants 3 ones rounded to 0: three flips. Two allowed.
        assert!(state.budget_exceeded);
        assert_eq!(state.flips_used, 2);
        assert_eq!(noise.weight(), 2);
        check_dpna_invariants(&x, &d, &noise, &state).unwrap();
    }

    #[test]
    fn canonical_input_produces_same_counts_for_fixed_delay() {
        // With one fixed delay the outputs need not match, but the canonical
        // form is a fixed point of rounding and yields the same interval targets.
        let p = DpnaParams::with_layout(eps(1, 2), 8, 2, 4, 2).unwrap();
        let x: BitSignal = "1011 0111 1000 0010".parse().unwrap();
        let xc = dpna_canonicalize(&x, &p).unwrap();
        assert_eq!(dpna_canonicalize(&xc, &p).unwrap(), xc);
        let d = DelayPattern::new(vec![6, 1, 9, 9, 2, 9, 9, 9, 1, 9, 9, 9, 9, 9, 9, 9]);
        let (_, s1) = dpna_noise(&x, &d, &p).unwrap();
        let (n2, s2) = dpna_noise(&xc, &d, &p).unwrap();
        let t1: Vec<u64> = s1.intervals.iter().map(|r| r.target).collect();
        let t2: Vec<u64> = s2.intervals.iter().map(|r| r.target).collect();
        assert_eq!(t1, t2);
        let _ = apply_delay(&apply_noise(&xc, &n2).unwrap(), &d).unwrap();
    }
}
