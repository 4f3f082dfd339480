// SPDX-License-Identifier: Apache-2.0

//! Delay adversary acting before random noise.
//!
//! Time is cut into `2T` intervals of `M/2` slots. At the end of each
//! interval the adversary releases `ñ_0` zero-packets and `ñ_1` one-packets,
//! holding back just enough of the majority value that the signature
//! `ε·ñ_0 + (1−ε)·ñ_1` (the mean of the received sum after Bernoulli(ε)
//! flips) lands within `1/2` of a multiple of `M/c`, `c = 4/ε`. Held packets
//! go out at the end of the next interval, so no packet waits more than `M`
//! slots. The final interval releases everything and is exempt from the
//! rounding.

use std::collections::VecDeque;

use num_rational::Ratio;

use crate::channel::{BitSignal, DelayAdversary, DelayPattern, NoisePattern};
use crate::error::{check_len, Error, Result};
use crate::{Epsilon, SimRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DanpParams {
    pub epsilon: Epsilon,
    pub m: u64,
    pub t: u64,
    /// `c = 4/ε`.
    pub c: u64,
}

impl DanpParams {
    /// Requires `4/ε` to be an integer and `M` to be divisible by `c` and by 4.
    pub fn new(epsilon: Epsilon, m: u64, t: u64) -> Result<Self> {
        if epsilon.is_zero() {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        let c = Ratio::from_integer(4) / epsilon.ratio();
        if !c.is_integer() {
            return Err(Error::NonIntegral {
                what: "c = 4/ε",
                value: c.to_string(),
            });
        }
        let c = c.to_integer();
        if m % c != 0 {
            return Err(Error::NonIntegral {
                what: "M/c",
                value: format!("{m}/{c}"),
            });
        }
        if m % 4 != 0 {
            return Err(Error::NonIntegral {
                what: "M/4",
                value: format!("{m}/4"),
            });
        }
        if t == 0 {
            return Err(Error::InvalidParameter("T must be positive".into()));
        }
        Ok(DanpParams { epsilon, m, t, c })
    }

    pub fn slots(&self) -> usize {
        (self.m * self.t) as usize
    }

    pub fn interval_len(&self) -> usize {
        (self.m / 2) as usize
    }

    pub fn intervals(&self) -> usize {
        2 * self.t as usize
    }

    /// `M/c`, the signature grid step.
    pub fn unit(&self) -> u64 {
        self.m / self.c
    }

    /// `ε·n0 + (1−ε)·n1`, exactly.
    pub fn signature_of(&self, n0: u64, n1: u64) -> Ratio<u64> {
        self.epsilon.ratio() * Ratio::from_integer(n0)
            + self.epsilon.complement() * Ratio::from_integer(n1)
    }

    /// Distance from `s` to the nearest multiple of `M/c`.
    pub fn grid_distance(&self, s: Ratio<u64>) -> Ratio<u64> {
        let unit = Ratio::from_integer(self.unit());
        let k = (s / unit).floor();
        let below = s - k * unit;
        let above = unit - below;
        below.min(above)
    }

    fn on_grid(&self, n0: u64, n1: u64) -> bool {
        self.grid_distance(self.signature_of(n0, n1)) < Ratio::new(1, 2)
    }
}

/// Bookkeeping for one interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DanpInterval {
    /// `n_0(i)`, `n_1(i)`: arrivals of each value.
    pub arrived: [u64; 2],
    /// `n'_0(i)`, `n'_1(i)`: arrivals plus packets carried from the previous interval.
    pub available: [u64; 2],
    /// `ñ_0(i)`, `ñ_1(i)`: packets released at the end of the interval.
    pub released: [u64; 2],
    /// The last interval releases everything and skips the rounding.
    pub exempt: bool,
}

impl DanpInterval {
    pub fn total_released(&self) -> u64 {
        self.released[0] + self.released[1]
    }

    pub fn held(&self) -> [u64; 2] {
        [
            self.available[0] - self.released[0],
            self.available[1] - self.released[1],
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DanpState {
    pub params: DanpParams,
    pub intervals: Vec<DanpInterval>,
}

/// Largest `v ≤ avail` that puts the signature on the grid, with the other
/// class fixed.
fn round_down(params: &DanpParams, avail: u64, fixed: u64, ones: bool) -> Option<u64> {
    (0..=avail).rev().find(|&v| {
        if ones {
            params.on_grid(fixed, v)
        } else {
            params.on_grid(v, fixed)
        }
    })
}

/// Computes the release schedule for `x` and the delay that realizes it.
///
/// Within each value class packets leave first-in first-out.
pub fn danp_delay(x: &BitSignal, params: &DanpParams) -> Result<(DelayPattern, DanpState)> {
    check_len(params.slots(), x.len())?;
    let len = params.interval_len();
    let count = params.intervals();
    let mut delays = vec![0u64; x.len()];
    let mut queues: [VecDeque<usize>; 2] = [VecDeque::new(), VecDeque::new()];
    let mut intervals = Vec::with_capacity(count);

    for i in 0..count {
        let (start, end) = (i * len, (i + 1) * len);
        let carried = [queues[0].len() as u64, queues[1].len() as u64];
        let mut arrived = [0u64; 2];
        for j in start..end {
            let b = x.bits()[j] as usize;
            arrived[b] += 1;
            queues[b].push_back(j);
        }
        let available = [carried[0] + arrived[0], carried[1] + arrived[1]];
        let exempt = i + 1 == count;
        let released = if exempt {
            available
        } else if arrived[1] >= arrived[0] {
            let n1 = round_down(params, available[1], available[0], true)
                .ok_or_else(|| infeasible(i, available))?;
            [available[0], n1]
        } else {
            let n0 = round_down(params, available[0], available[1], false)
                .ok_or_else(|| infeasible(i, available))?;
            [n0, available[1]]
        };
        for b in 0..2 {
            // Everything carried in must leave now; only this interval's
            // arrivals may be held over.
            if released[b] < carried[b] {
                return Err(Error::InvalidParameter(format!(
                    "interval {i}: rounding would hold a packet for two intervals"
                )));
            }
            let release_slot = (end - 1) as u64;
            for _ in 0..released[b] {
                let j = queues[b].pop_front().expect("released ≤ available");
                delays[j] = release_slot - j as u64;
            }
        }
        intervals.push(DanpInterval {
            arrived,
            available,
            released,
            exempt,
        });
    }

    Ok((
        DelayPattern::new(delays),
        DanpState {
            params: *params,
            intervals,
        },
    ))
}

fn infeasible(i: usize, available: [u64; 2]) -> Error {
    Error::InvalidParameter(format!(
        "interval {i}: no release count puts the signature on the grid (available {available:?})"
    ))
}

/// `μ_i`, the nearest integer to each interval's signature.
pub fn signature_vector(state: &DanpState) -> Vec<u64> {
    state
        .intervals
        .iter()
        .map(|iv| {
            let s = state.params.signature_of(iv.released[0], iv.released[1]);
            (s + Ratio::new(1, 2)).floor().to_integer()
        })
        .collect()
}

/// Checks delay ≤ `M`, release ≤ `3M/4`, the grid condition on every
/// non-final interval, and packet conservation.
pub fn check_danp_invariants(
    d: &DelayPattern,
    state: &DanpState,
) -> std::result::Result<(), String> {
    let p = &state.params;
    if let Some((j, &v)) = d.delays().iter().enumerate().find(|(_, &v)| v > p.m) {
        return Err(format!("packet {j} delayed {v} > M"));
    }
    let mut carried = [0u64; 2];
    for (i, iv) in state.intervals.iter().enumerate() {
        if iv.total_released() > 3 * p.m / 4 {
            return Err(format!(
                "interval {i} releases {} > 3M/4",
                iv.total_released()
            ));
        }
        for b in 0..2 {
            if iv.available[b] != carried[b] + iv.arrived[b] {
                return Err(format!("interval {i}: carry-over mismatch for value {b}"));
            }
            if iv.released[b] < carried[b] {
                return Err(format!("interval {i}: carried packets not released"));
            }
        }
        if !iv.exempt {
            let dist = p.grid_distance(p.signature_of(iv.released[0], iv.released[1]));
            if dist >= Ratio::new(1, 2) {
                return Err(format!("interval {i}: signature {dist} away from the grid"));
            }
        }
        carried = iv.held();
    }
    if carried != [0, 0] {
        return Err("packets left in the queue after the last interval".into());
    }
    Ok(())
}

/// [`danp_delay`] as a channel stage. Ignores any realized noise.
#[derive(Clone, Debug)]
pub struct DanpAdversary {
    pub params: DanpParams,
}

impl DelayAdversary for DanpAdversary {
    fn name(&self) -> &str {
        "danp"
    }

    fn schedule(
        &self,
        x: &BitSignal,
        _noise: Option<&NoisePattern>,
        _rng: &mut SimRng,
    ) -> Result<DelayPattern> {
        danp_delay(x, &self.params).map(|(d, _)| d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: u64, t: u64) -> DanpParams {
        DanpParams::new(Epsilon::new(1, 4).unwrap(), m, t).unwrap()
    }

    #[test]
    fn validation() {
        assert_eq!(params(32, 2).c, 16);
        assert_eq!(params(32, 2).unit(), 2);
        let e = Epsilon::new(3, 10).unwrap();
        assert!(matches!(
            DanpParams::new(e, 40, 1),
            Err(Error::NonIntegral { .. })
        ));
        let e = Epsilon::new(1, 3).unwrap();
        assert_eq!(DanpParams::new(e, 48, 1).unwrap().c, 12);
        let e = Epsilon::new(1, 4).unwrap();
        assert!(DanpParams::new(e, 40, 1).is_err());
    }

    #[test]
    fn all_ones_hand_trace() {
        // M = 32, c = 16, M/c = 2, intervals of 16. All ones: n_1 = 16 ≥ n_0 = 0,
        // ñ_0 = 0 and (3/4)·16 = 12 = 6·2 is already on the grid.
        let p = params(32, 2);
        let (d, state) = danp_delay(&BitSignal::ones(64), &p).unwrap();
        for iv in &state.intervals {
            assert_eq!(iv.released, [0, 16]);
        }
        assert_eq!(signature_vector(&state), vec![12; 4]);
        check_danp_invariants(&d, &state).unwrap();
        // Released at the end of their own interval.
        assert_eq!(d.delays()[0], 15);
        assert_eq!(d.delays()[15], 0);
    }

    #[test]
    fn mixed_hand_trace() {
        // Interval weights 9, 5, 16, 0 over intervals of 16 slots.
        let p = params(32, 2);
        let mut bits = vec![0u8; 64];
        for j in 0..9 {
            bits[j] = 1;
        }
        for j in 16..21 {
            bits[j] = 1;
        }
        for j in 32..48 {
            bits[j] = 1;
        }
        let (d, state) = danp_delay(&BitSignal::new(bits).unwrap(), &p).unwrap();
        let iv = &state.intervals;
        // i=0: n1=9 ≥ n0=7, so ñ0 = 7 and ñ1 is rounded down from 9:
        // 7/4 + (3/4)·9 = 8.5 is exactly 1/2 off; 7/4 + 6 = 7.75 is close to 8.
        assert_eq!(iv[0].released, [7, 8]);
        // i=1: one 1 carried; n0=11 > n1=5, so ñ1 = 6 and ñ0 is rounded down
        // from 11: n0/4 + 4.5 gives 7.25, 7.0, 6.75, 6.5, then 6.25 at n0 = 7.
        assert_eq!(iv[1].available, [11, 6]);
        assert_eq!(iv[1].released, [7, 6]);
        // i=2: four 0s carried, sixteen 1s: 1 + 12 = 13 is odd, 1 + 11.25 fits.
        assert_eq!(iv[2].available, [4, 16]);
        assert_eq!(iv[2].released, [4, 15]);
        // i=3: final, releases everything.
        assert!(iv[3].exempt);
        assert_eq!(iv[3].released, [16, 1]);
        assert_eq!(signature_vector(&state), vec![8, 6, 12, 5]);
        check_danp_invariants(&d, &state).unwrap();
        // Held packets leave at the end of the next interval.
        assert_eq!(d.delays()[8], 31 - 8);
        assert_eq!(d.delays()[28], 47 - 28);
        assert_eq!(d.delays()[47], 63 - 47);
        assert_eq!(d.delays()[27], 31 - 27);
    }

    #[test]
    fn all_zero_message() {
        let p = params(32, 2);
        let (d, state) = danp_delay(&BitSignal::zeros(64), &p).unwrap();
        // (1/4)·16 = 4 = 2·2, on the grid without holding anything back.
        assert_eq!(signature_vector(&state), vec![4; 4]);
        check_danp_invariants(&d, &state).unwrap();
    }

    #[test]
    fn deterministic() {
        let p = params(32, 2);
        let x: BitSignal = "1011001110001011010101110000111101010011101010100110101011100011"
            .parse()
            .unwrap();
        let (_, a) = danp_delay(&x, &p).unwrap();
        let (_, b) = danp_delay(&x, &p).unwrap();
        assert_eq!(signature_vector(&a), signature_vector(&b));
    }
}
