// SPDX-License-Identifier: Apache-2.0

//! Budget-respecting noise adversaries that see only the input, used to
//! stress the block codec.

use rand::seq::index;

use crate::channel::{BitSignal, DelayPattern, NoiseAdversary, NoiseOutcome, NoisePattern};
use crate::error::{check_len, Error, Result};
use crate::{Epsilon, SimRng};

/// Geometry of a block-modulated signal: `blocks` blocks, each two halves of
/// `half` slots, the decoder reading the last `tail` slots of each half.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    pub half: usize,
    pub tail: usize,
    pub blocks: usize,
}

impl BlockLayout {
    pub fn slots(&self) -> usize {
        2 * self.half * self.blocks
    }

    /// Slots of the second half of block `i`.
    pub fn second_half(&self, i: usize) -> std::ops::Range<usize> {
        let start = (2 * i + 1) * self.half;
        start..start + self.half
    }
}

/// Flips needed to push the error count in one half-block past `16εL`.
pub fn flips_to_corrupt(epsilon: Epsilon, half: usize) -> usize {
    (epsilon.times_floor(16 * half as u64) as usize + 1).min(half)
}

/// Concentrates the whole budget `⌊ε·|x|⌋` on the second halves of
/// `targets`, in order, giving each just enough flips to corrupt it.
///
/// Flips are placed immediately before the block's read window so they
/// have the least time to drain from the queue. Targets that no longer fit
/// in the budget are skipped.
pub fn burst_noise(
    x: &BitSignal,
    epsilon: Epsilon,
    targets: &[usize],
    layout: &BlockLayout,
) -> Result<NoisePattern> {
    check_len(layout.slots(), x.len())?;
    if layout.tail > layout.half {
        return Err(Error::InvalidParameter(
            "read window longer than a half-block".into(),
        ));
    }
    let mut budget = epsilon.times_floor(x.len() as u64) as usize;
    let per_block = flips_to_corrupt(epsilon, layout.half);
    let mut flips = vec![0u8; x.len()];
    if per_block == 0 {
        return Ok(NoisePattern::from_raw(flips));
    }
    for &i in targets {
        if i >= layout.blocks {
            return Err(Error::InvalidParameter(format!("block {i} out of range")));
        }
        if budget < per_block {
            break;
        }
        let range = layout.second_half(i);
        let window_start = range.end - layout.tail;
        let first = window_start.saturating_sub(per_block).max(range.start);
        for j in (first..range.end).take(per_block) {
            flips[j] = 1;
        }
        budget -= per_block;
    }
    Ok(NoisePattern::from_raw(flips))
}

/// Number of blocks [`burst_noise`] can corrupt with the full budget.
pub fn corruptible_blocks(epsilon: Epsilon, layout: &BlockLayout) -> usize {
    let per_block = flips_to_corrupt(epsilon, layout.half);
    if per_block == 0 {
        return 0;
    }
    let budget = epsilon.times_floor(layout.slots() as u64) as usize;
    (budget / per_block).min(layout.blocks)
}

/// Picks a random set of blocks each trial and bursts on them.
#[derive(Clone, Debug)]
pub struct BurstAdversary {
    pub epsilon: Epsilon,
    pub layout: BlockLayout,
}

impl NoiseAdversary for BurstAdversary {
    fn name(&self) -> &str {
        "burst"
    }

    fn corrupt(
        &self,
        x: &BitSignal,
        _delay: Option<&DelayPattern>,
        rng: &mut SimRng,
    ) -> Result<NoiseOutcome> {
        let count = corruptible_blocks(self.epsilon, &self.layout);
        let mut targets = index::sample(rng, self.layout.blocks, count).into_vec();
        targets.sort_unstable();
        burst_noise(x, self.epsilon, &targets, &self.layout).map(Into::into)
    }
}

/// Flips `⌊ε·|x|⌋` positions chosen uniformly without replacement.
#[derive(Clone, Debug)]
pub struct RandomFlips {
    pub epsilon: Epsilon,
}

impl NoiseAdversary for RandomFlips {
    fn name(&self) -> &str {
        "random"
    }

    fn corrupt(
        &self,
        x: &BitSignal,
        _delay: Option<&DelayPattern>,
        rng: &mut SimRng,
    ) -> Result<NoiseOutcome> {
        let budget = self.epsilon.times_floor(x.len() as u64) as usize;
        let mut flips = vec![0u8; x.len()];
        for j in index::sample(rng, x.len(), budget) {
            flips[j] = 1;
        }
        Ok(NoisePattern::from_raw(flips).into())
    }
}

/// Flips nothing.
#[derive(Clone, Debug, Default)]
pub struct NoFlips;

impl NoiseAdversary for NoFlips {
    fn name(&self) -> &str {
        "none"
    }

    fn corrupt(
        &self,
        x: &BitSignal,
        _delay: Option<&DelayPattern>,
        _rng: &mut SimRng,
    ) -> Result<NoiseOutcome> {
        Ok(NoisePattern::none(x.len()).into())
    }
}

/// Delivers every packet in its own slot.
#[derive(Clone, Debug, Default)]
pub struct ZeroDelay;

impl crate::channel::DelayAdversary for ZeroDelay {
    fn name(&self) -> &str {
        "zero"
    }

    fn schedule(
        &self,
        x: &BitSignal,
        _noise: Option<&NoisePattern>,
        _rng: &mut SimRng,
    ) -> Result<DelayPattern> {
        Ok(DelayPattern::zero(x.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn layout() -> BlockLayout {
        BlockLayout {
            half: 64,
            tail: 16,
            blocks: 16,
        }
    }

    #[test]
    fn zero_epsilon_flips_nothing() {
        let x = BitSignal::zeros(layout().slots());
        let p = burst_noise(&x, Epsilon::ZERO, &[0, 1, 2], &layout()).unwrap();
        assert_eq!(p.weight(), 0);
    }

    #[test]
    fn corrupted_block_count() {
        // ε = 1/64, L = 64: 16εL = 16, so 17 flips per block; budget
        // ⌊2048/64⌋ = 32 → one block.
        let eps = Epsilon::new(1, 64).unwrap();
        let l = layout();
        assert_eq!(flips_to_corrupt(eps, l.half), 17);
        assert_eq!(corruptible_blocks(eps, &l), 1);
        let x = BitSignal::zeros(l.slots());
        let p = burst_noise(&x, eps, &[3, 5, 7], &l).unwrap();
        assert_eq!(p.weight(), 17);
        let hit = l.second_half(3);
        assert_eq!(
            p.flips()[hit.clone()].iter().filter(|&&b| b == 1).count(),
            17
        );
        // Placed right before the read window.
        assert_eq!(p.flips()[hit.end - l.tail - 1], 1);
        assert_eq!(p.flips()[hit.end - l.tail], 0);
    }

    #[test]
    fn weight_within_budget() {
        let eps = Epsilon::new(1, 8).unwrap();
        let l = layout();
        let x = BitSignal::ones(l.slots());
        let all: Vec<usize> = (0..l.blocks).collect();
        let p = burst_noise(&x, eps, &all, &l).unwrap();
        assert!(p.weight() <= eps.times_floor(l.slots() as u64) as usize);
        let mut rng = stream(1, Stream::Adversary);
        let out = RandomFlips { epsilon: eps }
            .corrupt(&x, None, &mut rng)
            .unwrap();
        assert_eq!(out.pattern.weight(), 256);
        let out = BurstAdversary {
            epsilon: eps,
            layout: l,
        }
        .corrupt(&x, None, &mut rng)
        .unwrap();
        assert!(out.pattern.weight() <= 256);
    }
}
