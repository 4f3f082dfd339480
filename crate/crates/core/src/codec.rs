// SPDX-License-Identifier: Apache-2.0

//! Block-modulation codec whose rate grows with the discretization `M`.
//!
//! A message is first encoded with an outer binary code of length `N`. Each
//! code bit becomes a block of two halves of `L = M^{4/5}` slots: `1^L 0^L`
//! for a 1 and `0^L 1^L` for a 0. The receiver compares the received sums
//! over the last `L' = M^{3/4}` slots of each half. Draining a half of ones
//! raises the later window by about `M^{11/20}`, which is what the threshold
//! test looks for.

use std::ops::Range;

use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;

use crate::adversary::BlockLayout;
use crate::channel::{BitSignal, ReceivedSignal, Transmission};
use crate::error::{check_len, Error, Result};
use crate::rng::{self, Stream};
use crate::stochastic::DelayModel;
use crate::Epsilon;

/// Largest message length handled by exhaustive decoding.
pub const MAX_K: usize = 16;
/// Codewords are packed into a `u64`.
pub const MAX_N: usize = 64;

/// Rounds `M^e` half-up. Exact when `M` is a perfect power of the
/// exponent's denominator.
pub fn round_power(m: u64, exponent: f64) -> u64 {
    let v = (m as f64).powf(exponent);
    let r = v.round();
    // Snap values within float noise of an integer.
    if (v - r).abs() < 1e-6 * v.max(1.0) {
        r as u64
    } else {
        (v + 0.5).floor() as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CodecParams {
    pub m: u64,
    /// `L`, the half-block length.
    pub half_len: u64,
    /// `L'`, the read window at the end of each half.
    pub tail_len: u64,
    /// `M^{11/20}`, rounded.
    pub threshold_scale: u64,
    pub k: usize,
    pub n: usize,
    pub epsilon: Epsilon,
    /// E3 fires on deviations above `M^{deviation_exponent}`.
    pub deviation_exponent: f64,
}

impl CodecParams {
    pub fn new(m: u64, k: usize, n: usize, epsilon: Epsilon) -> Result<Self> {
        let p = CodecParams {
            m,
            half_len: round_power(m, 0.8),
            tail_len: round_power(m, 0.75),
            threshold_scale: round_power(m, 0.55),
            k,
            n,
            epsilon,
            deviation_exponent: 0.52,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_deviation_exponent(mut self, e: f64) -> Self {
        self.deviation_exponent = e;
        self
    }

    /// Every violated constraint, one message each.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.m < 2 {
            v.push(format!("M = {} is too small for block modulation", self.m));
        }
        if self.k == 0 || self.k > MAX_K {
            v.push(format!("k = {} must lie in 1..={MAX_K}", self.k));
        }
        if self.n == 0 || self.n > MAX_N {
            v.push(format!("N = {} must lie in 1..={MAX_N}", self.n));
        }
        if self.half_len <= self.tail_len {
            v.push(format!(
                "L = {} must exceed L' = {}",
                self.half_len, self.tail_len
            ));
        }
        if self.m > 0 && (2 * self.half_len * self.n as u64) % self.m != 0 {
            v.push(format!(
                "2·L·N = {} is not a multiple of M = {}",
                2 * self.half_len * self.n as u64,
                self.m
            ));
        }
        v
    }

    /// `ε < 1/64`, where the decoding guarantee is proved. Outside it the
    /// codec still runs; it just has no guarantee.
    pub fn in_proof_regime(&self) -> bool {
        self.epsilon.ratio() < Ratio::new(1, 64)
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    pub fn slots(&self) -> usize {
        2 * self.half_len as usize * self.n
    }

    /// Time horizon `T = 2LN/M`.
    pub fn t(&self) -> u64 {
        self.slots() as u64 / self.m
    }

    pub fn layout(&self) -> BlockLayout {
        BlockLayout {
            half: self.half_len as usize,
            tail: self.tail_len as usize,
            blocks: self.n,
        }
    }

    /// Half `h ∈ {0, 1}` of block `i`.
    pub fn half(&self, i: usize, h: usize) -> Range<usize> {
        let l = self.half_len as usize;
        let start = (2 * i + h) * l;
        start..start + l
    }

    /// The read window at the end of half `h` of block `i`.
    pub fn window(&self, i: usize, h: usize) -> Range<usize> {
        let r = self.half(i, h);
        r.end - self.tail_len as usize..r.end
    }

    pub fn deviation_threshold(&self) -> f64 {
        (self.m as f64).powf(self.deviation_exponent)
    }

    /// `⌊16εL⌋`; a block with more flips in its second half is corrupted.
    pub fn corruption_limit(&self) -> u64 {
        self.epsilon.times_floor(16 * self.half_len)
    }
}

/// A binary linear code with exhaustive nearest-codeword decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OuterCode {
    k: usize,
    n: usize,
    /// Codeword of message `m` at index `m`; bit `j` is position `j`.
    codebook: Vec<u64>,
    dmin: u32,
}

impl OuterCode {
    /// Builds a code from generator rows, each a length-`n` bitmask.
    pub fn from_generator(n: usize, rows: &[u64]) -> Result<Self> {
        let k = rows.len();
        if k == 0 || k > MAX_K || n == 0 || n > MAX_N {
            return Err(Error::InvalidParameter(format!(
                "unsupported code size k={k}, n={n}"
            )));
        }
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let codebook: Vec<u64> = (0..1u64 << k)
            .map(|m| {
                rows.iter()
                    .enumerate()
                    .filter(|(i, _)| m >> i & 1 == 1)
                    .fold(0, |acc, (_, r)| acc ^ (r & mask))
            })
            .collect();
        // Linear: minimum distance is minimum nonzero weight, or 0 if the
        // generator is rank deficient.
        let dmin = codebook[1..]
            .iter()
            .map(|c| c.count_ones())
            .min()
            .unwrap_or(n as u32);
        Ok(OuterCode {
            k,
            n,
            codebook,
            dmin,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dmin(&self) -> u32 {
        self.dmin
    }

    pub fn codebook(&self) -> &[u64] {
        &self.codebook
    }

    pub fn encode(&self, message: u64) -> u64 {
        self.codebook[message as usize]
    }

    pub fn encode_bits(&self, message: u64) -> Vec<u8> {
        let c = self.encode(message);
        (0..self.n).map(|j| (c >> j & 1) as u8).collect()
    }

    /// Errors this code corrects uniquely.
    pub fn radius(&self) -> u32 {
        self.dmin.saturating_sub(1) / 2
    }
}

/// Packs bits into a `u64`, position `j` at bit `j`.
pub fn pack_bits(bits: &[u8]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (j, &b)| acc | (u64::from(b & 1) << j))
}

/// Random linear `[n, k]` code, resampled until `dmin > 2τn`.
///
/// Deterministic in `seed`.
pub fn build_outer_code(k: usize, n: usize, tau: Ratio<u64>, seed: u64) -> Result<OuterCode> {
    const ATTEMPTS: usize = 10_000;
    let mut rng = rng::stream(seed, Stream::Code);
    // dmin > 2τn ⇔ dmin > ⌊2τn⌋
    let required = (tau * 2 * n as u64).floor().to_integer() as usize;
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    for _ in 0..ATTEMPTS {
        let rows: Vec<u64> = (0..k).map(|_| rng.random::<u64>() & mask).collect();
        let code = OuterCode::from_generator(n, &rows)?;
        if code.dmin as usize > required {
            return Ok(code);
        }
    }
    Err(Error::CodeConstruction {
        k,
        n,
        required,
        attempts: ATTEMPTS,
    })
}

/// Fraction of errors the outer code is built to correct.
pub fn default_tau() -> Ratio<u64> {
    Ratio::new(5, 24)
}

/// Nearest codeword by Hamming distance; ties go to the lowest message.
pub fn outer_decode(code: &OuterCode, s: &[u8]) -> Result<u64> {
    check_len(code.n, s.len())?;
    let word = pack_bits(s);
    let (best, _) = code
        .codebook
        .iter()
        .enumerate()
        .min_by_key(|&(i, c)| ((c ^ word).count_ones(), i))
        .expect("codebook is non-empty");
    Ok(best as u64)
}

/// Replaces each code bit by `1^L 0^L` (for 1) or `0^L 1^L` (for 0).
pub fn block_encode(message: u64, params: &CodecParams, code: &OuterCode) -> Result<BitSignal> {
    check_len(params.n, code.n)?;
    if message >= 1 << code.k {
        return Err(Error::InvalidParameter(format!(
            "message {message} needs more than {} bits",
            code.k
        )));
    }
    Ok(modulate(
        &code.encode_bits(message),
        params.half_len as usize,
    ))
}

/// Inner modulation alone.
pub fn modulate(word: &[u8], half_len: usize) -> BitSignal {
    let mut out = Vec::with_capacity(2 * half_len * word.len());
    for &b in word {
        let (first, second) = if b == 1 { (1, 0) } else { (0, 1) };
        out.extend(std::iter::repeat_n(first, half_len));
        out.extend(std::iter::repeat_n(second, half_len));
    }
    BitSignal::from_bools(out.into_iter().map(|b| b == 1))
}

/// `Y(I) = Σ_{t ∈ I} Y_t`.
pub fn interval_sum(y: &ReceivedSignal, interval: Range<usize>) -> Result<u64> {
    if interval.start > interval.end || interval.end > y.len() {
        return Err(Error::IntervalOutOfRange {
            start: interval.start,
            end: interval.end,
            slots: y.len(),
        });
    }
    Ok(y.counts()[interval].iter().sum())
}

/// Threshold test per block: `w_i = 1` iff
/// `Y(Γ'_b) − Y(Γ'_a) ≤ (1/2 − α_i)·M^{11/20}` with `α_i = Y(Γ'_a)/L'`.
pub fn demodulate(y: &ReceivedSignal, params: &CodecParams) -> Result<Vec<u8>> {
    check_len(params.slots(), y.len())?;
    let lp = params.tail_len as i128;
    let s = params.threshold_scale as i128;
    (0..params.n)
        .map(|i| {
            let first = interval_sum(y, params.window(i, 0))? as i128;
            let second = interval_sum(y, params.window(i, 1))? as i128;
            // Scaled by 2L' to stay in integers.
            Ok(u8::from(2 * lp * (second - first) <= (lp - 2 * first) * s))
        })
        .collect()
}

/// Demodulates and decodes; reads nothing but `y` and public parameters.
pub fn block_decode(y: &ReceivedSignal, params: &CodecParams, code: &OuterCode) -> Result<u64> {
    outer_decode(code, &demodulate(y, params)?)
}

/// Fraction of positions where `w` matches `sent`.
pub fn agreement(w: &[u8], sent: &[u8]) -> f64 {
    if w.is_empty() {
        return 1.0;
    }
    let same = w.iter().zip(sent).filter(|(a, b)| a == b).count();
    same as f64 / w.len() as f64
}

/// Channel-side view of each block, for analysis only.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BlockDiagnostics {
    /// E1: more than `cM` ones queued at the block start.
    pub heavy: Vec<bool>,
    /// E2: more than `16εL` flips in the second half.
    pub corrupted: Vec<bool>,
    /// E3: not heavy, and a read window deviates from its conditional mean
    /// by more than `M^{deviation_exponent}`.
    pub deviant: Vec<bool>,
    /// Ones queued at each block start.
    pub queue: Vec<u64>,
    /// `Y(Γ'_a)/L'` per block.
    pub alpha: Vec<f64>,
    /// Fraction of blocks with `w_i` equal to the sent code bit.
    pub w_agreement: f64,
}

impl BlockDiagnostics {
    pub fn count(flags: &[bool]) -> usize {
        flags.iter().filter(|&&f| f).count()
    }

    /// No bad event on block `i`.
    pub fn clean(&self, i: usize) -> bool {
        !(self.heavy[i] || self.corrupted[i] || self.deviant[i])
    }
}

/// Flags the bad events of every block from the realized noise and delays.
///
/// `sent` is the outer codeword and `w` the demodulated word. Conditional
/// means use the memoryless tail of the geometric delay `model`: a packet
/// still queued at slot `s` arrives at `s + k` with probability `p(1−p)^k`.
/// Without a model (adversarial delay) E3 is never flagged.
pub fn classify_blocks(
    x: &BitSignal,
    truth: &Transmission,
    params: &CodecParams,
    heavy_c: f64,
    model: Option<&DelayModel>,
    sent: &[u8],
    w: &[u8],
) -> Result<BlockDiagnostics> {
    let slots = params.slots();
    check_len(slots, x.len())?;
    check_len(slots, truth.received.len())?;
    check_len(params.n, sent.len())?;
    check_len(params.n, w.len())?;
    let z = truth.noisy(x)?;
    let z = z.bits();
    let delays = truth.delay.delays();
    let flips = truth.noise.flips();

    // Ones pending at slot s: j < s ≤ j + Δ_j.
    let mut diff = vec![0i64; slots + 1];
    for (j, (&b, &d)) in z.iter().zip(delays).enumerate() {
        if b == 1 && d > 0 {
            diff[j + 1] += 1;
            let stop = (j as u64 + d + 1).min(slots as u64) as usize;
            diff[stop] -= 1;
        }
    }
    let mut pending = Vec::with_capacity(slots + 1);
    let mut acc = 0i64;
    for v in &diff {
        acc += v;
        pending.push(acc as u64);
    }

    let q = model.map_or(1.0, |m| 1.0 - m.departure_probability());
    let block = 2 * params.half_len as usize;
    // qpow[k] = (1−p)^k for k ≤ 2L + 1.
    let mut qpow = Vec::with_capacity(block + 2);
    let mut v = 1.0f64;
    for _ in 0..block + 2 {
        qpow.push(v);
        v *= q;
    }
    let offset = match model.map(|m| m.convention) {
        Some(crate::stochastic::DelayConvention::FromZero) => 0,
        _ => 1,
    };
    // P[Δ > d] for 0 ≤ d ≤ 2L.
    let survival = |d: usize| {
        if d + 1 < offset {
            1.0
        } else {
            qpow[d + 1 - offset]
        }
    };

    let limit = params.corruption_limit();
    let dev = params.deviation_threshold();
    let mut out = BlockDiagnostics::default();
    for i in 0..params.n {
        let s0 = i * block;
        let queued = pending[s0];
        let heavy = queued as f64 > heavy_c * params.m as f64;
        let second = params.half(i, 1);
        let corrupted = flips[second].iter().filter(|&&f| f == 1).count() as u64 > limit;

        let mut deviant = false;
        let checked = if model.is_some() { 0..2 } else { 0..0 };
        for h in checked {
            let win = params.window(i, h);
            let (a, b) = (win.start - s0, win.end - s0);
            let mut mean = queued as f64 * (qpow[a] - qpow[b]);
            for (j, _) in z[s0..win.end].iter().enumerate().filter(|(_, &v)| v == 1) {
                // P[j + Δ ∈ [a, b)] for a packet sent at offset j.
                let lo = a.saturating_sub(j);
                let hi = b - j;
                let below = if lo == 0 { 1.0 } else { survival(lo - 1) };
                mean += below - survival(hi - 1);
            }
            let observed = interval_sum(&truth.received, win)? as f64;
            if (observed - mean).abs() > dev {
                deviant = true;
            }
        }
        out.heavy.push(heavy);
        out.corrupted.push(corrupted);
        out.deviant.push(!heavy && deviant);
        out.queue.push(queued);
        let first = interval_sum(&truth.received, params.window(i, 0))?;
        out.alpha.push(first as f64 / params.tail_len as f64);
    }
    out.w_agreement = agreement(w, sent);
    Ok(out)
}
