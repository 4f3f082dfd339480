// SPDX-License-Identifier: Apache-2.0

//! The discretized delay-and-noise channel.
//!
//! Time is cut into `M` micro-intervals per unit, `T` units in all, so a
//! transmission occupies `M·T` slots. The sender puts one bit per slot. A
//! noise function flips some of them and a delay function moves the packet
//! sent in slot `j` to slot `j + Δ(j)`. The receiver sees only the per-slot
//! sums of the values that arrive.
//!
//! Slots are 0-based in code. A packet whose arrival slot falls past the
//! horizon is never delivered, and a packet whose value was flipped to 0
//! still arrives but adds nothing to the count.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::rng::{self, Stream};
use crate::stochastic::{DelayModel, NoiseModel};
use crate::SimRng;

/// `M` micro-intervals per time unit over `T` units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discretization {
    m: u64,
    t: u64,
}

impl Discretization {
    pub fn new(m: u64, t: u64) -> Result<Self> {
        if m == 0 || t == 0 {
            return Err(Error::InvalidParameter(format!(
                "M and T must be positive, got M={m}, T={t}"
            )));
        }
        m.checked_mul(t)
            .filter(|&s| s <= usize::MAX as u64)
            .ok_or_else(|| Error::InvalidParameter("M·T overflows".into()))?;
        Ok(Discretization { m, t })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn slots(&self) -> usize {
        (self.m * self.t) as usize
    }
}

/// The sender's bit sequence `X_1 … X_{MT}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BitSignal(Vec<u8>);

impl BitSignal {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!(
                "bit value {b} is not 0 or 1"
            )));
        }
        Ok(BitSignal(bits))
    }

    pub fn zeros(len: usize) -> Self {
        BitSignal(vec![0; len])
    }

    pub fn ones(len: usize) -> Self {
        BitSignal(vec![1; len])
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        BitSignal(bits.into_iter().map(u8::from).collect())
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }
}

impl FromStr for BitSignal {
    type Err = Error;

    /// Parses a string of `0`/`1` characters; spaces and underscores are ignored.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !matches!(c, ' ' | '_'))
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidParameter(format!(
                    "unexpected character {other:?}"
                ))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitSignal)
    }
}

impl fmt::Display for BitSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// The flip function `ξ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct NoisePattern(Vec<u8>);

impl NoisePattern {
    pub fn new(flips: Vec<u8>) -> Result<Self> {
        BitSignal::new(flips).map(|b| NoisePattern(b.0))
    }

    pub fn none(len: usize) -> Self {
        NoisePattern(vec![0; len])
    }

    pub fn flips(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub(crate) fn from_raw(flips: Vec<u8>) -> Self {
        NoisePattern(flips)
    }
}

/// The delay function `Δ`, in micro-intervals per slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DelayPattern(Vec<u64>);

impl DelayPattern {
    pub fn new(delays: Vec<u64>) -> Self {
        DelayPattern(delays)
    }

    pub fn zero(len: usize) -> Self {
        DelayPattern(vec![0; len])
    }

    pub fn delays(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Arrival slot of packet `j`, or `None` past the horizon.
    pub fn arrival(&self, j: usize) -> Option<usize> {
        let slots = self.0.len() as u64;
        let at = j as u64 + self.0[j];
        (at < slots).then_some(at as usize)
    }

    /// `W = Σ_j Δ(j)`, counting every delay in full.
    pub fn total_wait(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// Per-slot received sums `Y_1 … Y_{MT}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ReceivedSignal(Vec<u64>);

impl ReceivedSignal {
    pub fn new(counts: Vec<u64>) -> Self {
        ReceivedSignal(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// `Z_j = X_j ⊕ ξ(j)`.
pub fn apply_noise(x: &BitSignal, xi: &NoisePattern) -> Result<BitSignal> {
    check_len(x.len(), xi.len())?;
    Ok(BitSignal(
        x.0.iter().zip(&xi.0).map(|(a, b)| a ^ b).collect(),
    ))
}

/// `Y_i = Σ_{j : j + Δ(j) = i} Z_j`; packets landing past the horizon are dropped.
pub fn apply_delay(z: &BitSignal, d: &DelayPattern) -> Result<ReceivedSignal> {
    check_len(z.len(), d.len())?;
    let mut counts = vec![0u64; z.len()];
    for (j, &bit) in z.0.iter().enumerate() {
        if bit == 1 {
            if let Some(at) = d.arrival(j) {
                counts[at] += 1;
            }
        }
    }
    Ok(ReceivedSignal(counts))
}

/// One of the two channel stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Noise,
    Delay,
}

/// Whether a stage is random or chosen by an adversary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Behavior {
    Probabilistic,
    Adversarial,
}

impl Behavior {
    fn tag(self) -> char {
        match self {
            Behavior::Probabilistic => 'P',
            Behavior::Adversarial => 'A',
        }
    }
}

/// A channel of the taxonomy, written `X|Y`: stage `X` is realized first and
/// stage `Y` acts knowing `X`'s realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChannelKind {
    pub first: Stage,
    pub noise: Behavior,
    pub delay: Behavior,
}

impl ChannelKind {
    pub const fn new(first: Stage, noise: Behavior, delay: Behavior) -> Self {
        ChannelKind {
            first,
            noise,
            delay,
        }
    }

    /// All eight syntactic channels, in the order `N^P|D^P, D^P|N^P, D^A|N^P,
    /// N^A|D^P, D^P|N^A, N^P|D^A, N^A|D^A, D^A|N^A`.
    pub const ALL: [ChannelKind; 8] = {
        use Behavior::*;
        use Stage::*;
        [
            ChannelKind::new(Noise, Probabilistic, Probabilistic),
            ChannelKind::new(Delay, Probabilistic, Probabilistic),
            ChannelKind::new(Delay, Probabilistic, Adversarial),
            ChannelKind::new(Noise, Adversarial, Probabilistic),
            ChannelKind::new(Delay, Adversarial, Probabilistic),
            ChannelKind::new(Noise, Probabilistic, Adversarial),
            ChannelKind::new(Noise, Adversarial, Adversarial),
            ChannelKind::new(Delay, Adversarial, Adversarial),
        ]
    };

    /// The noise stage sees the realized delay.
    pub fn noise_sees_delay(&self) -> bool {
        self.first == Stage::Delay
    }

    /// The delay stage sees the realized noise.
    pub fn delay_sees_noise(&self) -> bool {
        self.first == Stage::Noise
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = format!("N^{}", self.noise.tag());
        let d = format!("D^{}", self.delay.tag());
        match self.first {
            Stage::Noise => write!(f, "{n}|{d}"),
            Stage::Delay => write!(f, "{d}|{n}"),
        }
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        ChannelKind::ALL
            .into_iter()
            .find(|k| k.to_string() == compact)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown channel {s:?}; expected one of N^P|D^P, D^P|N^P, D^A|N^P, N^A|D^P, D^P|N^A, N^P|D^A, N^A|D^A, D^A|N^A"
                ))
            })
    }
}

impl Serialize for ChannelKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ChannelKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Flips chosen by a noise adversary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoiseOutcome {
    pub pattern: NoisePattern,
    /// The adversary ran out of budget and stopped flipping.
    pub budget_exceeded: bool,
}

impl From<NoisePattern> for NoiseOutcome {
    fn from(pattern: NoisePattern) -> Self {
        NoiseOutcome {
            pattern,
            budget_exceeded: false,
        }
    }
}

/// A noise stage that chooses `ξ`.
///
/// `delay` is `Some` exactly when the noise stage acts after the delay has
/// been realized.
pub trait NoiseAdversary: Sync {
    fn name(&self) -> &str;

    /// Whether the strategy is only defined with knowledge of the delay.
    fn needs_delay(&self) -> bool {
        false
    }

    fn corrupt(
        &self,
        x: &BitSignal,
        delay: Option<&DelayPattern>,
        rng: &mut SimRng,
    ) -> Result<NoiseOutcome>;
}

/// A delay stage that chooses `Δ`.
///
/// `noise` is `Some` exactly when the delay stage acts after the noise has
/// been realized.
pub trait DelayAdversary: Sync {
    fn name(&self) -> &str;

    fn needs_noise(&self) -> bool {
        false
    }

    fn schedule(
        &self,
        x: &BitSignal,
        noise: Option<&NoisePattern>,
        rng: &mut SimRng,
    ) -> Result<DelayPattern>;
}

pub enum NoiseSource<'a> {
    Random(NoiseModel),
    Adversary(&'a dyn NoiseAdversary),
}

pub enum DelaySource<'a> {
    Random(DelayModel),
    Adversary(&'a dyn DelayAdversary),
}

/// A channel use: what the receiver saw plus the realized noise and delay.
///
/// `noise` and `delay` are ground truth for diagnostics; decoders only get
/// `received`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub received: ReceivedSignal,
    pub noise: NoisePattern,
    pub delay: DelayPattern,
    pub budget_exceeded: bool,
}

impl Transmission {
    /// The post-noise packet values `Z`.
    pub fn noisy(&self, x: &BitSignal) -> Result<BitSignal> {
        apply_noise(x, &self.noise)
    }
}

fn check_sources(
    kind: ChannelKind,
    noise: &NoiseSource<'_>,
    delay: &DelaySource<'_>,
) -> Result<()> {
    let fail = |reason: String| {
        Err(Error::Adaptivity {
            channel: kind.to_string(),
            reason,
        })
    };
    match (kind.noise, noise) {
        (Behavior::Probabilistic, NoiseSource::Adversary(a)) => {
            return fail(format!(
                "noise stage is probabilistic but adversary {:?} was given",
                a.name()
            ))
        }
        (Behavior::Adversarial, NoiseSource::Random(_)) => {
            return fail("noise stage is adversarial but a random model was given".into())
        }
        (Behavior::Adversarial, NoiseSource::Adversary(a))
            if a.needs_delay() && !kind.noise_sees_delay() =>
        {
            return fail(format!(
                "noise adversary {:?} must act after the delay",
                a.name()
            ))
        }
        _ => {}
    }
    match (kind.delay, delay) {
        (Behavior::Probabilistic, DelaySource::Adversary(a)) => fail(format!(
            "delay stage is probabilistic but adversary {:?} was given",
            a.name()
        )),
        (Behavior::Adversarial, DelaySource::Random(_)) => {
            fail("delay stage is adversarial but a random model was given".into())
        }
        (Behavior::Adversarial, DelaySource::Adversary(a))
            if a.needs_noise() && !kind.delay_sees_noise() =>
        {
            fail(format!(
                "delay adversary {:?} must act after the noise",
                a.name()
            ))
        }
        _ => Ok(()),
    }
}

fn realize_noise(
    x: &BitSignal,
    source: &NoiseSource<'_>,
    seen: Option<&DelayPattern>,
    seed: u64,
) -> Result<NoiseOutcome> {
    match source {
        NoiseSource::Random(model) => {
            let mut rng = rng::stream(seed, Stream::Noise);
            Ok(model.sample(x.len(), &mut rng).into())
        }
        NoiseSource::Adversary(adv) => {
            let mut rng = rng::stream(seed, Stream::Adversary);
            let out = adv.corrupt(x, seen, &mut rng)?;
            check_len(x.len(), out.pattern.len())?;
            Ok(out)
        }
    }
}

fn realize_delay(
    x: &BitSignal,
    source: &DelaySource<'_>,
    seen: Option<&NoisePattern>,
    seed: u64,
) -> Result<DelayPattern> {
    match source {
        DelaySource::Random(model) => {
            let mut rng = rng::stream(seed, Stream::Delay);
            Ok(model.sample(x.len(), &mut rng))
        }
        DelaySource::Adversary(adv) => {
            let mut rng = rng::stream(seed, Stream::Adversary);
            let d = adv.schedule(x, seen, &mut rng)?;
            check_len(x.len(), d.len())?;
            Ok(d)
        }
    }
}

/// Sends `x` through the channel `kind`.
///
/// The first stage is realized without knowledge of the second. The second
/// stage, if adversarial, is handed the first stage's realization. Random
/// stages draw from their own stream of `seed`, so the delay realized for a
/// given seed does not depend on which noise source is plugged in.
pub fn transmit(
    x: &BitSignal,
    noise: &NoiseSource<'_>,
    delay: &DelaySource<'_>,
    kind: ChannelKind,
    seed: u64,
) -> Result<Transmission> {
    check_sources(kind, noise, delay)?;
    let (outcome, d) = match kind.first {
        Stage::Delay => {
            let d = realize_delay(x, delay, None, seed)?;
            let seen = (kind.noise == Behavior::Adversarial).then_some(&d);
            (realize_noise(x, noise, seen, seed)?, d)
        }
        Stage::Noise => {
            let outcome = realize_noise(x, noise, None, seed)?;
            let seen = (kind.delay == Behavior::Adversarial).then_some(&outcome.pattern);
            let d = realize_delay(x, delay, seen, seed)?;
            (outcome, d)
        }
    };
    let z = apply_noise(x, &outcome.pattern)?;
    let received = apply_delay(&z, &d)?;
    Ok(Transmission {
        received,
        noise: outcome.pattern,
        delay: d,
        budget_exceeded: outcome.budget_exceeded,
    })
}
