// SPDX-License-Identifier: Apache-2.0

#![doc = include_str!("../README.md")]

pub mod adversary;
pub mod channel;
pub mod codec;
pub mod epsilon;
pub mod error;
pub mod harness;
pub mod rng;
pub mod selftest;
pub mod stochastic;
pub mod svn;

pub use channel::{
    apply_delay, apply_noise, transmit, BitSignal, ChannelKind, DelayPattern, Discretization,
    NoisePattern, ReceivedSignal, Transmission,
};
pub use epsilon::Epsilon;
pub use error::{Error, Result};
pub use rng::SimRng;
