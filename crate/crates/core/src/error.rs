// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the channel, adversary, capacity and codec layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A quantity that must be an integer for the construction to be exact.
    #[error("{what} must be an integer, got {value}")]
    NonIntegral { what: &'static str, value: String },

    #[error("input alphabet is empty for M={m}, epsilon={epsilon}, mu={mu}")]
    EmptyChannel { m: u64, epsilon: String, mu: u64 },

    /// A numeric check of an analytic bound failed.
    #[error("bound violated: {0}")]
    BoundViolation(String),

    #[error("source does not match channel {channel}: {reason}")]
    Adaptivity { channel: String, reason: String },

    #[error("no code with minimum distance > {required} found for k={k}, n={n} after {attempts} attempts; try a larger n")]
    CodeConstruction {
        k: usize,
        n: usize,
        required: usize,
        attempts: usize,
    },

    #[error("interval [{start}, {end}) outside horizon of {slots} slots")]
    IntervalOutOfRange {
        start: usize,
        end: usize,
        slots: usize,
    },

    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}
