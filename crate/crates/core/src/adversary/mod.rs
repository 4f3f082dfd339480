// SPDX-License-Identifier: Apache-2.0

//! Adversarial noise and delay strategies.

pub mod burst;
pub mod danp;
pub mod dpna;

pub use burst::{burst_noise, BlockLayout, BurstAdversary, NoFlips, RandomFlips, ZeroDelay};
pub use danp::{
    check_danp_invariants, danp_delay, signature_vector, DanpAdversary, DanpParams, DanpState,
};
pub use dpna::{
    check_dpna_invariants, dpna_canonicalize, dpna_noise, DpnaAdversary, DpnaParams, DpnaState,
};
