// SPDX-License-Identifier: Apache-2.0

use delaycap::stochastic::{
    queue_trace, sample_delay, sample_noise, DelayConvention, DelayModel, NoiseModel,
};
use delaycap::{DelayPattern, Discretization, Epsilon};

#[test]
fn geometric_delay_is_memoryless() {
    let model = DelayModel::new(20, DelayConvention::FromOne).unwrap();
    let d = sample_delay(model, 100_000, 3);
    let (a, b) = (10u64, 15u64);
    let past_a: Vec<u64> = d.delays().iter().copied().filter(|&v| v > a).collect();
    let cond = past_a.iter().filter(|&&v| v > a + b).count() as f64 / past_a.len() as f64;
    let uncond = d.delays().iter().filter(|&&v| v > b).count() as f64 / d.len() as f64;
    let p = model.survival(b);
    let se = (p * (1.0 - p) / past_a.len() as f64).sqrt();
    assert!((cond - p).abs() < 3.0 * se, "{cond} vs {p}");
    assert!((uncond - p).abs() < 3.0 * (p * (1.0 - p) / d.len() as f64).sqrt());
}

#[test]
fn conventions_shift_by_one() {
    let one = DelayModel::new(8, DelayConvention::FromOne).unwrap();
    let zero = DelayModel::new(8, DelayConvention::FromZero).unwrap();
    let a = sample_delay(one, 1000, 5);
    let b = sample_delay(zero, 1000, 5);
    assert!(a.delays().iter().all(|&v| v >= 1));
    for (x, y) in a.delays().iter().zip(b.delays()) {
        assert_eq!(*x, y + 1);
    }
}

#[test]
fn sampling_is_deterministic() {
    let model = DelayModel::new(64, DelayConvention::FromOne).unwrap();
    assert_eq!(sample_delay(model, 500, 1), sample_delay(model, 500, 1));
    let noise = NoiseModel::new(Epsilon::new(1, 8).unwrap());
    assert_eq!(sample_noise(noise, 500, 1), sample_noise(noise, 500, 1));
}

#[test]
fn two_packet_queue_trace() {
    // Packet 0 waits slots 0..3, packet 1 waits slot 1.
    let disc = Discretization::new(4, 1).unwrap();
    let trace = queue_trace(&DelayPattern::new(vec![3, 1, 0, 0]), &disc).unwrap();
    assert_eq!(trace.occupancy, vec![1, 2, 1, 0]);
    assert_eq!(trace.total_wait, 4);
    assert_eq!(trace.horizon_wait(), 4);
}

#[test]
fn occupancy_rises_by_at_most_one() {
    let disc = Discretization::new(32, 16).unwrap();
    let model = DelayModel::new(32, DelayConvention::FromOne).unwrap();
    for seed in 0..20 {
        let trace = queue_trace(&sample_delay(model, disc.slots(), seed), &disc).unwrap();
        assert!(trace.max_rise() <= 1);
    }
}
