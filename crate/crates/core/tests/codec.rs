// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use delaycap::codec::{
    block_decode, block_encode, build_outer_code, default_tau, demodulate, outer_decode,
    CodecParams, OuterCode,
};
use delaycap::{apply_delay, DelayPattern, Epsilon};

fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[test]
fn nearest_codeword_decoding_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 4..=12usize {
        for k in 1..=3usize {
            let rows: Vec<u64> = (0..k).map(|_| rng.random::<u64>() & ((1 << n) - 1)).collect();
            let code = OuterCode::from_generator(n, &rows).unwrap();
            let words: Vec<Vec<u8>> = (0..1u64 << k).map(|m| code.encode_bits(m)).collect();
            for r in 0..1u32 << n {
                let s: Vec<u8> = (0..n).map(|j| (r >> j & 1) as u8).collect();
                // First message at the smallest distance.
                let mut best = 0;
                for m in 1..words.len() {
                    if hamming(&words[m], &s) < hamming(&words[best], &s) {
                        best = m;
                    }
                }
                assert_eq!(outer_decode(&code, &s).unwrap(), best as u64, "n={n} k={k}");
            }
        }
    }
}

#[test]
fn minimum_distance_matches_brute_force() {
    let code = build_outer_code(3, 12, default_tau(), 5).unwrap();
    let words: Vec<Vec<u8>> = (0..8).map(|m| code.encode_bits(m)).collect();
    let mut dmin = usize::MAX;
    for i in 0..8 {
        for j in i + 1..8 {
            dmin = dmin.min(hamming(&words[i], &words[j]));
        }
    }
    assert_eq!(code.dmin() as usize, dmin);
    assert!(dmin > 5, "dmin {dmin} must exceed 2·(5/24)·12 = 5");
}

#[test]
fn construction_succeeds_for_the_calibrated_code() {
    let built = (0..100u64)
        .filter(|&seed| build_outer_code(4, 48, default_tau(), seed).is_ok())
        .count();
    assert!(built >= 99, "{built}/100");
}

#[test]
fn impossible_distance_is_reported() {
    // [10, 4] codes have dmin ≤ 4 by the Griesmer bound, short of > 4.
    assert!(build_outer_code(4, 10, default_tau(), 0).is_err());
}

#[test]
fn zero_delay_round_trip() {
    let params = CodecParams::new(1024, 4, 32, Epsilon::ZERO).unwrap();
    let code = build_outer_code(4, 32, default_tau(), 9).unwrap();
    for m in 0..16 {
        let x = block_encode(m, &params, &code).unwrap();
        assert_eq!(x.len(), params.slots());
        let y = apply_delay(&x, &DelayPattern::zero(x.len())).unwrap();
        assert_eq!(demodulate(&y, &params).unwrap(), code.encode_bits(m));
        assert_eq!(block_decode(&y, &params, &code).unwrap(), m);
    }
}

#[test]
fn parameter_violations_are_collected() {
    match CodecParams::new(1024, 20, 100, Epsilon::ZERO) {
        Err(delaycap::Error::Config(list)) => assert_eq!(list.len(), 2, "{list:?}"),
        other => panic!("expected config errors, got {other:?}"),
    }
}
