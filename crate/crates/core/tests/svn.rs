// SPDX-License-Identifier: Apache-2.0

use num_rational::Ratio;

use delaycap::svn::{
    blahut_arimoto, entropy_bound_checks, enumerate_inputs, fano_style_lower_bound, h2,
    mutual_information, svn_capacity, transition_row, InputSymbol, SvnChannelSpec,
    TransitionMatrix,
};
use delaycap::Epsilon;

fn eps(n: u64, d: u64) -> Epsilon {
    Epsilon::new(n, d).unwrap()
}

#[test]
fn admissible_pairs_match_a_full_scan() {
    let spec = SvnChannelSpec::new(4, eps(1, 4), 2, 2).unwrap();
    let mut want = Vec::new();
    for a in 0..=4u64 {
        for b in 0..=4 - a {
            // μ − 1/2 < a/4 + 3b/4 ≤ μ + 1/2, times 4: 6 < a + 3b ≤ 10.
            if 6 < a + 3 * b && a + 3 * b <= 10 {
                want.push(InputSymbol { a, b });
            }
        }
    }
    assert_eq!(enumerate_inputs(&spec).unwrap(), want);
}

#[test]
fn row_matches_outcome_enumeration() {
    // Y = U1 + U2 + V1, U ~ Bern(1/4), V ~ Bern(3/4).
    let e = Ratio::new(1i64, 4);
    let mut pmf = [Ratio::from_integer(0i64); 4];
    for outcome in 0..8u32 {
        let u1 = outcome & 1;
        let u2 = outcome >> 1 & 1;
        let v = outcome >> 2 & 1;
        let pu = |u| if u == 1 { e } else { Ratio::from_integer(1) - e };
        let pv = if v == 1 { Ratio::from_integer(1) - e } else { e };
        pmf[(u1 + u2 + v) as usize] += pu(u1) * pu(u2) * pv;
    }
    let row = transition_row(2, 1, eps(1, 4));
    for (y, p) in pmf.iter().enumerate() {
        let want = *p.numer() as f64 / *p.denom() as f64;
        assert!((row.get(y) - want).abs() < 1e-15, "y={y}");
    }
    assert!((row.sum() - 1.0).abs() < 1e-15);
}

#[test]
fn half_noise_rows_are_symmetric() {
    for (a, b) in [(0, 5), (3, 7), (10, 2)] {
        let r = transition_row(a, b, Epsilon::HALF);
        let s = transition_row(b, a, Epsilon::HALF);
        for y in 0..=(a + b) as usize {
            assert!((r.get(y) - s.get(y)).abs() < 1e-15);
        }
    }
}

#[test]
fn z_channel_capacity() {
    let p: f64 = 0.5;
    let w = TransitionMatrix::from_dense(vec![vec![1.0, 0.0], vec![p, 1.0 - p]]).unwrap();
    let r = blahut_arimoto(&w, 1e-10, 100_000);
    let want = (1.0 + (1.0 - p) * p.powf(p / (1.0 - p))).log2();
    assert!(r.converged);
    assert!((r.capacity_bits - want).abs() < 1e-8, "{} vs {want}", r.capacity_bits);
    let mi = mutual_information(&r.input_distribution, &w).unwrap();
    assert!((mi - r.capacity_bits).abs() < 1e-8);
}

#[test]
fn bsc_capacity() {
    for p in [0.01, 0.1, 0.25, 0.4] {
        let w = TransitionMatrix::from_dense(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]).unwrap();
        let r = blahut_arimoto(&w, 1e-9, 10_000);
        assert!((r.capacity_bits - (1.0 - h2(p))).abs() < 1e-8);
    }
}

#[test]
fn small_channel_capacity_and_bounds() {
    let spec = SvnChannelSpec::new(16, eps(1, 4), 4, 8).unwrap();
    let cap = svn_capacity(&spec, 1e-8, 10_000).unwrap();
    assert!(cap.report.converged);
    assert!(cap.report.capacity_bits > 0.0);
    assert!(cap.report.capacity_bits <= (cap.inputs as f64).log2());
    let bounds = entropy_bound_checks(&spec).unwrap();
    assert!(bounds.max_point_probability <= bounds.point_bound);
    assert!(bounds.point_bound_is_vacuous());
}

#[test]
fn decoding_error_bound_examples() {
    assert_eq!(fano_style_lower_bound(0.0, 8, 8).unwrap(), 0.0);
    assert!((fano_style_lower_bound(0.1, 4, 64).unwrap() - 0.8375).abs() < 1e-15);
    assert!(fano_style_lower_bound(1.5, 1, 1).is_err());
    assert!(fano_style_lower_bound(0.1, 0, 1).is_err());
}

#[test]
fn out_of_range_mu_is_rejected() {
    assert!(SvnChannelSpec::new(64, eps(1, 4), 4, 8).is_err());
    assert!(SvnChannelSpec::new(64, eps(1, 4), 4, 65).is_err());
}
