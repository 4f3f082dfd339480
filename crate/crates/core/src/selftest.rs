// SPDX-License-Identifier: Apache-2.0

//! A quick invariant suite, small enough to run from the command line.

use num_rational::Ratio;
use serde::Serialize;

use crate::adversary::{check_danp_invariants, check_dpna_invariants, danp_delay, dpna_noise};
use crate::adversary::{DanpParams, DpnaParams};
use crate::channel::{apply_delay, BitSignal, DelayPattern};
use crate::codec::{block_decode, block_encode, build_outer_code, CodecParams};
use crate::harness::{run_monte_carlo, Experiment, ExperimentConfig, Format};
use crate::rng;
use crate::stochastic::{
    departure_probability_bounds_exact, sample_delay, DelayConvention, DelayModel,
};
use crate::svn::{self, SvnChannelSpec, TransitionMatrix};
use crate::Epsilon;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> Check {
    match f() {
        Ok(detail) => Check {
            name,
            passed: true,
            detail,
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

fn delivery() -> Result<String, String> {
    let mut cases = 0;
    for slots in 0..=4usize {
        for z in 0..1u32 << slots {
            let bits = BitSignal::from_bools((0..slots).map(|j| z >> j & 1 == 1));
            for code in 0..(slots + 1).pow(slots as u32) {
                let mut c = code;
                let d: Vec<u64> = (0..slots)
                    .map(|_| {
                        let v = c % (slots + 1);
                        c /= slots + 1;
                        v as u64
                    })
                    .collect();
                let got =
                    apply_delay(&bits, &DelayPattern::new(d.clone())).map_err(|e| e.to_string())?;
                for (t, &y) in got.counts().iter().enumerate() {
                    let want = (0..slots)
                        .filter(|&j| j as u64 + d[j] == t as u64 && bits.bits()[j] == 1)
                        .count() as u64;
                    if y != want {
                        return Err(format!("slot {t} of {bits} with {d:?}"));
                    }
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} delivery maps"))
}

fn sandwich() -> Result<String, String> {
    for m in 1..=16u64 {
        for l1 in 0..=m {
            for l2 in 0..=m {
                let (lo, ex, hi) = departure_probability_bounds_exact(m, l1, l2);
                if !(lo <= ex && ex <= hi) {
                    return Err(format!("M={m} l1={l1} l2={l2}"));
                }
            }
        }
    }
    Ok("M ≤ 16 exact".into())
}

fn dpna() -> Result<String, String> {
    let eps = Epsilon::new(1, 5).map_err(|e| e.to_string())?;
    let params = DpnaParams::new(eps, 100, 2).map_err(|e| e.to_string())?;
    let model = DelayModel::new(100, DelayConvention::FromOne).map_err(|e| e.to_string())?;
    for trial in 0..200u64 {
        let seed = rng::trial_seed(11, trial);
        let x = BitSignal::from_bools((0..params.slots()).map(|j| (seed >> (j % 64)) & 1 == 1));
        let d = sample_delay(model, params.slots(), seed);
        let (noise, state) = dpna_noise(&x, &d, &params).map_err(|e| e.to_string())?;
        check_dpna_invariants(&x, &d, &noise, &state).map_err(|e| format!("trial {trial}: {e}"))?;
    }
    Ok("200 trials".into())
}

fn danp() -> Result<String, String> {
    let params = DanpParams::new(Epsilon::new(1, 4).unwrap(), 32, 2).map_err(|e| e.to_string())?;
    let slots = params.slots();
    for m in 0..1u64 << 6 {
        // Each message bit fills a sixth of the horizon, padded with zeros.
        let x = BitSignal::from_bools((0..slots).map(|j| {
            let b = j * 6 / slots;
            m >> b & 1 == 1
        }));
        let (d, state) = danp_delay(&x, &params).map_err(|e| e.to_string())?;
        check_danp_invariants(&d, &state).map_err(|e| format!("message {m}: {e}"))?;
    }
    Ok("64 messages".into())
}

fn capacity() -> Result<String, String> {
    let w = TransitionMatrix::from_dense(vec![vec![0.75, 0.25], vec![0.25, 0.75]])
        .map_err(|e| e.to_string())?;
    let bsc = svn::blahut_arimoto(&w, 1e-9, 10_000);
    let want = 1.0 - svn::h2(0.25);
    if (bsc.capacity_bits - want).abs() > 1e-6 {
        return Err(format!("BSC {} vs {want}", bsc.capacity_bits));
    }
    let spec =
        SvnChannelSpec::new(64, Epsilon::new(1, 4).unwrap(), 4, 16).map_err(|e| e.to_string())?;
    let r = svn::svn_capacity(&spec, 1e-6, 10_000).map_err(|e| e.to_string())?;
    if !r.report.converged {
        return Err(format!("gap {}", r.report.gap));
    }
    Ok(format!("C(M=64) = {:.6} bits", r.report.capacity_bits))
}

fn codec() -> Result<String, String> {
    let p = CodecParams::new(1024, 3, 16, Epsilon::ZERO).map_err(|e| e.to_string())?;
    let code = build_outer_code(3, 16, Ratio::new(5, 24), 1).map_err(|e| e.to_string())?;
    for m in 0..8 {
        let x = block_encode(m, &p, &code).map_err(|e| e.to_string())?;
        let y = apply_delay(&x, &DelayPattern::zero(x.len())).map_err(|e| e.to_string())?;
        let got = block_decode(&y, &p, &code).map_err(|e| e.to_string())?;
        if got != m {
            return Err(format!("message {m} decoded as {got}"));
        }
    }
    Ok("zero-delay round trip".into())
}

fn reproducible() -> Result<String, String> {
    let config = ExperimentConfig::from_json(
        r#"{"channel": "N^A|D^P", "epsilon": "1/128", "m": 1024, "n": 16, "k": 3,
            "trials": 8, "seed": 5, "noise_adversary": "burst"}"#,
    )
    .map_err(|e| e.to_string())?;
    let exp = Experiment::new(config).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for jobs in [1, 2] {
        let run = run_monte_carlo(&exp, jobs).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        run.write(Format::Csv, &mut buf)
            .map_err(|e| e.to_string())?;
        outputs.push(buf);
    }
    if outputs[0] != outputs[1] {
        return Err("CSV differs between 1 and 2 threads".into());
    }
    Ok(format!("{} bytes identical", outputs[0].len()))
}

/// Runs every check; none panics on failure.
pub fn run() -> Vec<Check> {
    vec![
        check("delivery_oracle", delivery),
        check("departure_sandwich", sandwich),
        check("dpna_invariants", dpna),
        check("danp_invariants", danp),
        check("capacity", capacity),
        check("codec_round_trip", codec),
        check("reproducibility", reproducible),
    ]
}
