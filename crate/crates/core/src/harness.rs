// SPDX-License-Identifier: Apache-2.0

//! Experiment runner: JSON configs, Monte-Carlo trials, sweeps and capacity
//! reports, with CSV and JSON writers.
//!
//! Every trial derives its randomness from `(seed, trial index)` alone and
//! results are merged in trial order, so output bytes do not depend on the
//! number of worker threads.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::adversary::{
    BurstAdversary, DanpAdversary, DanpParams, DpnaAdversary, DpnaParams, NoFlips, RandomFlips,
    ZeroDelay,
};
use crate::channel::{
    transmit, Behavior, ChannelKind, DelayAdversary, DelaySource, NoiseAdversary, NoiseSource,
    Stage,
};
use crate::codec::{
    block_encode, build_outer_code, classify_blocks, demodulate, outer_decode, BlockDiagnostics,
    CodecParams, OuterCode,
};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::stochastic::{DelayConvention, DelayModel, NoiseModel};
use crate::svn::{self, CapacityRecord, SvnChannelSpec, TransitionMatrix};
use crate::Epsilon;

pub const SCHEMA_VERSION: u32 = 1;

/// Noise strategies selectable for an adversarial noise stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseAdversaryKind {
    /// `⌊ε·slots⌋` uniformly placed flips.
    #[default]
    Random,
    /// Whole budget spent corrupting as many blocks as possible.
    Burst,
    /// Noise after delay that collapses each interval to its rounded count.
    Dpna,
    None,
}

/// Delay strategies selectable for an adversarial delay stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayAdversaryKind {
    /// Signature-quantizing release schedule.
    #[default]
    Danp,
    Zero,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}
fn default_k() -> usize {
    4
}
fn default_trials() -> u64 {
    100
}
fn default_heavy_c() -> f64 {
    1.0
}
fn default_deviation() -> f64 {
    0.52
}
fn default_tau() -> String {
    "5/24".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub channel: ChannelKind,
    pub epsilon: Epsilon,
    #[serde(alias = "M")]
    pub m: u64,
    /// Horizon in time units; `n` is derived from it when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Outer code length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub delay_convention: DelayConvention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_adversary: Option<NoiseAdversaryKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_adversary: Option<DelayAdversaryKind>,
    /// E1 fires when more than `heavy_c·M` ones are queued.
    #[serde(default = "default_heavy_c")]
    pub heavy_c: f64,
    #[serde(default = "default_deviation")]
    pub deviation_exponent: f64,
    /// Error fraction the outer code must correct, as a fraction string.
    #[serde(default = "default_tau")]
    pub tau: String,
    /// Seed for the outer code; defaults to `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code_seed: Option<u64>,
    /// Record wall time per trial. Off by default so output is reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(vec![e.to_string()]))
    }
}

enum NoiseImpl {
    Random(NoiseModel),
    Burst(BurstAdversary),
    Flips(RandomFlips),
    Dpna(DpnaAdversary),
    None(NoFlips),
}

impl NoiseImpl {
    fn source(&self) -> NoiseSource<'_> {
        let adv: &dyn NoiseAdversary = match self {
            NoiseImpl::Random(m) => return NoiseSource::Random(*m),
            NoiseImpl::Burst(a) => a,
            NoiseImpl::Flips(a) => a,
            NoiseImpl::Dpna(a) => a,
            NoiseImpl::None(a) => a,
        };
        NoiseSource::Adversary(adv)
    }
}

enum DelayImpl {
    Random(DelayModel),
    Danp(DanpAdversary),
    Zero(ZeroDelay),
}

impl DelayImpl {
    fn source(&self) -> DelaySource<'_> {
        let adv: &dyn DelayAdversary = match self {
            DelayImpl::Random(m) => return DelaySource::Random(*m),
            DelayImpl::Danp(a) => a,
            DelayImpl::Zero(a) => a,
        };
        DelaySource::Adversary(adv)
    }
}

/// Rounded constants and derived quantities, echoed into every output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Echo {
    pub channel: String,
    pub delay_convention: &'static str,
    #[serde(rename = "M")]
    pub m: u64,
    pub epsilon: Epsilon,
    #[serde(rename = "T")]
    pub t: u64,
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub half_len: u64,
    #[serde(rename = "L_tail")]
    pub tail_len: u64,
    pub threshold_scale: u64,
    pub deviation_threshold: f64,
    pub corruption_limit: u64,
    pub dmin: u32,
    pub noise: String,
    pub delay: String,
    pub proof_regime: bool,
    pub seed: u64,
    pub trials: u64,
}

impl Echo {
    fn comment_line(&self) -> String {
        format!(
            "# channel={} noise={} delay={} delay_convention={} M={} epsilon={} T={} k={} N={} L={} L_tail={} threshold={} deviation={:.3} corruption_limit={} dmin={} proof_regime={} seed={}",
            self.channel,
            self.noise,
            self.delay,
            self.delay_convention,
            self.m,
            self.epsilon,
            self.t,
            self.k,
            self.n,
            self.half_len,
            self.tail_len,
            self.threshold_scale,
            self.deviation_threshold,
            self.corruption_limit,
            self.dmin,
            self.proof_regime,
            self.seed,
        )
    }
}

/// A validated config with its code and channel stages built.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub params: CodecParams,
    pub code: OuterCode,
    /// Reference model for conditional means in the diagnostics.
    pub delay_model: DelayModel,
    noise: NoiseImpl,
    delay: DelayImpl,
}

fn parse_ratio(s: &str) -> Option<Ratio<u64>> {
    match s.split_once('/') {
        Some((n, d)) => {
            let (n, d) = (n.trim().parse().ok()?, d.trim().parse::<u64>().ok()?);
            (d != 0).then(|| Ratio::new(n, d))
        }
        None => s.trim().parse().ok().map(Ratio::from_integer),
    }
}

impl Experiment {
    /// Checks every constraint and reports all violations at once.
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let mut errors = Vec::new();
        let c = &config;
        if c.schema_version != SCHEMA_VERSION {
            errors.push(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                c.schema_version
            ));
        }
        if c.trials == 0 {
            errors.push("trials must be at least 1".into());
        }
        if !(c.heavy_c > 0.0) {
            errors.push(format!("heavy_c = {} must be positive", c.heavy_c));
        }
        if !(c.deviation_exponent > 0.5 && c.deviation_exponent < 0.55) {
            errors.push(format!(
                "deviation_exponent = {} must lie strictly between 1/2 and 11/20",
                c.deviation_exponent
            ));
        }
        let tau = parse_ratio(&c.tau);
        match tau {
            Some(t) if t > Ratio::from_integer(0) && t < Ratio::new(1, 4) => {}
            _ => errors.push(format!("tau = {:?} must be a fraction in (0, 1/4)", c.tau)),
        }

        let half_len = crate::codec::round_power(c.m.max(1), 0.8);
        let n = match (c.n, c.t) {
            (Some(n), None) => Some(n),
            (None, Some(t)) => {
                let total = c.m * t;
                if half_len == 0 || total % (2 * half_len) != 0 {
                    errors.push(format!(
                        "M·T = {total} is not a multiple of 2L = {}",
                        2 * half_len
                    ));
                    None
                } else {
                    Some((total / (2 * half_len)) as usize)
                }
            }
            (Some(_), Some(_)) => {
                errors.push("give either t or n, not both".into());
                None
            }
            (None, None) => {
                errors.push("one of t or n is required".into());
                None
            }
        };

        let params = n.and_then(|n| match CodecParams::new(c.m, c.k, n, c.epsilon) {
            Ok(p) => Some(p.with_deviation_exponent(c.deviation_exponent)),
            Err(Error::Config(v)) => {
                errors.extend(v);
                None
            }
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        });

        let delay_model = match DelayModel::new(c.m, c.delay_convention) {
            Ok(d) => Some(d),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        };

        let kind = c.channel;
        let mut noise = None;
        let mut delay = None;
        if let Some(p) = &params {
            noise = match (kind.noise, c.noise_adversary) {
                (Behavior::Probabilistic, None) => {
                    Some(NoiseImpl::Random(NoiseModel::new(c.epsilon)))
                }
                (Behavior::Probabilistic, Some(_)) => {
                    errors.push(format!("noise_adversary given but {kind} has random noise"));
                    None
                }
                (Behavior::Adversarial, choice) => match choice.unwrap_or_default() {
                    NoiseAdversaryKind::Random => {
                        Some(NoiseImpl::Flips(RandomFlips { epsilon: c.epsilon }))
                    }
                    NoiseAdversaryKind::Burst => Some(NoiseImpl::Burst(BurstAdversary {
                        epsilon: c.epsilon,
                        layout: p.layout(),
                    })),
                    NoiseAdversaryKind::None => Some(NoiseImpl::None(NoFlips)),
                    NoiseAdversaryKind::Dpna => {
                        if kind.first != Stage::Delay {
                            errors.push(format!(
                                "dpna needs the delay first, but {kind} realizes noise first"
                            ));
                        }
                        match DpnaParams::new(c.epsilon, c.m, p.t()) {
                            Ok(params) => Some(NoiseImpl::Dpna(DpnaAdversary { params })),
                            Err(e) => {
                                errors.push(format!("dpna: {e}"));
                                None
                            }
                        }
                    }
                },
            };
            delay = match (kind.delay, c.delay_adversary) {
                (Behavior::Probabilistic, None) => delay_model.map(DelayImpl::Random),
                (Behavior::Probabilistic, Some(_)) => {
                    errors.push(format!("delay_adversary given but {kind} has random delay"));
                    None
                }
                (Behavior::Adversarial, choice) => match choice.unwrap_or_default() {
                    DelayAdversaryKind::Zero => Some(DelayImpl::Zero(ZeroDelay)),
                    DelayAdversaryKind::Danp => match DanpParams::new(c.epsilon, c.m, p.t()) {
                        Ok(params) => Some(DelayImpl::Danp(DanpAdversary { params })),
                        Err(e) => {
                            errors.push(format!("danp: {e}"));
                            None
                        }
                    },
                },
            };
        }

        let code = match (&params, tau) {
            (Some(p), Some(tau)) if errors.is_empty() => {
                match build_outer_code(p.k, p.n, tau, c.code_seed.unwrap_or(c.seed)) {
                    Ok(code) => Some(code),
                    Err(e) => {
                        errors.push(e.to_string());
                        None
                    }
                }
            }
            _ => None,
        };

        if !errors.is_empty() {
            return Err(Error::Config(errors));
        }
        Ok(Experiment {
            params: params.expect("checked"),
            code: code.expect("checked"),
            delay_model: delay_model.expect("checked"),
            noise: noise.expect("checked"),
            delay: delay.expect("checked"),
            config,
        })
    }

    pub fn echo(&self) -> Echo {
        let p = &self.params;
        let noise = match &self.noise {
            NoiseImpl::Random(_) => "bernoulli".to_string(),
            NoiseImpl::Burst(a) => a.name().into(),
            NoiseImpl::Flips(a) => a.name().into(),
            NoiseImpl::Dpna(a) => a.name().into(),
            NoiseImpl::None(a) => a.name().into(),
        };
        let delay = match &self.delay {
            DelayImpl::Random(_) => "geometric".to_string(),
            DelayImpl::Danp(a) => a.name().into(),
            DelayImpl::Zero(a) => a.name().into(),
        };
        Echo {
            channel: self.config.channel.to_string(),
            delay_convention: self.config.delay_convention.as_str(),
            m: p.m,
            epsilon: p.epsilon,
            t: p.t(),
            k: p.k,
            n: p.n,
            half_len: p.half_len,
            tail_len: p.tail_len,
            threshold_scale: p.threshold_scale,
            deviation_threshold: p.deviation_threshold(),
            corruption_limit: p.corruption_limit(),
            dmin: self.code.dmin(),
            noise,
            delay,
            proof_regime: p.in_proof_regime(),
            seed: self.config.seed,
            trials: self.config.trials,
        }
    }

    /// One channel use with a uniformly drawn message.
    pub fn run_trial(&self, trial: u64) -> Result<(TrialRecord, BlockDiagnostics)> {
        let start = Instant::now();
        let seed = rng::trial_seed(self.config.seed, trial);
        let message = rng::stream(seed, Stream::Message).random_range(0..1u64 << self.params.k);
        let x = block_encode(message, &self.params, &self.code)?;
        let tx = transmit(
            &x,
            &self.noise.source(),
            &self.delay.source(),
            self.config.channel,
            seed,
        )?;
        let w = demodulate(&tx.received, &self.params)?;
        let decoded = outer_decode(&self.code, &w)?;
        let sent = self.code.encode_bits(message);
        let diag = classify_blocks(
            &x,
            &tx,
            &self.params,
            self.config.heavy_c,
            matches!(self.delay, DelayImpl::Random(_)).then_some(&self.delay_model),
            &sent,
            &w,
        )?;
        let clean: Vec<usize> = (0..self.params.n).filter(|&i| diag.clean(i)).collect();
        let clean_errors = clean.iter().filter(|&&i| w[i] != sent[i]).count() as u64;
        let ms = if self.config.timing {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        let record = TrialRecord {
            trial,
            seed,
            ok: decoded == message,
            w_agree: diag.w_agreement,
            budget_exceeded: tx.budget_exceeded,
            n_heavy: BlockDiagnostics::count(&diag.heavy) as u64,
            n_corrupt: BlockDiagnostics::count(&diag.corrupted) as u64,
            n_deviant: BlockDiagnostics::count(&diag.deviant) as u64,
            ms,
            clean_blocks: clean.len() as u64,
            clean_errors,
        };
        Ok((record, diag))
    }
}

/// One row of the per-trial table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub ok: bool,
    pub w_agree: f64,
    pub budget_exceeded: bool,
    pub n_heavy: u64,
    pub n_corrupt: u64,
    pub n_deviant: u64,
    pub ms: f64,
    /// Blocks with none of E1, E2, E3.
    #[serde(skip)]
    pub clean_blocks: u64,
    /// Clean blocks demodulated wrongly.
    #[serde(skip)]
    pub clean_errors: u64,
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Exact at the boundary; floating point can miss by an ulp.
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0).min(p)
    };
    let hi = if successes as f64 == n {
        1.0
    } else {
        (centre + half).min(1.0).max(p)
    };
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultsSummary {
    pub trials: u64,
    pub failures: u64,
    /// Fraction of trials decoded wrongly.
    pub pr_dec: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub budget_exceeded_rate: f64,
    /// Fractions of all blocks.
    pub heavy_rate: f64,
    pub corrupt_rate: f64,
    pub deviant_rate: f64,
    pub mean_w_agree: f64,
    /// Trials with `w` agreeing on at least 19/24 of blocks.
    pub agreement_rate: f64,
    pub max_corrupt_fraction: f64,
    /// Demodulation error rate over blocks with no bad event.
    pub conditional_error_rate: Option<f64>,
}

impl ResultsSummary {
    pub fn from_records(records: &[TrialRecord], blocks: usize) -> Self {
        let n = records.len() as u64;
        let frac = |k: u64, of: u64| if of == 0 { 0.0 } else { k as f64 / of as f64 };
        let failures = records.iter().filter(|r| !r.ok).count() as u64;
        let total_blocks = n * blocks as u64;
        let sum = |f: fn(&TrialRecord) -> u64| records.iter().map(f).sum::<u64>();
        let (wilson_low, wilson_high) = wilson_interval(failures, n);
        let clean = sum(|r| r.clean_blocks);
        // 24·agree ≥ 19·N, decided on the integer count.
        let agreeing = records
            .iter()
            .filter(|r| 24.0 * (r.w_agree * blocks as f64).round() >= 19.0 * blocks as f64)
            .count() as u64;
        ResultsSummary {
            trials: n,
            failures,
            pr_dec: frac(failures, n),
            wilson_low,
            wilson_high,
            budget_exceeded_rate: frac(
                records.iter().filter(|r| r.budget_exceeded).count() as u64,
                n,
            ),
            heavy_rate: frac(sum(|r| r.n_heavy), total_blocks),
            corrupt_rate: frac(sum(|r| r.n_corrupt), total_blocks),
            deviant_rate: frac(sum(|r| r.n_deviant), total_blocks),
            mean_w_agree: if n == 0 {
                0.0
            } else {
                records.iter().map(|r| r.w_agree).sum::<f64>() / n as f64
            },
            agreement_rate: frac(agreeing, n),
            max_corrupt_fraction: records
                .iter()
                .map(|r| frac(r.n_corrupt, blocks as u64))
                .fold(0.0, f64::max),
            conditional_error_rate: (clean > 0).then(|| frac(sum(|r| r.clean_errors), clean)),
        }
    }
}

/// Records of one run, in trial order.
#[derive(Clone, Debug, Serialize)]
pub struct RunOutput {
    pub echo: Echo,
    pub summary: ResultsSummary,
    pub trials: Vec<TrialRecord>,
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(pool.install(f))
}

/// Runs every trial of `exp` on `jobs` threads (0 picks a default).
pub fn run_monte_carlo(exp: &Experiment, jobs: usize) -> Result<RunOutput> {
    let trials = with_pool(jobs, || {
        (0..exp.config.trials)
            .into_par_iter()
            .map(|t| exp.run_trial(t).map(|(r, _)| r))
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(RunOutput {
        echo: exp.echo(),
        summary: ResultsSummary::from_records(&trials, exp.params.n),
        trials,
    })
}

/// Output encodings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl RunOutput {
    pub fn write(&self, format: Format, mut out: impl Write) -> Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, self)?;
                writeln!(out)?;
            }
            Format::Csv => {
                writeln!(out, "{}", self.echo.comment_line())?;
                let mut w = csv::Writer::from_writer(out);
                for r in &self.trials {
                    w.serialize(r).map_err(csv_error)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// A base config plus axes; cells are the Cartesian product of the axes,
/// keys in sorted order, the last key varying fastest.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: Value,
    #[serde(default)]
    pub axes: BTreeMap<String, Vec<Value>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepCell {
    pub cell: usize,
    pub overrides: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub echo: Option<Echo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<ResultsSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepConfig {
    pub fn cells(&self) -> Vec<BTreeMap<String, Value>> {
        let mut cells = vec![BTreeMap::new()];
        for (key, values) in &self.axes {
            cells = cells
                .into_iter()
                .flat_map(|cell| {
                    values.iter().map(move |v| {
                        let mut c = cell.clone();
                        c.insert(key.clone(), v.clone());
                        c
                    })
                })
                .collect();
        }
        cells
    }
}

/// Runs every cell; a failing cell is reported and the sweep continues.
/// `seed`, if given, overrides the base seed of every cell.
pub fn sweep(grid: &SweepConfig, seed: Option<u64>, jobs: usize) -> Vec<SweepCell> {
    grid.cells()
        .into_iter()
        .enumerate()
        .map(|(cell, overrides)| {
            let outcome = (|| {
                let mut value = grid.base.clone();
                let obj = value
                    .as_object_mut()
                    .ok_or_else(|| Error::Config(vec!["sweep base must be an object".into()]))?;
                for (k, v) in &overrides {
                    obj.insert(k.clone(), v.clone());
                }
                if let Some(s) = seed {
                    obj.insert("seed".into(), s.into());
                }
                let config: ExperimentConfig = serde_json::from_value(value)
                    .map_err(|e| Error::Config(vec![e.to_string()]))?;
                run_monte_carlo(&Experiment::new(config)?, jobs)
            })();
            match outcome {
                Ok(run) => SweepCell {
                    cell,
                    overrides,
                    echo: Some(run.echo),
                    summary: Some(run.summary),
                    error: None,
                },
                Err(e) => SweepCell {
                    cell,
                    overrides,
                    echo: None,
                    summary: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

#[derive(Serialize)]
struct SweepRow {
    cell: usize,
    overrides: String,
    trials: Option<u64>,
    pr_dec: Option<f64>,
    wilson_low: Option<f64>,
    wilson_high: Option<f64>,
    mean_w_agree: Option<f64>,
    conditional_error_rate: Option<f64>,
    error: Option<String>,
}

pub fn write_sweep(cells: &[SweepCell], format: Format, mut out: impl Write) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, cells)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if cells.is_empty() {
                w.write_record([
                    "cell",
                    "overrides",
                    "trials",
                    "pr_dec",
                    "wilson_low",
                    "wilson_high",
                    "mean_w_agree",
                    "conditional_error_rate",
                    "error",
                ])
                .map_err(csv_error)?;
            }
            for c in cells {
                let s = c.summary.as_ref();
                w.serialize(SweepRow {
                    cell: c.cell,
                    overrides: serde_json::to_string(&c.overrides)?,
                    trials: s.map(|s| s.trials),
                    pr_dec: s.map(|s| s.pr_dec),
                    wilson_low: s.map(|s| s.wilson_low),
                    wilson_high: s.map(|s| s.wilson_high),
                    mean_w_agree: s.map(|s| s.mean_w_agree),
                    conditional_error_rate: s.and_then(|s| s.conditional_error_rate),
                    error: c.error.clone(),
                })
                .map_err(csv_error)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn default_tol() -> f64 {
    svn::DEFAULT_TOL
}
fn default_max_iter() -> usize {
    svn::DEFAULT_MAX_ITER
}

/// Specs for a capacity report, plus optional binary-symmetric sanity rows.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    #[serde(default)]
    pub specs: Vec<SvnChannelSpec>,
    #[serde(default)]
    pub bsc: Vec<Epsilon>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExhibitRow {
    #[serde(rename = "M")]
    pub m: u64,
    pub epsilon: Epsilon,
    pub c: u64,
    pub mu: u64,
    pub capacity_bits: f64,
    /// Change from the previous `M` with the same `ε`, `c` and `μ/M`.
    pub diff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BscRow {
    pub epsilon: Epsilon,
    pub capacity_bits: f64,
    pub closed_form: f64,
    pub gap: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecError {
    pub index: usize,
    pub spec: SvnChannelSpec,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CapacityOutput {
    pub records: Vec<CapacityRecord>,
    pub exhibit: Vec<ExhibitRow>,
    pub bsc: Vec<BscRow>,
    pub errors: Vec<SpecError>,
}

/// Capacity of every spec; a failing spec is reported and skipped.
pub fn capacity_report(config: &CapacityConfig, jobs: usize) -> Result<CapacityOutput> {
    let results = with_pool(jobs, || {
        config
            .specs
            .par_iter()
            .map(|s| svn::svn_capacity(s, config.tol, config.max_iter))
            .collect::<Vec<_>>()
    })?;
    let mut out = CapacityOutput::default();
    for (index, (spec, r)) in config.specs.iter().zip(results).enumerate() {
        match r {
            Ok(c) => out.records.push(c.record()),
            Err(e) => out.errors.push(SpecError {
                index,
                spec: *spec,
                error: e.to_string(),
            }),
        }
    }
    let mut groups: BTreeMap<(Epsilon, u64, Ratio<u64>), Vec<&CapacityRecord>> = BTreeMap::new();
    for r in &out.records {
        groups
            .entry((r.epsilon, r.c, Ratio::new(r.mu, r.m)))
            .or_default()
            .push(r);
    }
    for rows in groups.values_mut() {
        rows.sort_by_key(|r| r.m);
        let mut prev: Option<f64> = None;
        for r in rows.iter() {
            out.exhibit.push(ExhibitRow {
                m: r.m,
                epsilon: r.epsilon,
                c: r.c,
                mu: r.mu,
                capacity_bits: r.capacity_bits,
                diff: prev.map(|p| r.capacity_bits - p),
            });
            prev = Some(r.capacity_bits);
        }
    }
    for &e in &config.bsc {
        let p = e.as_f64();
        let w = TransitionMatrix::from_dense(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])?;
        let r = svn::blahut_arimoto(&w, config.tol, config.max_iter);
        out.bsc.push(BscRow {
            epsilon: e,
            capacity_bits: r.capacity_bits,
            closed_form: 1.0 - svn::h2(p),
            gap: r.gap,
            iterations: r.iterations,
        });
    }
    Ok(out)
}

impl CapacityOutput {
    pub fn write(&self, format: Format, mut out: impl Write) -> Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, self)?;
                writeln!(out)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                if self.records.is_empty() {
                    w.write_record([
                        "M",
                        "epsilon",
                        "c",
                        "mu",
                        "capacity_bits",
                        "gap",
                        "iterations",
                    ])
                    .map_err(csv_error)?;
                }
                for r in &self.records {
                    w.serialize(r).map_err(csv_error)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    #[test]
    fn validation_reports_every_violation() {
        let c = config(
            r#"{"channel": "D^P|N^A", "epsilon": "1/5", "m": 1000, "n": 70, "trials": 0,
                "noise_adversary": "dpna", "deviation_exponent": 0.6}"#,
        );
        let Err(Error::Config(v)) = Experiment::new(c) else {
            panic!()
        };
        assert!(v.len() >= 3, "{v:?}");
    }

    #[test]
    fn wilson_contains_point() {
        for (k, n) in [(0, 10), (3, 10), (10, 10), (50, 200)] {
            let (lo, hi) = wilson_interval(k, n);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi && (0.0..=1.0).contains(&lo) && hi <= 1.0);
        }
    }

    #[test]
    fn noiseless_zero_delay_never_fails() {
        let c = config(
            r#"{"channel": "N^A|D^A", "epsilon": 0, "m": 1024, "n": 16, "k": 3, "trials": 20,
                "noise_adversary": "none", "delay_adversary": "zero"}"#,
        );
        let run = run_monte_carlo(&Experiment::new(c).unwrap(), 1).unwrap();
        assert_eq!(run.summary.failures, 0);
        assert_eq!(run.summary.pr_dec, 0.0);
    }

    #[test]
    fn sweep_cells_in_key_order() {
        let g: SweepConfig =
            serde_json::from_str(r#"{"base": {}, "axes": {"m": [1, 2], "epsilon": ["0", "1/4"]}}"#)
                .unwrap();
        let cells = g.cells();
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[1]["epsilon"], "0");
        assert_eq!(cells[1]["m"], 2);
        let empty: SweepConfig =
            serde_json::from_str(r#"{"base": {}, "axes": {"m": []}}"#).unwrap();
        assert!(empty.cells().is_empty());
    }
}
