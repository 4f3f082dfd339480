// SPDX-License-Identifier: Apache-2.0

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use delaycap::harness::{
    capacity_report, run_monte_carlo, sweep, write_sweep, CapacityConfig, Experiment,
    ExperimentConfig, Format, SweepConfig,
};
use delaycap::{selftest, Error};

const EXIT_CONFIG: u8 = 2;
const EXIT_SELFTEST: u8 = 3;

#[derive(Parser)]
#[command(name = "delaycap", version, about = "Simulate and analyse channels with delay and noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte-Carlo experiment described by one config.
    Simulate(Common),
    /// Run every cell of a grid config.
    Sweep(Common),
    /// Compute capacities for a list of channel specs.
    Capacity(Common),
    /// Run the built-in invariant checks.
    Selftest(Output),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Output {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Reads a config; any failure here counts as an invalid config.
fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))
}

fn selftest_code(checks: &[selftest::Check]) -> u8 {
    if checks.iter().all(|c| c.passed) {
        0
    } else {
        EXIT_SELFTEST
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Simulate(args) => {
            let mut config: ExperimentConfig = read_config(&args.config)?;
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            let exp = Experiment::new(config)?;
            let run = run_monte_carlo(&exp, args.jobs)?;
            let mut out = sink(&args.output.out)?;
            run.write(args.output.format.into(), &mut out)?;
            out.flush()?;
            let s = &run.summary;
            eprintln!(
                "trials={} failures={} pr_dec={:.4} wilson95=[{:.4}, {:.4}]",
                s.trials, s.failures, s.pr_dec, s.wilson_low, s.wilson_high
            );
        }
        Command::Sweep(args) => {
            let grid: SweepConfig = read_config(&args.config)?;
            let cells = sweep(&grid, args.seed, args.jobs);
            let mut out = sink(&args.output.out)?;
            write_sweep(&cells, args.output.format.into(), &mut out)?;
            out.flush()?;
            let failed = cells.iter().filter(|c| c.error.is_some()).count();
            eprintln!("cells={} failed={failed}", cells.len());
        }
        Command::Capacity(args) => {
            let config: CapacityConfig = read_config(&args.config)?;
            let report = capacity_report(&config, args.jobs)?;
            let mut out = sink(&args.output.out)?;
            report.write(args.output.format.into(), &mut out)?;
            out.flush()?;
            for e in &report.errors {
                eprintln!("spec {}: {}", e.index, e.error);
            }
        }
        Command::Selftest(output) => {
            let checks = selftest::run();
            let mut out = sink(&output.out)?;
            match Format::from(output.format) {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut out, &checks)?;
                    writeln!(out)?;
                }
                Format::Csv => {
                    writeln!(out, "check,passed,detail")?;
                    for c in &checks {
                        writeln!(out, "{},{},\"{}\"", c.name, c.passed, c.detail.replace('"', "\"\""))?;
                    }
                }
            }
            out.flush()?;
            return Ok(ExitCode::from(selftest_code(&checks)));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_check_maps_to_3() {
        let check = |passed| selftest::Check {
            name: "x",
            passed,
            detail: String::new(),
        };
        assert_eq!(selftest_code(&[check(true), check(true)]), 0);
        assert_eq!(selftest_code(&[check(true), check(false)]), EXIT_SELFTEST);
        assert_eq!(EXIT_SELFTEST, 3);
    }
}
