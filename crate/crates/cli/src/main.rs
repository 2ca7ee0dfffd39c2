use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand};

use amcmc::harness::{
    fit_rate, run_exact_op, run_experiment, run_suite, ExactFile, ExperimentConfig, TvSeries, DEFAULT_SEED,
    EXACT_OPS, SUITES,
};

#[derive(Parser)]
#[command(name = "amcmc", version, about = "Adaptive MCMC experiments and exact checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replicated sampling run from a TOML config; writes tv.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Exact computation on a finite model file; prints JSON.
    Exact {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_parser = PossibleValuesParser::new(EXACT_OPS.iter().copied()))]
        op: String,
    },
    /// Log-log rate fit of a TV series CSV (columns n, tv, stderr).
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Checkpoint window as `lo,hi`.
        #[arg(long, value_parser = parse_window)]
        window: (usize, usize),
        /// Replica count behind the series; with --states sets the noise floor sqrt(S/R).
        #[arg(long, requires = "states")]
        replicas: Option<usize>,
        #[arg(long, requires = "replicas")]
        states: Option<usize>,
    },
    /// Run a bundle of acceptance criteria; exits nonzero if any fails.
    Suite {
        #[arg(value_parser = PossibleValuesParser::new(SUITES.iter().map(|s| s.0)))]
        name: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Directory for verdicts.json and series CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_window(text: &str) -> std::result::Result<(usize, usize), String> {
    let (lo, hi) = text.split_once(',').ok_or("expected `lo,hi`")?;
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("`{s}`: {e}"));
    Ok((parse(lo)?, parse(hi)?))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config } => {
            let config = ExperimentConfig::load(&config)?;
            let summary = run_experiment(&config)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(true)
        }
        Command::Exact { model, op } => {
            let file = ExactFile::load(&model)?;
            let value = run_exact_op(&file, &op)?;
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(true)
        }
        Command::Fit {
            input,
            window,
            replicas,
            states,
        } => {
            let floor = match (replicas, states) {
                (Some(0), _) => bail!("--replicas must be at least 1"),
                (Some(r), Some(s)) => (s as f64 / r as f64).sqrt(),
                _ => 0.0,
            };
            let series = TvSeries::read_csv(&input, floor)?;
            let fit = fit_rate(&series, window).with_context(|| format!("fitting {}", input.display()))?;
            println!("{}", serde_json::to_string_pretty(&fit)?);
            Ok(true)
        }
        Command::Suite { name, seed, out } => {
            let report = run_suite(&name, seed, out.as_deref())?;
            for o in &report.outcomes {
                println!("{}", o.line());
            }
            println!("suite {name}: {}", if report.passed { "PASS" } else { "FAIL" });
            Ok(report.passed)
        }
    }
}
