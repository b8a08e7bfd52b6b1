//! Command-line experiment runner.
//!
//! Subcommands: `run` executes one scenario and writes its metrics
//! directory, `validate` checks a configuration without running, and
//! `compare` evaluates emitted runs against a declared ordering.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 I/O error,
//! 1 any other runtime failure (4 for a failed comparison expectation).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mmfl_core::experiment::{
    check_orderings, compare_series, emit_metrics, load_series, run_scenario, ExpectedOrdering,
    ExperimentConfig, Scenario, ScenarioSeries,
};
use mmfl_core::Error;

#[derive(Parser)]
#[command(name = "mmfl", about = "Multi-model federated learning simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and emit its metrics directory.
    Run {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Scenario name: fl-single|mmfl-drl|mmfl-rnd with -attack|-noattack, or custom.
        #[arg(long)]
        scenario: String,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for the metrics files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a configuration and exit.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare emitted runs against an expected-ordering declaration.
    Compare {
        /// Run directories produced by `run`.
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        /// JSON list of expected orderings.
        #[arg(long)]
        expect: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Json(_) => 2,
        Error::Io(_) => 3,
        _ => 1,
    }
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run { config, scenario, seed, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let scenario = Scenario::parse(&scenario)?;
            cfg.validate()?;
            let record = run_scenario(&cfg, scenario)?;
            emit_metrics(&record, &out)?;
            let acc = record.mean_accuracy();
            println!(
                "{}: {} repetition(s), {} episode(s); final accuracy {:.4}; metrics in {}",
                record.scenario,
                record.reps.len(),
                record.config.episodes,
                acc.last().copied().unwrap_or(f64::NAN),
                out.display()
            );
            Ok(0)
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            cfg.validate()?;
            println!("configuration valid: {} devices, {} station(s), {} slave model(s)",
                cfg.devices, cfg.num_stations(), cfg.num_slaves());
            Ok(0)
        }
        Command::Compare { runs, expect } => {
            let series: Vec<ScenarioSeries> =
                runs.iter().map(|d| load_series(d)).collect::<Result<_, _>>()?;
            let expects: Vec<ExpectedOrdering> = match expect {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
                None => Vec::new(),
            };
            let summary = compare_series(&series, &expects)?;
            println!("scenarios: {}", summary.scenarios.join(", "));
            for (a, b, delta) in &summary.accuracy_deltas {
                let final_delta = delta.last().copied().unwrap_or(f64::NAN);
                println!("accuracy delta {a} - {b}: final {final_delta:+.4}");
            }
            let violations = check_orderings(&series, &expects)?;
            if violations.is_empty() {
                println!("orderings satisfied ({} checked)", expects.len());
                Ok(0)
            } else {
                for v in &violations {
                    eprintln!("violation: {v}");
                }
                Ok(4)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
