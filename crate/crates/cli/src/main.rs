//! `devlab`: run one configured deviation experiment, or list them.

mod config;
mod experiments;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{Experiment, ExperimentConfig, Overrides};
use experiments::RunError;
use output::{write_csv, write_summary, Summary};

#[derive(Parser)]
#[command(name = "devlab", version, about = "Large and moderate deviation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<u64>,
        /// Directory for results.csv and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the available experiments.
    List,
}

const EXIT_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_REGIME: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match cli.command {
        Command::List => {
            list();
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            seed,
            reps,
            out,
        } => {
            let overrides = Overrides {
                seed,
                reps,
                output_dir: out,
            };
            match run(&config, &overrides) {
                Ok(code) => code,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_FAILED)
                }
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("DEVLAB_THREADS") {
        let threads: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .with_context(|| format!("DEVLAB_THREADS={v:?} is not a positive integer"))?;
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn list() {
    for e in Experiment::ALL {
        let (result, regime) = e.describe();
        println!("{} → {result} [{regime}]", e.name());
    }
}

fn run(path: &PathBuf, overrides: &Overrides) -> Result<ExitCode> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = match ExperimentConfig::parse(&src, overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}:{e}", path.display());
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };
    let start = Instant::now();
    let outcome = match experiments::run(&cfg) {
        Ok(o) => o,
        Err(RunError::Config(m)) => {
            eprintln!("{}: invalid experiment: {m}", path.display());
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
        Err(RunError::Regime(m)) => {
            eprintln!("{}: regime mismatch: {m}", path.display());
            return Ok(ExitCode::from(EXIT_REGIME));
        }
    };
    let elapsed = start.elapsed().as_secs_f64();

    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    write_csv(&cfg.output_dir.join("results.csv"), &outcome.rows)?;
    let passed = outcome.criteria.iter().all(|c| c.passed);
    write_summary(
        &cfg.output_dir.join("summary.json"),
        &Summary {
            experiment: cfg.experiment.name(),
            distribution: &cfg.distribution,
            seed: cfg.seed,
            reps: cfg.reps,
            n_grid: &cfg.n_grid,
            passed,
            criteria: &outcome.criteria,
            wall_time_seconds: elapsed,
        },
    )?;
    for c in &outcome.criteria {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        println!("{mark} {}: {} (threshold {})", c.name, c.value, c.threshold);
    }
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    })
}
