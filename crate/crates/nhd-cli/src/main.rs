//! Command-line front end: sweep runner, figure datasets, self-checks.
//!
//! Exit codes: 0 success, 1 configuration or runtime error, 2 one or more
//! validation checks failed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nhd::experiment::{figure2, figure3, run_to_files, ExperimentConfig, Scheme};

#[derive(Parser)]
#[command(
    name = "nhd",
    version,
    about = "Simulate post-selected unitary emulation of a non-Hermitian qubit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file; built-in defaults apply when omitted.
    #[arg(long, global = true, value_name = "path")]
    config: Option<PathBuf>,

    /// Output directory (overrides the config).
    #[arg(long, global = true, value_name = "dir")]
    out: Option<PathBuf>,

    /// Master seed (overrides the config's seed list with this single seed).
    #[arg(long, global = true, value_name = "u64")]
    seed: Option<u64>,

    /// Shots per measurement setting (overrides the config).
    #[arg(long, global = true, value_name = "n")]
    shots: Option<u64>,

    /// Emulation scheme: naimark, bond, gbond, or exact.
    #[arg(long, global = true, value_name = "name")]
    scheme: Option<String>,

    /// Also emit SVG plots next to the CSV files.
    #[arg(long, global = true)]
    plots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Full sweep with the configured scheme; writes CSV and JSON datasets.
    Run,
    /// Spin-expectation dataset: sampled points with error bars plus exact curves.
    Figure2,
    /// Metric reconstruction dataset along the trajectory (bond scheme).
    Figure3,
    /// Run the built-in check suite and print one line per check.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Ok(raw) = std::env::var("NHD_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => nhd::exec::configure_threads(Some(n)),
            _ => {
                eprintln!("error: NHD_THREADS must be a positive integer, got `{raw}`");
                return ExitCode::from(1);
            }
        }
    }

    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: Cli) -> nhd::Result<ExitCode> {
    let Cli { command, config, out, seed, shots, scheme, plots } = cli;

    if let Command::Validate = command {
        return Ok(run_validation());
    }

    let mut cfg = match &config {
        Some(path) => ExperimentConfig::from_toml_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(dir) = out {
        cfg.out_dir = dir;
    }
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    if let Some(n) = shots {
        cfg.shots = n;
    }
    if let Some(name) = &scheme {
        cfg.scheme = name.parse::<Scheme>()?;
    }
    if plots {
        cfg.emit_plots = true;
    }
    cfg.validate()?;

    let files = match command {
        Command::Run => run_to_files(&cfg)?,
        Command::Figure2 => figure2(&cfg)?,
        Command::Figure3 => figure3(&cfg)?,
        Command::Validate => unreachable!("handled above"),
    };
    for file in files {
        println!("wrote {}", file.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_validation() -> ExitCode {
    let outcomes = nhd::validation::run_all();
    let mut failures = 0usize;
    for outcome in &outcomes {
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:32} {}", outcome.name, outcome.detail);
        if !outcome.passed {
            failures += 1;
        }
    }
    println!("{} of {} checks passed", outcomes.len() - failures, outcomes.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
