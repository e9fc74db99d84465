//! Batch front end: parse a JSON experiment config, run one of the
//! generation / threshold / simulation / sweep / check commands, and emit
//! CSV or JSON reports.
//!
//! Exit codes: 0 on success, 2 for configuration problems (unknown flags,
//! unreadable or invalid config, invalid parameters, unwritable output),
//! 3 for solver or convergence failures during computation.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(String),
}

impl CliError {
    pub fn config(msg: String) -> Self {
        CliError::Config(msg)
    }

    pub fn run(err: abos::Error) -> Self {
        match err {
            abos::Error::InvalidParams(v) => CliError::Config(v.join("; ")),
            other => CliError::Run(other.to_string()),
        }
    }

    pub fn run_msg(msg: String) -> Self {
        CliError::Run(msg)
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Run(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "abos",
    about = "Sparse multiple testing under equicorrelated Gaussian noise: \
             data generation, thresholds, Monte Carlo risk, and asymptotic checks"
)]
struct Cli {
    /// Path to the JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed, overriding mc.master_seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory, overriding output.directory from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for Monte Carlo replication (outputs do not depend on
    /// this).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one seeded dataset as dataset.csv.
    Generate,
    /// Write threshold rows for every configured rule as thresholds.csv.
    Thresholds,
    /// Monte Carlo risk/FDR/FWER per rule, written to risk.csv.
    Simulate,
    /// Build the regime sequence and trace risk ratios into sweep.csv.
    Sweep,
    /// Run the framework and optimality checkers; write check.json.
    Check,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::config(format!("cannot configure {jobs} jobs: {e}")))?;
    }
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config PATH is required".into()))?;
    let config = ExperimentConfig::load(config_path)?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.output.as_ref().and_then(|o| o.directory.clone()))
        .unwrap_or_else(|| PathBuf::from("."));

    match cli.command {
        Command::Generate => commands::generate_cmd(&config, &out_dir, cli.seed),
        Command::Thresholds => commands::thresholds_cmd(&config, &out_dir, cli.seed),
        Command::Simulate => commands::simulate_cmd(&config, &out_dir, cli.seed),
        Command::Sweep => commands::sweep_cmd(&config, &out_dir, cli.seed),
        Command::Check => commands::check_cmd(&config, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
