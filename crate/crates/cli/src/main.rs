//! `qfusion` command-line driver.
//!
//! Each subcommand resolves its configuration (flags over `--config` file
//! over defaults), runs, writes its outputs into `--out`, and records a
//! manifest next to them. Exit codes: 0 success, 2 usage error, 3 missing
//! data, 4 internal failure.

mod commands;
mod config;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "qfusion", version, about = "Quantum sensor fusion experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo trials per configuration.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Directory holding data.txt and mote_locs.txt.
    #[arg(long, global = true, env = "QFUSION_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON config file; a manifest written by an earlier run also works.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form bound sweep over (M, f, V, strategy).
    Bounds(commands::BoundsArgs),
    /// Monte Carlo RMSE of the fusion methods.
    Simulate(commands::SimulateArgs),
    /// Empirical critical visibility over fault fraction and preparation overhead.
    Crossover(commands::CrossoverArgs),
    /// The embedded 8-sensor dataset report.
    EightSensor(commands::EightSensorArgs),
    /// Intel Berkeley Lab mote pipeline.
    Intel(commands::IntelArgs),
}

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use qfusion::Error as E;
    for cause in err.chain() {
        if cause.is::<UsageError>() || cause.is::<serde_json::Error>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::MissingData(_) | E::Checksum { .. } => 3,
                E::InvalidArgument(_) | E::FaultBudgetExceeded { .. } | E::Empty(_) | E::DimensionMismatch { .. } => 2,
                _ => 4,
            };
        }
    }
    4
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(a) => commands::bounds(&cli.global, a),
        Command::Simulate(a) => commands::simulate(&cli.global, a),
        Command::Crossover(a) => commands::crossover(&cli.global, a),
        Command::EightSensor(a) => commands::eight_sensor(&cli.global, a),
        Command::Intel(a) => commands::intel(&cli.global, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
