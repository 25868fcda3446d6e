//! `sparsemargin` — train, select, evaluate and visualize sparse max-margin
//! classifiers on firing-rate CSV data.
//!
//! Exit codes: 0 on success, 2 for configuration errors (bad flags, bad
//! input files), 1 for runtime failures.

mod evaluate;
mod files;
mod generate;
mod heatmap;
mod train;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "sparsemargin", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cue-structured recording from a JSON spec.
    Generate(generate::GenerateArgs),
    /// Fit a one-vs-rest classifier for a movement.
    Train(train::TrainArgs),
    /// Compute force series and performance measures for a trained model.
    Evaluate(evaluate::EvaluateArgs),
    /// Render model weights on the physical electrode grid.
    Heatmap(heatmap::HeatmapArgs),
}

/// Errors split by exit code: configuration problems exit 2, runtime
/// failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(msg) | CliError::Runtime(msg) => msg,
        }
    }
}

impl From<sparsemargin::Error> for CliError {
    fn from(e: sparsemargin::Error) -> Self {
        use sparsemargin::Error::*;
        match e {
            SolveFailed(_) | Selection(_) | Io(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate::run(&args),
        Command::Train(args) => train::run(&args),
        Command::Evaluate(args) => evaluate::run(&args),
        Command::Heatmap(args) => heatmap::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
