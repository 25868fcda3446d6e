use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use sparsemargin::data::{generate_synthetic, write_csv, SyntheticSpec, SYNTHETIC_RNG};

use crate::files::{prefixed, write_json, RunRecord, TruthFile};
use crate::{CliError, CliResult};

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// JSON file holding the synthetic spec (channels, rates, schedule, seed).
    #[arg(long)]
    pub spec: PathBuf,
    /// Prefix for the output files data.csv, schedule.csv, truth.json, run.json.
    #[arg(long)]
    pub out_prefix: String,
}

pub fn run(args: &GenerateArgs) -> CliResult {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", args.spec.display())))?;
    let spec: SyntheticSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("parsing {}: {e}", args.spec.display())))?;
    let (dataset, ground_truth) = generate_synthetic(&spec)?;

    write_csv(&dataset, &prefixed(&args.out_prefix, "data.csv")?)?;
    spec.schedule
        .write_csv_path(&prefixed(&args.out_prefix, "schedule.csv")?)?;
    write_json(
        &prefixed(&args.out_prefix, "truth.json")?,
        &TruthFile {
            spec: spec.clone(),
            rng: SYNTHETIC_RNG.to_string(),
            ground_truth,
        },
    )?;
    write_json(
        &prefixed(&args.out_prefix, "run.json")?,
        &RunRecord {
            command: "generate",
            version: env!("CARGO_PKG_VERSION"),
            rng: Some(SYNTHETIC_RNG),
            parameters: args,
        },
    )
}
