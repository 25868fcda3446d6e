use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use sparsemargin::heatmap::{export_grid, map_weights, ElectrodeMap, GridFormat, WeightTransform};

use crate::files::{read_model, write_json, RunRecord};
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformArg {
    Raw,
    Abs,
    LogAbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatArg {
    Csv,
    Pgm,
}

#[derive(Debug, Args, Serialize)]
pub struct HeatmapArgs {
    /// model.json written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Custom 10x10 electrode layout CSV; defaults to the row-major
    /// 96-channel layout.
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "abs")]
    pub transform: TransformArg,
    #[arg(long, value_enum, default_value = "pgm")]
    pub format: FormatArg,
    /// Output file; a provenance record lands next to it as `<out>.run.json`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &HeatmapArgs) -> CliResult {
    let model = read_model(&args.model)?;
    let map = match &args.map {
        Some(path) => ElectrodeMap::from_csv_path(path)?,
        None => ElectrodeMap::default_96(),
    };
    let transform = match args.transform {
        TransformArg::Raw => WeightTransform::Raw,
        TransformArg::Abs => WeightTransform::Abs,
        TransformArg::LogAbs => WeightTransform::LogAbs,
    };
    let grid = map_weights(&model.w, &map, transform)?;
    let format = match args.format {
        FormatArg::Csv => GridFormat::Csv,
        FormatArg::Pgm => GridFormat::Pgm,
    };
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Runtime(format!("creating {}: {e}", parent.display())))?;
        }
    }
    export_grid(&grid, format, &args.out)?;

    let run_path = PathBuf::from(format!("{}.run.json", args.out.display()));
    write_json(
        &run_path,
        &RunRecord {
            command: "heatmap",
            version: env!("CARGO_PKG_VERSION"),
            rng: None,
            parameters: args,
        },
    )
}
