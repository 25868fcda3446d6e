//! On-disk JSON schemas shared by the subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sparsemargin::data::{ChannelStats, SyntheticSpec};
use sparsemargin::regselect::{BalancingResult, MorozovResult};
use sparsemargin::sparse::{SolveReport, SolverConfig};

use crate::CliError;

/// Trained classifier plus everything needed to apply it elsewhere.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub solver: String,
    pub movement: String,
    pub w: Vec<f64>,
    pub gamma: f64,
    /// Effective Tikhonov parameter of the final solve (`1/nu` for PSVM).
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<SolverConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_cues: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_bin: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zscore: Option<Vec<ChannelStats>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionSummary>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub method: String,
    pub beta: f64,
    pub converged: bool,
}

/// Solver diagnostics and the full selection trajectory.
#[derive(Debug, Serialize, Deserialize)]
pub struct ReportFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveReport>,
    /// Stationarity residual of the PSVM system, when that solver ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psvm_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionDetail>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SelectionDetail {
    Balancing(BalancingResult),
    Morozov(MorozovResult),
}

/// Ground-truth metadata emitted next to a synthetic dataset.
#[derive(Debug, Serialize, Deserialize)]
pub struct TruthFile {
    pub spec: SyntheticSpec,
    /// Named generator algorithm, so the stream can be reproduced.
    pub rng: String,
    pub ground_truth: Vec<usize>,
}

/// Per-interval entry of `metrics.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct IntervalMetric {
    pub start: usize,
    pub end_exclusive: usize,
    pub tag: String,
    pub p_tilde: f64,
    pub sign: i8,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsFile {
    pub measure: String,
    pub window_halfwidth: usize,
    pub margin_stats: sparsemargin::evaluate::MarginStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<IntervalMetric>>,
}

/// Provenance record written by every command. Carries no clock so reruns
/// of deterministic commands are byte-identical.
#[derive(Debug, Serialize)]
pub struct RunRecord<'a, T: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<&'a str>,
    pub parameters: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

pub fn read_model(path: &Path) -> Result<ModelFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("parsing {}: {e}", path.display())))
}

/// Resolve `<prefix><name>`: a prefix ending in a path separator is a
/// directory (created on demand), anything else is a filename prefix.
pub fn prefixed(prefix: &str, name: &str) -> Result<PathBuf, CliError> {
    let path = PathBuf::from(format!("{prefix}{name}"));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Runtime(format!("creating {}: {e}", parent.display())))?;
        }
    }
    Ok(path)
}
