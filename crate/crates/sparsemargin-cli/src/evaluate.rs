use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use sparsemargin::data::{load_csv, relabel_one_vs_rest, CueSchedule, LabelColumn};
use sparsemargin::evaluate::{
    averaged_performance, force, margin_stats, sign_series, summed_performance, write_forces_csv,
};
use sparsemargin::psvm::Hyperplane;

use crate::files::{prefixed, read_model, write_json, IntervalMetric, MetricsFile, RunRecord};
use crate::train::apply_model_zscore;
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureArg {
    Sign,
    Summed,
    Averaged,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// model.json written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Cue schedule; enables interval-averaged measures and one-vs-rest
    /// relabeling against the model's movement.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[arg(long, default_value = "label")]
    pub label_column: String,
    /// Half-width of the summed-measure window.
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Measure summarized in metrics.json; forces.csv always carries all
    /// columns.
    #[arg(long, value_enum, default_value = "averaged")]
    pub measure: MeasureArg,
    #[arg(long)]
    pub out_prefix: String,
}

pub fn run(args: &EvaluateArgs) -> CliResult {
    let model = read_model(&args.model)?;
    let label_column = match args.label_column.parse::<usize>() {
        Ok(idx) => LabelColumn::Index(idx),
        Err(_) => LabelColumn::Name(args.label_column.clone()),
    };
    let mut dataset = load_csv(&args.data, &label_column)?;
    if let Some(path) = &args.schedule {
        let schedule = CueSchedule::from_csv_path(path)?;
        dataset = dataset.with_schedule(schedule)?;
        dataset = relabel_one_vs_rest(&dataset, &model.movement)?;
    }
    if dataset.m() != model.w.len() {
        return Err(CliError::Config(format!(
            "model has {} channels but the data has {}",
            model.w.len(),
            dataset.m()
        )));
    }
    let dataset = apply_model_zscore(&dataset, model.zscore.as_deref())?;

    let plane = Hyperplane::new(model.w.clone(), model.gamma);
    let f = force(&dataset, &plane)?;
    let summed = summed_performance(&f, args.window);
    let averaged = dataset
        .schedule()
        .map(|schedule| averaged_performance(&f, schedule))
        .transpose()?;

    write_forces_csv(
        &prefixed(&args.out_prefix, "forces.csv")?,
        &f,
        &summed,
        averaged.as_ref(),
        dataset.labels(),
    )?;

    // Per-interval table: the interval mean of the selected measure (for
    // `averaged` that is exactly P~), plus its sign as the detected state.
    let per_bin = match args.measure {
        MeasureArg::Sign => sign_series(&f).values,
        MeasureArg::Summed => summed.values.clone(),
        MeasureArg::Averaged => f.values.clone(),
    };
    let intervals = dataset.schedule().map(|schedule| {
        schedule
            .intervals()
            .iter()
            .map(|iv| {
                let mean = per_bin[iv.start..iv.end_exclusive].iter().sum::<f64>()
                    / iv.len() as f64;
                IntervalMetric {
                    start: iv.start,
                    end_exclusive: iv.end_exclusive,
                    tag: iv.tag.clone(),
                    p_tilde: mean,
                    sign: if mean > 0.0 {
                        1
                    } else if mean < 0.0 {
                        -1
                    } else {
                        0
                    },
                }
            })
            .collect()
    });

    let metrics = MetricsFile {
        measure: match args.measure {
            MeasureArg::Sign => "sign",
            MeasureArg::Summed => "summed",
            MeasureArg::Averaged => "averaged",
        }
        .into(),
        window_halfwidth: args.window,
        margin_stats: margin_stats(&dataset, &plane)?,
        intervals,
    };
    write_json(&prefixed(&args.out_prefix, "metrics.json")?, &metrics)?;

    write_json(
        &prefixed(&args.out_prefix, "run.json")?,
        &RunRecord {
            command: "evaluate",
            version: env!("CARGO_PKG_VERSION"),
            rng: None,
            parameters: args,
        },
    )
}
