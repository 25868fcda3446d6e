use std::path::PathBuf;

use clap::{Args, ValueEnum};
use nalgebra::DVector;
use serde::Serialize;

use sparsemargin::data::{
    apply_zscore, build_augmented, load_csv, relabel_one_vs_rest, split_by_cues, zscore_channels,
    ChannelStats, CueSchedule, Dataset, LabelColumn,
};
use sparsemargin::psvm::{psvm_residual, solve_psvm, Hyperplane};
use sparsemargin::regselect::{balancing_select, morozov_select, BalancingConfig};
use sparsemargin::sparse::{
    class_weights, hinge_phi, lp_penalty_value, solve_sparse, GammaMode, SolveReport,
    SolverConfig, WarmStart,
};

use crate::files::{prefixed, write_json, ModelFile, ReportFile, RunRecord, SelectionDetail, SelectionSummary};
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Psvm,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectKind {
    None,
    Morozov,
    Balancing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaModeArg {
    Indicator,
    Residual,
    /// Force the hinge and penalty diagonals to the identity (PSVM mode).
    AllActive,
}

impl From<GammaModeArg> for GammaMode {
    fn from(mode: GammaModeArg) -> Self {
        match mode {
            GammaModeArg::Indicator => GammaMode::Indicator,
            GammaModeArg::Residual => GammaMode::Residual,
            GammaModeArg::AllActive => GammaMode::AllActive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarmStartArg {
    Psvm,
    Zero,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Firing-rate CSV with a label column.
    #[arg(long)]
    pub data: PathBuf,
    /// Cue schedule CSV (`start,end_exclusive,tag`).
    #[arg(long)]
    pub schedule: PathBuf,
    /// Label column name or zero-based index.
    #[arg(long, default_value = "label")]
    pub label_column: String,
    /// Movement tag to separate one-vs-rest, or `all` to fan out over every
    /// movement in the schedule.
    #[arg(long)]
    pub movement: String,
    #[arg(long, value_enum, default_value = "sparse")]
    pub solver: SolverKind,
    /// Tikhonov parameter (sparse convention); exclusive with --nu.
    #[arg(long)]
    pub beta: Option<f64>,
    /// SVM penalty parameter nu = 1/beta; exclusive with --beta.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Sparsity exponent in (0, 2].
    #[arg(long)]
    pub p: Option<f64>,
    /// Subdifferential smoothing floor.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Weight on rest-labeled rows, in (0, 1].
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub gamma_mode: Option<GammaModeArg>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub warm_start: Option<WarmStartArg>,
    /// Regularization-parameter choice rule.
    #[arg(long, value_enum, default_value = "none")]
    pub select: SelectKind,
    /// Balancing statistic mu (required with --select balancing).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Noise level delta (required with --select morozov).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Initial beta for the balancing iteration.
    #[arg(long, default_value_t = 1.0)]
    pub beta0: f64,
    /// Gamma-prior shift added to phi in the balancing update.
    #[arg(long, default_value_t = 0.0)]
    pub beta_tilde0: f64,
    /// Gamma-prior shift added to psi in the balancing update.
    #[arg(long, default_value_t = 0.0)]
    pub beta_tilde1: f64,
    /// Bisection bracket for the Morozov rule.
    #[arg(long, default_value_t = 1e-6)]
    pub beta_lo: f64,
    #[arg(long, default_value_t = 1e3)]
    pub beta_hi: f64,
    /// Train on everything before the (N+1)-th cue of the movement.
    #[arg(long)]
    pub train_cues: Option<usize>,
    /// Standardize channels before training (stats stored in the model).
    #[arg(long)]
    pub zscore: bool,
    #[arg(long)]
    pub out_prefix: String,
}

pub fn run(args: &TrainArgs) -> CliResult {
    validate_flags(args)?;
    let dataset = load_csv(&args.data, &parse_label_column(&args.label_column))?;
    let schedule = CueSchedule::from_csv_path(&args.schedule)?;
    let dataset = dataset.with_schedule(schedule.clone())?;

    if args.movement == "all" {
        let movements = schedule.movements();
        if movements.is_empty() {
            return Err(CliError::Config(
                "schedule contains no movement intervals".into(),
            ));
        }
        // Independent one-vs-rest solves; nothing shared but read-only data.
        let results: Vec<CliResult> = std::thread::scope(|scope| {
            let handles: Vec<_> = movements
                .iter()
                .map(|movement| {
                    let dataset = &dataset;
                    scope.spawn(move || {
                        train_one(args, dataset, movement, &format!("model_{movement}.json"), &format!("report_{movement}.json"))
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("train thread")).collect()
        });
        for result in results {
            result?;
        }
    } else {
        train_one(args, &dataset, &args.movement, "model.json", "report.json")?;
    }

    write_json(
        &prefixed(&args.out_prefix, "run.json")?,
        &RunRecord {
            command: "train",
            version: env!("CARGO_PKG_VERSION"),
            rng: None,
            parameters: args,
        },
    )
}

fn parse_label_column(raw: &str) -> LabelColumn {
    match raw.parse::<usize>() {
        Ok(idx) => LabelColumn::Index(idx),
        Err(_) => LabelColumn::Name(raw.to_string()),
    }
}

fn validate_flags(args: &TrainArgs) -> CliResult {
    if args.beta.is_some() && args.nu.is_some() {
        return Err(CliError::Config("--beta and --nu are exclusive".into()));
    }
    match args.select {
        SelectKind::None => {
            if args.beta.is_none() && args.nu.is_none() {
                return Err(CliError::Config(
                    "one of --beta or --nu is required without a selection rule".into(),
                ));
            }
            if args.mu.is_some() {
                return Err(CliError::Config("--mu only applies to --select balancing".into()));
            }
            if args.delta.is_some() {
                return Err(CliError::Config("--delta only applies to --select morozov".into()));
            }
        }
        SelectKind::Balancing => {
            if args.mu.is_none() {
                return Err(CliError::Config("--select balancing requires --mu".into()));
            }
            if args.delta.is_some() {
                return Err(CliError::Config("--delta only applies to --select morozov".into()));
            }
            if args.beta.is_some() || args.nu.is_some() {
                return Err(CliError::Config(
                    "--beta/--nu conflict with --select balancing (use --beta0 for the start)".into(),
                ));
            }
        }
        SelectKind::Morozov => {
            if args.delta.is_none() {
                return Err(CliError::Config("--select morozov requires --delta".into()));
            }
            if args.mu.is_some() {
                return Err(CliError::Config("--mu only applies to --select balancing".into()));
            }
            if args.beta.is_some() || args.nu.is_some() {
                return Err(CliError::Config(
                    "--beta/--nu conflict with --select morozov (the rule picks beta)".into(),
                ));
            }
        }
    }
    if args.solver == SolverKind::Psvm {
        let sparse_only: [(&str, bool); 7] = [
            ("--p", args.p.is_some()),
            ("--eps", args.eps.is_some()),
            ("--alpha", args.alpha.is_some()),
            ("--gamma-mode", args.gamma_mode.is_some()),
            ("--max-iter", args.max_iter.is_some()),
            ("--tol", args.tol.is_some()),
            ("--warm-start", args.warm_start.is_some()),
        ];
        if let Some((flag, _)) = sparse_only.iter().find(|(_, given)| *given) {
            return Err(CliError::Config(format!(
                "{flag} only applies to --solver sparse"
            )));
        }
    }
    Ok(())
}

fn sparse_config(args: &TrainArgs, beta: f64) -> SolverConfig {
    SolverConfig {
        beta,
        p: args.p.unwrap_or(1.0),
        epsilon: args.eps.unwrap_or(1e-3),
        alpha: args.alpha.unwrap_or(1.0),
        gamma_mode: args.gamma_mode.map_or(GammaMode::Indicator, Into::into),
        max_iter: args.max_iter.unwrap_or(50),
        tol: args.tol.unwrap_or(1e-8),
        warm_start: match args.warm_start {
            Some(WarmStartArg::Zero) => WarmStart::Zero,
            _ => WarmStart::Psvm,
        },
    }
}

struct Fit {
    plane: Hyperplane,
    beta: f64,
    solve_report: Option<SolveReport>,
    psvm_res: Option<f64>,
}

fn fit_at(args: &TrainArgs, dataset: &Dataset, beta: f64) -> Result<Fit, CliError> {
    match args.solver {
        SolverKind::Psvm => {
            let nu = 1.0 / beta;
            let plane = solve_psvm(dataset, nu)?;
            let residual = psvm_residual(dataset, nu, &plane);
            Ok(Fit {
                plane,
                beta,
                solve_report: None,
                psvm_res: Some(residual),
            })
        }
        SolverKind::Sparse => {
            let config = sparse_config(args, beta);
            let (plane, report) = solve_sparse(dataset, &config)?;
            Ok(Fit {
                plane,
                beta,
                solve_report: Some(report),
                psvm_res: None,
            })
        }
    }
}

/// Data-fit and penalty functionals used by the selection rules: plain
/// least squares and squared norm for PSVM, weighted positive part and
/// `|w|_p^p + gamma^2/2` for the sparse solver.
fn phi_psi(args: &TrainArgs, dataset: &Dataset, fit: &Fit) -> (f64, f64) {
    let h = build_augmented(dataset);
    let u = fit.plane.to_stacked();
    match args.solver {
        SolverKind::Psvm => {
            let r = &h * &u - DVector::from_element(dataset.n(), 1.0);
            (0.5 * r.norm_squared(), 0.5 * u.norm_squared())
        }
        SolverKind::Sparse => {
            let config = sparse_config(args, fit.beta);
            let s = class_weights(dataset.labels(), config.alpha);
            let phi = hinge_phi(&h, &s, &u);
            let psi = lp_penalty_value(&fit.plane.w, config.p)
                + 0.5 * fit.plane.gamma * fit.plane.gamma;
            (phi, psi)
        }
    }
}

fn train_one(
    args: &TrainArgs,
    dataset: &Dataset,
    movement: &str,
    model_name: &str,
    report_name: &str,
) -> CliResult {
    let relabeled = relabel_one_vs_rest(dataset, movement)?;
    let (mut train, split_bin) = match args.train_cues {
        Some(cues) => {
            let (train, _) = split_by_cues(&relabeled, movement, cues)?;
            let split = train.n();
            (train, Some(split))
        }
        None => (relabeled, None),
    };
    let mut stats: Option<Vec<ChannelStats>> = None;
    if args.zscore {
        let (standardized, channel_stats) = zscore_channels(&train);
        train = standardized;
        stats = Some(channel_stats);
    }

    let (fit, summary, detail) = match args.select {
        SelectKind::None => {
            let beta = args.beta.unwrap_or_else(|| 1.0 / args.nu.expect("validated"));
            (fit_at(args, &train, beta)?, None, None)
        }
        SelectKind::Balancing => {
            let config = BalancingConfig {
                mu: args.mu.expect("validated"),
                beta0: args.beta0,
                beta_tilde0: args.beta_tilde0,
                beta_tilde1: args.beta_tilde1,
                ..BalancingConfig::default()
            };
            let result = balancing_select(
                |beta| {
                    let fit = fit_at(args, &train, beta).map_err(cli_to_lib)?;
                    Ok(phi_psi(args, &train, &fit))
                },
                &config,
            )?;
            let fit = fit_at(args, &train, result.beta)?;
            let summary = SelectionSummary {
                method: "balancing".into(),
                beta: result.beta,
                converged: result.converged,
            };
            (fit, Some(summary), Some(SelectionDetail::Balancing(result)))
        }
        SelectKind::Morozov => {
            let result = morozov_select(
                |beta| {
                    let fit = fit_at(args, &train, beta).map_err(cli_to_lib)?;
                    Ok(phi_psi(args, &train, &fit).0)
                },
                args.delta.expect("validated"),
                (args.beta_lo, args.beta_hi),
                1e-3,
                100,
            )?;
            let fit = fit_at(args, &train, result.beta)?;
            let summary = SelectionSummary {
                method: "morozov".into(),
                beta: result.beta,
                converged: result.converged,
            };
            (fit, Some(summary), Some(SelectionDetail::Morozov(result)))
        }
    };

    let model = ModelFile {
        solver: match args.solver {
            SolverKind::Psvm => "psvm".into(),
            SolverKind::Sparse => "sparse".into(),
        },
        movement: movement.to_string(),
        w: fit.plane.w.clone(),
        gamma: fit.plane.gamma,
        beta: fit.beta,
        nu: matches!(args.solver, SolverKind::Psvm).then(|| 1.0 / fit.beta),
        config: matches!(args.solver, SolverKind::Sparse).then(|| sparse_config(args, fit.beta)),
        train_cues: args.train_cues,
        split_bin,
        zscore: stats,
        selection: summary,
    };
    write_json(&prefixed(&args.out_prefix, model_name)?, &model)?;

    let report = ReportFile {
        solve: fit.solve_report,
        psvm_residual: fit.psvm_res,
        selection: detail,
    };
    write_json(&prefixed(&args.out_prefix, report_name)?, &report)?;
    Ok(())
}

// Selection callbacks speak the library error type; fold CLI errors back in.
fn cli_to_lib(e: CliError) -> sparsemargin::Error {
    match e {
        CliError::Config(msg) => sparsemargin::Error::InvalidConfig(msg),
        CliError::Runtime(msg) => sparsemargin::Error::Selection(msg),
    }
}

/// Re-standardize held-out data with the statistics stored in a model.
pub fn apply_model_zscore(
    dataset: &Dataset,
    stats: Option<&[ChannelStats]>,
) -> Result<Dataset, sparsemargin::Error> {
    match stats {
        Some(stats) => apply_zscore(dataset, stats),
        None => Ok(dataset.clone()),
    }
}
