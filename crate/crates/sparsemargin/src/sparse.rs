//! Iteratively reweighted sparse max-margin solver.
//!
//! The general classifier minimizes `phi(y) + beta * psi(w, gamma)` with
//! `y = e - H u`. Three ingredients sharpen the proximal SVM baseline:
//!
//! * an `l_p` weight penalty `psi(w, gamma) = |w|_p^p + (1/2) gamma^2` with
//!   `0 < p <= 2`, handled through an epsilon-smoothed reweighting diagonal;
//! * a positive-part data term that only penalizes rows with
//!   `d_i (x_i . w - gamma) < 1`, selected each sweep by a hinge diagonal;
//! * a class-bias diagonal that down-weights the (abundant) rest rows.
//!
//! Each sweep freezes the three diagonals at the current iterate and solves
//!
//! ```text
//! (H^T S Gamma H + beta * blockdiag(T, 1)) u = H^T S Gamma e
//! ```
//!
//! which is an SPD system of size `(m+1) x (m+1)`. With all diagonals forced
//! to the identity a single sweep reproduces the proximal SVM at
//! `nu = 1/beta`. The smoothed objective [`j_eps`] certifies descent of the
//! pure reweighting iteration and is tracked per sweep in the report.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{build_augmented, Dataset};
use crate::error::{Error, Result};
use crate::psvm::{solve_psvm_system, Hyperplane};

/// How the hinge diagonal treats each row's residual `r_i = 1 - (H u)_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaMode {
    /// 0/1 flag on rows with `r_i > 0`; the solved system is then the exact
    /// stationarity condition of the positive-part objective on the frozen
    /// active set.
    Indicator,
    /// The hinge residual `max(0, r_i)` itself as the row weight.
    Residual,
    /// Force both the hinge diagonal and the `l_p` diagonal to the identity,
    /// reproducing the proximal SVM (`S, T, Gamma = I`).
    AllActive,
}

/// Starting point for the sweep iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarmStart {
    Psvm,
    Zero,
}

/// Parameters of the sparse solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Tikhonov parameter, `beta = 1/nu`.
    pub beta: f64,
    /// Penalty exponent in `(0, 2]`; values at or below 1 promote sparsity.
    pub p: f64,
    /// Smoothing floor for the reweighting diagonal.
    pub epsilon: f64,
    /// Weight in `(0, 1]` applied to rows labeled `-1`.
    pub alpha: f64,
    pub gamma_mode: GammaMode,
    pub max_iter: usize,
    /// Relative step-size tolerance.
    pub tol: f64,
    pub warm_start: WarmStart,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            beta: 1.0,
            p: 1.0,
            epsilon: 1e-3,
            alpha: 1.0,
            gamma_mode: GammaMode::Indicator,
            max_iter: 50,
            tol: 1e-8,
            warm_start: WarmStart::Psvm,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(Error::InvalidConfig(format!("beta must be positive, got {}", self.beta)));
        }
        if !self.p.is_finite() || self.p <= 0.0 || self.p > 2.0 {
            return Err(Error::InvalidConfig(format!("p must lie in (0, 2], got {}", self.p)));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 || self.epsilon >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 || self.alpha > 1.0 {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Diagnostics of a [`solve_sparse`] run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Completed sweeps; `j_eps_history.len() == iterations + 1`.
    pub iterations: usize,
    /// Smoothed objective at the start point and after each sweep, computed
    /// with the plain least-squares data term.
    pub j_eps_history: Vec<f64>,
    /// `max | H^T S Gamma (H u - e) + beta (T w, gamma) |` with the
    /// diagonals evaluated at the final iterate.
    pub stationarity_residual: f64,
    pub converged: bool,
    /// Rows with a positive hinge weight at the final iterate.
    pub final_active_set: Vec<usize>,
}

/// Smoothed componentwise subdifferential of `|w|_p^p`:
/// `p * w_j / max(eps^(2-p), |w_j|^(2-p))`. Finite everywhere, including 0.
pub fn approx_subgradient(w: &[f64], p: f64, eps: f64) -> Vec<f64> {
    assert!(eps > 0.0, "eps must be positive");
    w.iter()
        .map(|&wj| p * wj / eps.powf(2.0 - p).max(wj.abs().powf(2.0 - p)))
        .collect()
}

/// Reweighting diagonal `T_jj = p / max(eps^(2-p), |w_j|^(2-p))`.
///
/// Strictly positive; small weights attract a large penalty, which is what
/// drives them to zero over the sweeps.
pub fn lp_penalty_weights(w: &[f64], p: f64, eps: f64) -> DVector<f64> {
    assert!(eps > 0.0, "eps must be positive");
    DVector::from_iterator(
        w.len(),
        w.iter()
            .map(|&wj| p / eps.powf(2.0 - p).max(wj.abs().powf(2.0 - p))),
    )
}

/// Class-bias diagonal: 1 on rows labeled `+1`, `alpha` on rows labeled `-1`.
pub fn class_weights(labels: &DVector<f64>, alpha: f64) -> DVector<f64> {
    assert!(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
    DVector::from_iterator(
        labels.len(),
        labels.iter().map(|&d| if d > 0.0 { 1.0 } else { alpha }),
    )
}

/// Hinge diagonal at `u` for the given mode.
///
/// Row residuals are `r_i = 1 - d_i (x_i . w - gamma)`; indicator mode flags
/// `r_i > 0` with 1, residual mode uses `max(0, r_i)` itself, and all-active
/// mode returns the identity.
pub fn hinge_weights(dataset: &Dataset, plane: &Hyperplane, mode: GammaMode) -> Result<DVector<f64>> {
    if plane.dim() != dataset.m() {
        return Err(Error::DimensionMismatch(format!(
            "hyperplane has {} weights but the dataset has {} channels",
            plane.dim(),
            dataset.m()
        )));
    }
    let h = build_augmented(dataset);
    Ok(hinge_weights_from(&h, &plane.to_stacked(), mode))
}

fn hinge_weights_from(h: &DMatrix<f64>, u: &DVector<f64>, mode: GammaMode) -> DVector<f64> {
    let n = h.nrows();
    match mode {
        GammaMode::AllActive => DVector::from_element(n, 1.0),
        _ => {
            let margins = h * u;
            DVector::from_iterator(
                n,
                margins.iter().map(|&mi| {
                    let r = 1.0 - mi;
                    match mode {
                        GammaMode::Indicator => {
                            if r > 0.0 {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        GammaMode::Residual => r.max(0.0),
                        GammaMode::AllActive => unreachable!(),
                    }
                }),
            )
        }
    }
}

/// One reweighted sweep: solve
/// `(H^T S Gamma H + beta * blockdiag(T, 1)) u = H^T S Gamma e`
/// for frozen diagonals `S` (class weights), `Gamma` (hinge weights) and `T`
/// (`l_p` weights). The offset coordinate always carries penalty weight 1,
/// coming from the `(1/2) gamma^2` term.
pub fn reweighted_step(
    h: &DMatrix<f64>,
    class_w: &DVector<f64>,
    hinge_w: &DVector<f64>,
    lp_w: &DVector<f64>,
    beta: f64,
) -> Result<DVector<f64>> {
    let (n, dim) = h.shape();
    debug_assert_eq!(class_w.len(), n);
    debug_assert_eq!(hinge_w.len(), n);
    debug_assert_eq!(lp_w.len(), dim - 1);

    let row_w = DVector::from_iterator(n, class_w.iter().zip(hinge_w.iter()).map(|(s, g)| s * g));
    let mut weighted = h.clone();
    for i in 0..n {
        let wi = row_w[i];
        weighted.row_mut(i).scale_mut(wi);
    }
    let mut system = h.transpose() * &weighted;
    for j in 0..dim - 1 {
        system[(j, j)] += beta * lp_w[j];
    }
    system[(dim - 1, dim - 1)] += beta;
    let rhs = h.transpose() * &row_w;

    let diag_min = (0..dim).map(|j| system[(j, j)]).fold(f64::INFINITY, f64::min);
    let diag_max = (0..dim).map(|j| system[(j, j)]).fold(0.0_f64, f64::max);
    let chol = nalgebra::Cholesky::new(system).ok_or_else(|| {
        Error::SolveFailed(format!(
            "sweep system is not numerically positive definite (diagonal condition estimate {:.3e})",
            diag_max / diag_min.max(f64::MIN_POSITIVE)
        ))
    })?;
    let u = chol.solve(&rhs);
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolveFailed("sweep produced a non-finite iterate".into()));
    }
    Ok(u)
}

/// Run the full reweighted iteration from the configured warm start until
/// the relative step drops below `tol` or `max_iter` sweeps have run.
pub fn solve_sparse(dataset: &Dataset, config: &SolverConfig) -> Result<(Hyperplane, SolveReport)> {
    config.validate()?;
    let h = build_augmented(dataset);
    let m = dataset.m();
    let s = class_weights(dataset.labels(), config.alpha);

    let mut u = match config.warm_start {
        WarmStart::Psvm => solve_psvm_system(&h, 1.0 / config.beta)?.to_stacked(),
        WarmStart::Zero => DVector::zeros(m + 1),
    };
    let mut history = vec![classifier_objective(&h, &u, config)];
    let mut converged = false;

    for _ in 0..config.max_iter {
        let gamma = hinge_weights_from(&h, &u, config.gamma_mode);
        if config.gamma_mode == GammaMode::Indicator && gamma.iter().all(|&g| g == 0.0) {
            // Every constraint is slack; the sweep system would map the
            // iterate to zero, so return it directly.
            u = DVector::zeros(m + 1);
            history.push(classifier_objective(&h, &u, config));
            converged = true;
            break;
        }
        let t = penalty_diagonal(&u, m, config);
        let next = reweighted_step(&h, &s, &gamma, &t, config.beta)?;
        history.push(classifier_objective(&h, &next, config));
        let step = (&next - &u).norm();
        let done = step <= config.tol * (1.0 + u.norm());
        u = next;
        if done {
            converged = true;
            break;
        }
    }

    let gamma = hinge_weights_from(&h, &u, config.gamma_mode);
    let t = penalty_diagonal(&u, m, config);
    let stationarity_residual = stationarity_residual(&h, &s, &gamma, &t, config.beta, &u);
    let final_active_set = gamma
        .iter()
        .enumerate()
        .filter(|(_, &g)| g > 0.0)
        .map(|(i, _)| i)
        .collect();

    let report = SolveReport {
        iterations: history.len() - 1,
        j_eps_history: history,
        stationarity_residual,
        converged,
        final_active_set,
    };
    Ok((Hyperplane::from_stacked(&u), report))
}

fn penalty_diagonal(u: &DVector<f64>, m: usize, config: &SolverConfig) -> DVector<f64> {
    match config.gamma_mode {
        GammaMode::AllActive => DVector::from_element(m, 1.0),
        _ => lp_penalty_weights(&u.as_slice()[..m], config.p, config.epsilon),
    }
}

/// `max | H^T S Gamma (H u - e) + beta (T w, gamma) |` — zero exactly at a
/// fixed point of the sweep iteration.
fn stationarity_residual(
    h: &DMatrix<f64>,
    class_w: &DVector<f64>,
    hinge_w: &DVector<f64>,
    lp_w: &DVector<f64>,
    beta: f64,
    u: &DVector<f64>,
) -> f64 {
    let n = h.nrows();
    let dim = h.ncols();
    let data = h * u - DVector::from_element(n, 1.0);
    let weighted = DVector::from_iterator(
        n,
        (0..n).map(|i| class_w[i] * hinge_w[i] * data[i]),
    );
    let mut residual = h.transpose() * weighted;
    for j in 0..dim - 1 {
        residual[j] += beta * lp_w[j] * u[j];
    }
    residual[dim - 1] += beta * u[dim - 1];
    residual.amax()
}

/// Smoothed surrogate for `x^(p/2)` (so `psi_eps(w^2)` approximates
/// `|w|^p`): `x^(p/2)` above the knot `x = eps^2`, the tangent continuation
/// `(p/2) x / eps^(2-p) + (1 - p/2) eps^p` below it. Continuous, concave and
/// nondecreasing on `x >= 0`.
pub fn psi_eps(x: f64, p: f64, eps: f64) -> f64 {
    assert!(x >= 0.0, "psi_eps is defined for nonnegative x");
    assert!(eps > 0.0, "eps must be positive");
    if x >= eps * eps {
        x.powf(p / 2.0)
    } else {
        (p / 2.0) * x / eps.powf(2.0 - p) + (1.0 - p / 2.0) * eps.powf(p)
    }
}

/// Smoothed objective of the pure reweighting iteration:
/// `(1/2) |H w - e|^2 + beta * sum_j psi_eps(w_j^2)`.
pub fn j_eps(w: &DVector<f64>, h: &DMatrix<f64>, beta: f64, p: f64, eps: f64) -> f64 {
    let residual = h * w - DVector::from_element(h.nrows(), 1.0);
    let penalty: f64 = w.iter().map(|&wj| psi_eps(wj * wj, p, eps)).sum();
    0.5 * residual.norm_squared() + beta * penalty
}

/// `sum_j |w_j|^p`, the exact penalty the smoothed machinery approximates.
pub fn lp_penalty_value(w: &[f64], p: f64) -> f64 {
    w.iter().map(|&wj| wj.abs().powf(p)).sum()
}

// Objective tracked in the solve report: plain least-squares data term plus
// the beta-scaled smoothed penalty, with the offset carrying (1/2) gamma^2.
fn classifier_objective(h: &DMatrix<f64>, u: &DVector<f64>, config: &SolverConfig) -> f64 {
    let m = u.len() - 1;
    let residual = h * u - DVector::from_element(h.nrows(), 1.0);
    let penalty: f64 = u
        .as_slice()[..m]
        .iter()
        .map(|&wj| psi_eps(wj * wj, config.p, config.epsilon))
        .sum();
    0.5 * residual.norm_squared() + config.beta * (penalty + 0.5 * u[m] * u[m])
}

/// Result of the pure `l_p` reweighting iteration [`irls_lp`].
#[derive(Debug, Clone, PartialEq)]
pub struct LpIrlsResult {
    pub w: DVector<f64>,
    /// `j_eps` at the zero start and after every step; nonincreasing.
    pub j_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Pure `l_p` reweighted least squares on an arbitrary system `H w ~ e`:
/// repeat `(H^T H + beta T^k) w^(k+1) = H^T e` with `T^k` the reweighting
/// diagonal at `w^k`, starting from zero. The smoothed objective [`j_eps`]
/// descends at every step and the limit satisfies
/// `H^T H w + beta T(w) w = H^T e`.
pub fn irls_lp(
    h: &DMatrix<f64>,
    beta: f64,
    p: f64,
    eps: f64,
    max_iter: usize,
    tol: f64,
) -> Result<LpIrlsResult> {
    if !beta.is_finite() || beta <= 0.0 || !p.is_finite() || p <= 0.0 || p > 2.0 || eps <= 0.0 {
        return Err(Error::InvalidConfig(
            "irls_lp requires beta > 0, p in (0, 2], eps > 0".into(),
        ));
    }
    let dim = h.ncols();
    let gram = h.transpose() * h;
    let rhs = h.transpose() * DVector::from_element(h.nrows(), 1.0);
    let mut w = DVector::zeros(dim);
    let mut j_history = vec![j_eps(&w, h, beta, p, eps)];
    let mut converged = false;
    for _ in 0..max_iter {
        let t = lp_penalty_weights(w.as_slice(), p, eps);
        let mut system = gram.clone();
        for j in 0..dim {
            system[(j, j)] += beta * t[j];
        }
        let chol = nalgebra::Cholesky::new(system)
            .ok_or_else(|| Error::SolveFailed("reweighted system lost positive definiteness".into()))?;
        let next = chol.solve(&rhs);
        j_history.push(j_eps(&next, h, beta, p, eps));
        let step = (&next - &w).norm();
        let done = step <= tol * (1.0 + w.norm());
        w = next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(LpIrlsResult {
        iterations: j_history.len() - 1,
        j_history,
        w,
        converged,
    })
}

/// Infinity-norm residual of the pure iteration's fixed-point equation
/// `H^T H w + beta T(w) w - H^T e` at `w`.
pub fn irls_lp_residual(h: &DMatrix<f64>, beta: f64, p: f64, eps: f64, w: &DVector<f64>) -> f64 {
    let t = lp_penalty_weights(w.as_slice(), p, eps);
    let mut residual = h.transpose() * (h * w) - h.transpose() * DVector::from_element(h.nrows(), 1.0);
    for j in 0..w.len() {
        residual[j] += beta * t[j] * w[j];
    }
    residual.amax()
}

/// Positive-part data term `(1/2) | S^(1/2) max(0, e - H u) |^2`.
///
/// Rows whose margin already clears 1 contribute nothing.
pub fn hinge_phi(h: &DMatrix<f64>, class_w: &DVector<f64>, u: &DVector<f64>) -> f64 {
    let margins = h * u;
    margins
        .iter()
        .zip(class_w.iter())
        .map(|(&mi, &si)| {
            let y = (1.0 - mi).max(0.0);
            0.5 * si * y * y
        })
        .sum()
}

/// Gradient of [`hinge_phi`]: `-H^T S max(0, e - H u)`.
pub fn hinge_phi_gradient(
    h: &DMatrix<f64>,
    class_w: &DVector<f64>,
    u: &DVector<f64>,
) -> DVector<f64> {
    let n = h.nrows();
    let margins = h * u;
    let weighted = DVector::from_iterator(
        n,
        (0..n).map(|i| class_w[i] * (1.0 - margins[i]).max(0.0)),
    );
    -(h.transpose() * weighted)
}
