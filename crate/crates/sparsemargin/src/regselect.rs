//! Choice rules for the Tikhonov parameter `beta`.
//!
//! Both rules treat the solver as a black box supplied by the caller: a
//! closure mapping `beta` to the data-fit value `phi(u_beta)` (and, for the
//! balancing rule, the penalty value `psi(u_beta)`). That way the same
//! selector serves the proximal SVM (`phi = (1/2)|Hu-e|^2`,
//! `psi = (1/2)|u|^2`) and the sparse solver (`phi` with class weights and
//! positive part, `psi = |w|_p^p + (1/2) gamma^2`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the balancing fixed-point iteration
/// `beta_{k+1} = (phi_k + beta_tilde0) / (mu (psi_k + beta_tilde1))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancingConfig {
    /// Ratio statistic of the two Gamma hyperpriors; supplied by the caller.
    pub mu: f64,
    /// Initial guess `beta_0`.
    pub beta0: f64,
    /// Relative tolerance on successive iterates.
    pub tol: f64,
    pub max_iter: usize,
    /// Shift added to `phi` in the update (Gamma-prior rate), usually 0.
    pub beta_tilde0: f64,
    /// Shift added to `psi` in the update, usually 0.
    pub beta_tilde1: f64,
}

impl Default for BalancingConfig {
    fn default() -> Self {
        BalancingConfig {
            mu: 1.0,
            beta0: 1.0,
            tol: 1e-4,
            max_iter: 30,
            beta_tilde0: 0.0,
            beta_tilde1: 0.0,
        }
    }
}

impl BalancingConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || self.mu <= 0.0 {
            return Err(Error::InvalidConfig(format!("mu must be positive, got {}", self.mu)));
        }
        if !self.beta0.is_finite() || self.beta0 <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "beta0 must be positive, got {}",
                self.beta0
            )));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if self.beta_tilde0 < 0.0 || self.beta_tilde1 < 0.0 {
            return Err(Error::InvalidConfig("Gamma-prior shifts must be nonnegative".into()));
        }
        Ok(())
    }
}

/// One probed point of the balancing trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalancingStep {
    pub beta: f64,
    pub phi: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancingResult {
    pub beta: f64,
    pub trajectory: Vec<BalancingStep>,
    pub converged: bool,
    /// Set when a 2-cycle was detected and the last two iterates averaged.
    pub oscillation_damped: bool,
}

/// Run the balancing fixed point from `config.beta0`.
///
/// `solve` maps a candidate `beta` to `(phi(u_beta), psi(u_beta))`. Iterates
/// until `|beta_{k+1} - beta_k| <= tol * beta_k` or `max_iter` probes, and
/// returns the last update together with the full probed trajectory.
pub fn balancing_select<F>(mut solve: F, config: &BalancingConfig) -> Result<BalancingResult>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    config.validate()?;
    let mut trajectory: Vec<BalancingStep> = Vec::new();
    let mut beta = config.beta0;
    let mut converged = false;
    let mut oscillation_damped = false;

    for _ in 0..config.max_iter {
        let (phi, psi) = solve(beta)?;
        if !phi.is_finite() || !psi.is_finite() || phi < 0.0 {
            return Err(Error::Selection(format!(
                "solver returned phi={phi}, psi={psi} at beta={beta}; need finite phi >= 0"
            )));
        }
        let denominator = config.mu * (psi + config.beta_tilde1);
        if denominator <= 0.0 {
            return Err(Error::Selection(format!(
                "psi + beta_tilde1 = {} at beta={beta}: balancing update undefined",
                psi + config.beta_tilde1
            )));
        }
        trajectory.push(BalancingStep { beta, phi, psi });
        let next = (phi + config.beta_tilde0) / denominator;
        if !next.is_finite() || next <= 0.0 {
            return Err(Error::Selection(format!(
                "balancing update produced beta={next}"
            )));
        }

        // A 2-cycle shows up as beta_{k+1} returning to beta_{k-1} while
        // beta_k sits materially elsewhere; average the two and stop.
        if trajectory.len() >= 2 {
            let prev = trajectory[trajectory.len() - 2].beta;
            if (next - prev).abs() <= 1e-6 * prev.abs() && (next - beta).abs() > 1e-2 * next.abs()
            {
                beta = 0.5 * (beta + next);
                oscillation_damped = true;
                break;
            }
        }

        let done = (next - beta).abs() <= config.tol * beta;
        beta = next;
        if done {
            converged = true;
            break;
        }
    }

    Ok(BalancingResult {
        beta,
        trajectory,
        converged,
        oscillation_damped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorozovResult {
    pub beta: f64,
    /// Data-fit value at the returned `beta`.
    pub phi: f64,
    /// Number of solver probes spent.
    pub probes: usize,
    pub converged: bool,
    /// False when the probes contradicted a monotone discrepancy curve; the
    /// best bracketed point found is returned in that case.
    pub monotone: bool,
}

/// Morozov discrepancy principle by bisection.
///
/// Seeks `beta` with `phi(u_beta) = delta^2 / 2`; `phi` here is half the
/// squared residual norm, so the target carries the same scaling. The
/// bracket `(beta_lo, beta_hi)` must straddle the target level.
pub fn morozov_select<F>(
    mut solve: F,
    delta: f64,
    bracket: (f64, f64),
    tol: f64,
    max_iter: usize,
) -> Result<MorozovResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidConfig(format!("delta must be positive, got {delta}")));
    }
    let (mut lo, mut hi) = bracket;
    if !lo.is_finite() || !hi.is_finite() || lo <= 0.0 || hi <= lo {
        return Err(Error::InvalidConfig(format!(
            "bracket must satisfy 0 < beta_lo < beta_hi, got ({lo}, {hi})"
        )));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidConfig(format!("tol must be positive, got {tol}")));
    }
    let target = delta * delta / 2.0;

    let mut phi_lo = solve(lo)?;
    let mut phi_hi = solve(hi)?;
    let mut probes = 2;
    if !phi_lo.is_finite() || !phi_hi.is_finite() {
        return Err(Error::Selection("discrepancy probe returned a non-finite value".into()));
    }
    if (phi_lo - target) * (phi_hi - target) > 0.0 {
        return Err(Error::Selection(format!(
            "bracket does not straddle the discrepancy level: phi({lo}) = {phi_lo}, phi({hi}) = {phi_hi}, target = {target}"
        )));
    }
    // Discrepancy normally grows with beta; handle either orientation.
    let increasing = phi_hi >= phi_lo;

    let mut best = if (phi_lo - target).abs() <= (phi_hi - target).abs() {
        (lo, phi_lo)
    } else {
        (hi, phi_hi)
    };
    let mut monotone = true;

    while probes < max_iter.max(3) {
        let mid = 0.5 * (lo + hi);
        let phi_mid = solve(mid)?;
        probes += 1;
        if !phi_mid.is_finite() {
            return Err(Error::Selection("discrepancy probe returned a non-finite value".into()));
        }
        if (phi_mid - target).abs() < (best.1 - target).abs() {
            best = (mid, phi_mid);
        }
        if (phi_mid - target).abs() <= tol * target {
            return Ok(MorozovResult {
                beta: mid,
                phi: phi_mid,
                probes,
                converged: true,
                monotone,
            });
        }
        let lo_bound = phi_lo.min(phi_hi);
        let hi_bound = phi_lo.max(phi_hi);
        if phi_mid < lo_bound - 1e-12 * (1.0 + lo_bound.abs())
            || phi_mid > hi_bound + 1e-12 * (1.0 + hi_bound.abs())
        {
            // The curve left the bracket's range: not monotone. Stop and
            // hand back the best bracketed point.
            monotone = false;
            break;
        }
        if (phi_mid > target) == increasing {
            hi = mid;
            phi_hi = phi_mid;
        } else {
            lo = mid;
            phi_lo = phi_mid;
        }
    }

    let converged = (best.1 - target).abs() <= tol * target;
    Ok(MorozovResult {
        beta: best.0,
        phi: best.1,
        probes,
        converged,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_map_fixes_after_one_step() {
        let config = BalancingConfig {
            mu: 2.0,
            ..BalancingConfig::default()
        };
        let result = balancing_select(|_| Ok((2.0, 1.0)), &config).unwrap();
        assert!((result.beta - 1.0).abs() < 1e-15);
        assert!(result.converged);
        assert!(!result.oscillation_damped);
        assert!(result.trajectory.len() <= config.max_iter + 1);
    }

    #[test]
    fn scaling_mu_inversely_scales_beta_for_constant_maps() {
        let pick = |mu: f64| {
            let config = BalancingConfig {
                mu,
                ..BalancingConfig::default()
            };
            balancing_select(|_| Ok((3.0, 0.5)), &config).unwrap().beta
        };
        let base = pick(1.0);
        for c in [2.0, 5.0, 0.25] {
            assert!((pick(c) - base / c).abs() < 1e-12 * base);
        }
    }

    #[test]
    fn balancing_rejects_vanishing_psi() {
        let err = balancing_select(|_| Ok((1.0, 0.0)), &BalancingConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Selection(_)));
    }

    #[test]
    fn balancing_converges_on_a_contracting_map() {
        // phi/psi chosen so the update is beta/2 + 1, with fixed point 2.
        let result = balancing_select(
            |beta| Ok((beta / 2.0 + 1.0, 1.0)),
            &BalancingConfig {
                tol: 1e-10,
                max_iter: 100,
                ..BalancingConfig::default()
            },
        )
        .unwrap();
        assert!(result.converged);
        assert!((result.beta - 2.0).abs() < 1e-8);
    }

    #[test]
    fn balancing_damps_a_two_cycle() {
        // Map beta -> 1/beta oscillates between beta0 and 1/beta0.
        let result = balancing_select(
            |beta| Ok((1.0 / beta, 1.0)),
            &BalancingConfig {
                beta0: 4.0,
                max_iter: 30,
                ..BalancingConfig::default()
            },
        )
        .unwrap();
        assert!(result.oscillation_damped);
        assert!(result.beta > 0.0 && result.beta.is_finite());
    }

    #[test]
    fn morozov_identity_stub_recovers_target() {
        // phi(beta) = beta, target = 0.5^2... the target here is delta^2/2.
        let delta = 1.0;
        let result = morozov_select(Ok, delta, (0.1, 10.0), 1e-6, 200).unwrap();
        assert!(result.converged);
        assert!((result.beta - 0.5).abs() < 1e-5);
        assert!(result.monotone);
    }

    #[test]
    fn morozov_rejects_non_straddling_bracket() {
        let err = morozov_select(|_| Ok(0.1), 1.0, (1.0, 2.0), 1e-6, 50).unwrap_err();
        assert!(matches!(err, Error::Selection(_)));
    }

    #[test]
    fn morozov_flags_non_monotone_curves() {
        // Dips far below both endpoints in the middle of the bracket.
        let result = morozov_select(
            |beta| Ok(if (0.4..0.6).contains(&beta) { -5.0 } else { beta }),
            1.0,
            (0.01, 1.0),
            1e-12,
            60,
        )
        .unwrap();
        assert!(!result.monotone);
        assert!(result.beta > 0.0);
    }

    #[test]
    fn trajectory_never_exceeds_probe_budget() {
        // Wild map that never converges.
        let config = BalancingConfig {
            max_iter: 7,
            tol: 1e-15,
            ..BalancingConfig::default()
        };
        let mut k = 0.0;
        let result = balancing_select(
            |_| {
                k += 1.0;
                Ok((1.0 + k * 10.0, 1.0))
            },
            &config,
        )
        .unwrap();
        assert!(!result.converged);
        assert!(result.trajectory.len() <= config.max_iter + 1);
        assert!(result.beta.is_finite() && result.beta > 0.0);
    }
}
