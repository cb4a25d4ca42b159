//! Best-response and equilibrium solvers.
//!
//! The system's best response to a fixed jamming distribution is always a
//! water-filling threshold rule; its threshold is the unique root of the
//! residual `beta - g(beta, f) / 2`. The residual is `-E[A^2] / (2 E[A]) < 0`
//! at zero, equals `beta / 2 > 0` at the support maximum and beyond, and has
//! slope exactly 1 at any root (the derivative of `g / 2` vanishes there), so
//! bisection on `[0, support_max]` always converges to the single crossing.
//!
//! The saddle point has a closed form: the attacker mixes the extremes,
//! `f* = (1 - rho) delta(0) + rho delta(a_max)` with `rho = a_avg / a_max`,
//! and the equilibrium threshold solves the quadratic
//! `(1 - rho) beta^2 + 2 a_avg beta - a_avg a_max = 0`.

use serde::Serialize;

use crate::age::{average_age, br_residual, AgeValue};
use crate::error::{Error, Result};
use crate::model::{GameConfig, JamDistribution, SamplingPolicy};

/// Default residual tolerance for the best-response bisection.
pub const DEFAULT_BR_TOL: f64 = 1e-10;

/// Iteration cap for the bisection; 200 halvings exhaust f64 resolution.
pub const BR_MAX_ITERATIONS: usize = 200;

/// Grid size of the diagnostic residual scan used by verification.
pub const RESIDUAL_SCAN_POINTS: usize = 1000;

/// Water-filling best response to `dist`: the threshold policy whose
/// fixed-point residual is within `tol` of zero.
pub fn best_response(dist: &JamDistribution, tol: f64) -> Result<SamplingPolicy> {
    let (beta, _) = solve_threshold(dist, tol)?;
    Ok(SamplingPolicy::Threshold { beta })
}

/// Bisection for the best-response threshold. Returns the root and the
/// number of iterations spent.
pub(crate) fn solve_threshold(dist: &JamDistribution, tol: f64) -> Result<(f64, usize)> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    let mut lo = 0.0;
    let mut hi = dist.support_max();
    if hi <= 0.0 {
        // All mass at zero: no positive stage length without waiting.
        return Err(Error::ZeroStageLength);
    }
    let r_lo = br_residual(lo, dist).unwrap_or(f64::NEG_INFINITY);
    let r_hi = br_residual(hi, dist)?;
    if r_lo.abs() <= tol {
        return Ok((lo, 0));
    }
    if r_hi.abs() <= tol {
        return Ok((hi, 0));
    }
    if r_lo > 0.0 || r_hi < 0.0 {
        return Err(Error::NoBracket);
    }
    for iteration in 1..=BR_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let r = br_residual(mid, dist)?;
        if r.abs() <= tol {
            return Ok((mid, iteration));
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    Err(Error::NoConvergence {
        iterations: BR_MAX_ITERATIONS,
        residual: br_residual(mid, dist)?,
    })
}

/// Counts sign changes of the residual over an even scan of
/// `[0, support_max]`. The residual theory says exactly one; any more would
/// flag a numerical defect.
pub fn residual_sign_changes(dist: &JamDistribution, points: usize) -> Result<usize> {
    let hi = dist.support_max();
    if hi <= 0.0 || points < 2 {
        return Ok(0);
    }
    let step = hi / (points - 1) as f64;
    let mut changes = 0;
    let mut previous: Option<f64> = None;
    for i in 0..points {
        let beta = if i + 1 == points { hi } else { i as f64 * step };
        // The lone undefined point (beta = 0 against a zero atom carrying all
        // mass) cannot occur here because hi > 0 implies mass above zero.
        let r = br_residual(beta, dist)?;
        if r == 0.0 {
            continue;
        }
        if let Some(p) = previous {
            if p * r < 0.0 {
                changes += 1;
            }
        }
        previous = Some(r);
    }
    Ok(changes)
}

/// Closed-form saddle-point threshold
/// `beta* = sqrt(a_avg) / (sqrt(a_max) + sqrt(a_avg)) * a_max`.
pub fn beta_star_closed_form(cfg: &GameConfig) -> f64 {
    let sa = cfg.a_avg().sqrt();
    let sm = cfg.a_max().sqrt();
    sa / (sm + sa) * cfg.a_max()
}

/// The stable root of the equilibrium quadratic
/// `(1 - rho) beta^2 + 2 a_avg beta - a_avg a_max = 0`, written as
/// `a_avg a_max / (a_avg + sqrt(a_avg^2 + (1 - rho) a_avg a_max))` so the
/// degenerate case `rho = 1` (the quadratic collapses to a linear equation
/// with root `a_max / 2`) needs no branch. Algebraically identical to
/// [`beta_star_closed_form`]; computing both is a cheap cross-check.
pub fn beta_star_quadratic(cfg: &GameConfig) -> f64 {
    let a = cfg.a_avg();
    let m = cfg.a_max();
    let rho = cfg.jam_fraction();
    a * m / (a + (a * a + (1.0 - rho) * a * m).sqrt())
}

/// Residuals of the defining equilibrium identities, all of which should sit
/// at rounding level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumResiduals {
    /// `beta* - g(beta*, f*) / 2`.
    pub fixed_point: f64,
    /// The equilibrium quadratic evaluated at `beta*`.
    pub quadratic: f64,
    /// `a_avg - E[A]` under `f*`; the budget binds at equilibrium.
    pub mean_slack: f64,
}

/// The stationary saddle point of a game configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSolution {
    pub config: GameConfig,
    pub dist: JamDistribution,
    pub policy: SamplingPolicy,
    pub beta_star: f64,
    /// Time-average age at the saddle point; numerically equal to
    /// `beta_star` by the fixed-point identity.
    pub age: AgeValue,
    pub residuals: EquilibriumResiduals,
}

/// Computes the saddle point of `cfg` and checks its defining identities.
pub fn equilibrium(cfg: &GameConfig) -> Result<EquilibriumSolution> {
    let rho = cfg.jam_fraction();
    let dist = JamDistribution::new(
        vec![(0.0, 1.0 - rho), (cfg.a_max(), rho)],
        Vec::new(),
    )?;
    let beta_star = beta_star_closed_form(cfg);
    let policy = SamplingPolicy::Threshold { beta: beta_star };
    let age = average_age(&dist, &policy)?;
    let residuals = EquilibriumResiduals {
        fixed_point: br_residual(beta_star, &dist)?,
        quadratic: (1.0 - rho) * beta_star * beta_star + 2.0 * cfg.a_avg() * beta_star
            - cfg.a_avg() * cfg.a_max(),
        mean_slack: cfg.a_avg() - dist.mean(),
    };
    if residuals.fixed_point.abs() > 1e-9 {
        return Err(Error::BrokenInvariant(format!(
            "fixed-point residual {:e} at beta* = {beta_star}",
            residuals.fixed_point
        )));
    }
    if residuals.quadratic.abs() > 1e-9 * cfg.a_max().max(1.0).powi(2) {
        return Err(Error::BrokenInvariant(format!(
            "quadratic residual {:e} at beta* = {beta_star}",
            residuals.quadratic
        )));
    }
    Ok(EquilibriumSolution {
        config: *cfg,
        dist,
        policy,
        beta_star,
        age,
        residuals,
    })
}

/// One named verification check with its measured residual.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationCheck {
    pub name: &'static str,
    pub residual: f64,
    pub pass: bool,
}

/// Independent re-derivation of an equilibrium solution.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<VerificationCheck>,
    /// Sign changes of the residual beyond the expected single crossing,
    /// from a [`RESIDUAL_SCAN_POINTS`]-point scan.
    pub extra_sign_changes: usize,
    pub pass: bool,
}

/// Re-checks a claimed equilibrium from first principles: attacker
/// feasibility with a binding budget, the fixed-point identity, threshold
/// interiority, agreement between the closed form and the quadratic, and
/// agreement with an independent bisection against the claimed distribution.
pub fn verify_equilibrium(solution: &EquilibriumSolution, tol: f64) -> Result<VerificationReport> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    let cfg = &solution.config;
    let mut checks = Vec::with_capacity(5);

    let feas = solution.dist.check_feasibility(cfg);
    let mean_gap = (feas.mean - cfg.a_avg()).abs();
    checks.push(VerificationCheck {
        name: "attacker_feasible_budget_binding",
        residual: mean_gap,
        pass: feas.feasible && mean_gap <= 1e-12 * cfg.a_avg().max(1.0),
    });

    let fixed_point = br_residual(solution.beta_star, &solution.dist)?;
    checks.push(VerificationCheck {
        name: "fixed_point_residual",
        residual: fixed_point,
        pass: fixed_point.abs() <= tol,
    });

    let interior = solution.beta_star > 0.0 && solution.beta_star < cfg.a_max();
    checks.push(VerificationCheck {
        name: "threshold_interior",
        residual: solution.beta_star,
        pass: interior,
    });

    let quad_gap = solution.beta_star - beta_star_quadratic(cfg);
    checks.push(VerificationCheck {
        name: "closed_form_matches_quadratic",
        residual: quad_gap,
        pass: quad_gap.abs() <= tol,
    });

    let bisect_gap = match solve_threshold(&solution.dist, DEFAULT_BR_TOL.min(tol)) {
        Ok((beta, _)) => beta - solution.beta_star,
        Err(_) => f64::INFINITY,
    };
    checks.push(VerificationCheck {
        name: "bisection_agrees",
        residual: bisect_gap,
        pass: bisect_gap.abs() <= tol.max(1e-9),
    });

    let extra_sign_changes =
        residual_sign_changes(&solution.dist, RESIDUAL_SCAN_POINTS)?.saturating_sub(1);
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        checks,
        extra_sign_changes,
        pass,
    })
}
