//! Mixture-sweep experiment: interpolate the attacker between deterministic
//! jamming at the budget and the equilibrium mixture, and track the age under
//! the adaptive best-response policy and under zero-wait sampling.
//!
//! Both mixture components have mean exactly `a_avg`, so every sweep point is
//! a feasible attacker with a binding budget. As `alpha` grows toward the
//! equilibrium mixture both ages increase, and the best-response age stays
//! below the zero-wait age throughout.

use rayon::prelude::*;
use serde::Serialize;

use crate::age::average_age;
use crate::error::{Error, Result};
use crate::model::{mix, GameConfig, JamDistribution, SamplingPolicy};
use crate::sim::simulate;
use crate::solver::{equilibrium, solve_threshold, DEFAULT_BR_TOL};

/// Monte Carlo companion estimates for a sweep: stage count and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimulationSpec {
    pub stages: u64,
    pub seed: u64,
}

/// One row of the sweep: analytic ages under the best-response policy and
/// zero-wait, the best-response threshold, and an optional simulated
/// estimate of the best-response age.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureSweepRow {
    pub alpha: f64,
    pub age_equilibrium_policy: f64,
    pub age_zero_wait: f64,
    pub beta_br: f64,
    pub age_simulated: Option<f64>,
}

/// The interpolated attacker `alpha f* + (1 - alpha) delta(a_avg)`.
pub fn mixture(cfg: &GameConfig, alpha: f64) -> Result<JamDistribution> {
    if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let solution = equilibrium(cfg)?;
    let spike = JamDistribution::point(cfg.a_avg())?;
    mix(&[(solution.dist, alpha), (spike, 1.0 - alpha)])
}

fn sweep_row(
    cfg: &GameConfig,
    alpha: f64,
    sim: Option<SimulationSpec>,
) -> Result<MixtureSweepRow> {
    let dist = mixture(cfg, alpha)?;
    let (beta_br, _) = solve_threshold(&dist, DEFAULT_BR_TOL)?;
    let policy = SamplingPolicy::Threshold { beta: beta_br };
    let age_equilibrium_policy = average_age(&dist, &policy)?.as_time_average();
    let age_zero_wait = average_age(&dist, &SamplingPolicy::ZeroWait)?.as_time_average();
    let age_simulated = match sim {
        // Common seed across rows: the same stage draws drive every alpha.
        Some(spec) => Some(simulate(&dist, &policy, spec.stages, spec.seed)?.age_estimate),
        None => None,
    };
    Ok(MixtureSweepRow {
        alpha,
        age_equilibrium_policy,
        age_zero_wait,
        beta_br,
        age_simulated,
    })
}

/// Computes one [`MixtureSweepRow`] per alpha, in ascending alpha order.
pub fn sweep_mixture(
    cfg: &GameConfig,
    alphas: &[f64],
    sim: Option<SimulationSpec>,
) -> Result<Vec<MixtureSweepRow>> {
    for &alpha in alphas {
        if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidAlpha(alpha));
        }
    }
    let mut sorted = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .into_par_iter()
        .map(|alpha| sweep_row(cfg, alpha, sim))
        .collect()
}
