//! Brute-force adversary search and saddle-point verification.
//!
//! The closed-form equilibrium claims the attacker can do no better than the
//! two-extreme mixture. This module attacks that claim numerically: it
//! enumerates finite families of feasible jamming distributions on a grid,
//! pits each one against the system's best response, and checks that none
//! beats the equilibrium age. It also probes the two analytical pillars
//! behind uniqueness: positivity and slope of the residual above the
//! equilibrium threshold, and maximality of the clipped-moment ratio at the
//! equilibrium mixture.
//!
//! Every search is deterministic regardless of thread count: candidates fold
//! into per-branch accumulators that merge under a total order (age, then
//! variance, then lexicographic support), so the reduction tree shape cannot
//! change the winner.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::age::{average_age, br_residual, clipped_pair, g_ratio, AgeValue};
use crate::error::{Error, Result};
use crate::model::{total_variation, GameConfig, JamDistribution, SamplingPolicy, PROB_TOL};
use crate::solver::{beta_star_closed_form, equilibrium, solve_threshold, DEFAULT_BR_TOL};

/// Slack on slope comparisons against the theoretical bound of 1/2.
pub const SLOPE_TOL: f64 = 1e-6;

/// Slack on maximality comparisons of the clipped-moment ratio.
pub const LEMMA5_TOL: f64 = 1e-9;

/// Finite-difference step for local residual slopes.
const FD_STEP: f64 = 1e-5;

/// Candidate families the brute-force search can enumerate.
///
/// `TwoPoint` and `ThreePoint` saturate the mean budget by construction
/// (plus sub-budget singletons in the two-point case); `SimplexGrid` sweeps
/// every mass vector on the support grid with mean at most the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridFamily {
    TwoPoint,
    ThreePoint,
    SimplexGrid,
}

/// Discretization of the attacker's strategy space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchGrid {
    family: GridFamily,
    support_step: f64,
    mass_step: f64,
    ticks: u64,
}

impl SearchGrid {
    /// `support_step` must be positive and divide `a_max` (checked per
    /// config); `mass_step` must be a reciprocal integer in `(0, 1]`.
    pub fn new(family: GridFamily, support_step: f64, mass_step: f64) -> Result<Self> {
        if !support_step.is_finite() || support_step <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "support step {support_step} must be positive and finite"
            )));
        }
        if !mass_step.is_finite() || mass_step <= 0.0 || mass_step > 1.0 {
            return Err(Error::InvalidGrid(format!(
                "mass step {mass_step} must lie in (0, 1]"
            )));
        }
        let ticks = (1.0 / mass_step).round();
        if (1.0 / mass_step - ticks).abs() > 1e-6 {
            return Err(Error::InvalidGrid(format!(
                "mass step {mass_step} is not the reciprocal of an integer"
            )));
        }
        Ok(SearchGrid {
            family,
            support_step,
            mass_step,
            ticks: ticks as u64,
        })
    }

    pub fn family(&self) -> GridFamily {
        self.family
    }

    pub fn support_step(&self) -> f64 {
        self.support_step
    }

    pub fn mass_step(&self) -> f64 {
        self.mass_step
    }

    /// Mass ticks per unit: masses are multiples of `1 / ticks`.
    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    /// The support lattice `{0, step, 2 step, ..., a_max}`. The step must
    /// divide `a_max` to within `1e-9` so the lattice ends exactly at the
    /// support cap.
    pub fn support_points(&self, cfg: &GameConfig) -> Result<Vec<f64>> {
        let count = (cfg.a_max() / self.support_step).round();
        if !count.is_finite() || count < 1.0 {
            return Err(Error::InvalidGrid(format!(
                "support step {} is larger than a_max {}",
                self.support_step,
                cfg.a_max()
            )));
        }
        let n = count as usize;
        if (count * self.support_step - cfg.a_max()).abs() > 1e-9 * cfg.a_max().max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "support step {} does not divide a_max {}",
                self.support_step,
                cfg.a_max()
            )));
        }
        let mut points: Vec<f64> = (0..n).map(|i| i as f64 * self.support_step).collect();
        points.push(cfg.a_max());
        Ok(points)
    }
}

/// Canned grid resolutions: a fast profile for routine runs and a finer one
/// for overnight searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchProfile {
    Ci,
    Deep,
}

impl SearchProfile {
    fn mass_step(&self) -> f64 {
        match self {
            SearchProfile::Ci => 1.0 / 64.0,
            SearchProfile::Deep => 1.0 / 256.0,
        }
    }

    /// Two-point grid: fine support, mean-determined masses.
    pub fn two_point_grid(&self, cfg: &GameConfig) -> Result<SearchGrid> {
        let divisor = match self {
            SearchProfile::Ci => 16.0,
            SearchProfile::Deep => 64.0,
        };
        SearchGrid::new(GridFamily::TwoPoint, cfg.a_max() / divisor, self.mass_step())
    }

    /// Simplex grid: coarse five-point support, free mass vectors. The
    /// support stays coarse because the candidate count grows combinatorially
    /// in the number of support points.
    pub fn simplex_grid(&self, cfg: &GameConfig) -> Result<SearchGrid> {
        SearchGrid::new(GridFamily::SimplexGrid, cfg.a_max() / 4.0, self.mass_step())
    }
}

// ---------------------------------------------------------------------------
// Candidate enumeration and deterministic argmax
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Objective {
    /// Time-average age under the system's best response.
    BestResponseAge,
    /// Clipped-moment ratio `g(beta, f)` at a fixed threshold.
    GValue(f64),
}

#[derive(Debug, Clone)]
struct Candidate {
    atoms: Vec<(f64, f64)>,
    score: f64,
    beta: f64,
    variance: f64,
}

/// Total order used for the argmax: higher score, then higher variance, then
/// lexicographically smaller canonical support. Distinct candidates never
/// compare equal, so any reduction tree yields the same winner.
fn prefer(a: &Candidate, b: &Candidate) -> Ordering {
    a.score
        .total_cmp(&b.score)
        .then_with(|| a.variance.total_cmp(&b.variance))
        .then_with(|| lex_cmp(&b.atoms, &a.atoms))
}

fn lex_cmp(a: &[(f64, f64)], b: &[(f64, f64)]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let c = x.0.total_cmp(&y.0).then_with(|| x.1.total_cmp(&y.1));
        if c != Ordering::Equal {
            return c;
        }
    }
    a.len().cmp(&b.len())
}

#[derive(Default)]
struct SearchAcc {
    best: Option<Candidate>,
    second: Option<Candidate>,
    evaluated: u64,
    skipped: u64,
    /// Candidates scoring at least the floor, when a floor is set.
    near: Vec<Candidate>,
}

impl SearchAcc {
    fn offer(&mut self, c: Candidate) {
        match &self.best {
            None => self.best = Some(c),
            Some(b) => {
                if prefer(&c, b) == Ordering::Greater {
                    let old = self.best.replace(c);
                    if let (Some(old), Some(best)) = (old, &self.best) {
                        if old.atoms != best.atoms {
                            self.offer_second(old);
                        }
                    }
                } else if c.atoms != b.atoms {
                    self.offer_second(c);
                }
            }
        }
    }

    fn offer_second(&mut self, c: Candidate) {
        match &self.second {
            None => self.second = Some(c),
            Some(s) => {
                if prefer(&c, s) == Ordering::Greater {
                    self.second = Some(c);
                }
            }
        }
    }

    fn merge(&mut self, other: SearchAcc) {
        self.evaluated += other.evaluated;
        self.skipped += other.skipped;
        self.near.extend(other.near);
        if let Some(b) = other.best {
            self.offer(b);
        }
        if let Some(s) = other.second {
            self.offer(s);
        }
    }
}

fn internal<T>(result: Result<T>, what: &str) -> Result<T> {
    result.map_err(|e| Error::BrokenInvariant(format!("{what}: {e}")))
}

/// Scores one candidate atom list. `Ok(None)` marks a candidate skipped
/// because its objective is undefined (all mass at zero with a zero
/// threshold).
fn evaluate(atoms: &[(f64, f64)], objective: Objective) -> Result<Option<Candidate>> {
    let dist = internal(
        JamDistribution::new(atoms.to_vec(), Vec::new()),
        "grid candidate failed canonicalization",
    )?;
    let (score, beta) = match objective {
        Objective::BestResponseAge => {
            if dist.support_max() <= 0.0 {
                return Ok(None);
            }
            let (beta, _) = internal(
                solve_threshold(&dist, DEFAULT_BR_TOL),
                "candidate best response diverged",
            )?;
            let age = internal(
                average_age(&dist, &SamplingPolicy::Threshold { beta }),
                "candidate age undefined",
            )?;
            (age.as_time_average(), beta)
        }
        Objective::GValue(b) => match g_ratio(b, &dist) {
            Ok(g) => (g, b),
            Err(Error::ZeroStageLength) => return Ok(None),
            Err(e) => return Err(e),
        },
    };
    let mean = dist.mean();
    let second_moment = clipped_pair(&dist, 0.0).1;
    Ok(Some(Candidate {
        atoms: dist.atoms().to_vec(),
        score,
        beta,
        variance: second_moment - mean * mean,
    }))
}

fn fold_candidate(
    acc: &mut SearchAcc,
    atoms: &[(f64, f64)],
    objective: Objective,
    near_floor: Option<f64>,
) -> Result<()> {
    match evaluate(atoms, objective)? {
        None => acc.skipped += 1,
        Some(c) => {
            acc.evaluated += 1;
            if let Some(floor) = near_floor {
                if c.score >= floor {
                    acc.near.push(c.clone());
                }
            }
            acc.offer(c);
        }
    }
    Ok(())
}

/// Two-point family, branch `i`: the singleton `delta(a_i)` when it fits the
/// budget, plus every mean-saturating pair `(a_i, a_j)` with `a_i <= a_avg
/// <= a_j`.
fn enumerate_two_point(
    support: &[f64],
    cfg: &GameConfig,
    i: usize,
    objective: Objective,
    near_floor: Option<f64>,
    acc: &mut SearchAcc,
) -> Result<()> {
    let a_i = support[i];
    if a_i > cfg.a_avg() + PROB_TOL {
        return Ok(());
    }
    fold_candidate(acc, &[(a_i, 1.0)], objective, near_floor)?;
    for &a_j in &support[i + 1..] {
        let mass_hi = (cfg.a_avg() - a_i) / (a_j - a_i);
        if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&mass_hi) {
            continue;
        }
        let mass_hi = mass_hi.clamp(0.0, 1.0);
        fold_candidate(
            acc,
            &[(a_i, 1.0 - mass_hi), (a_j, mass_hi)],
            objective,
            near_floor,
        )?;
    }
    Ok(())
}

/// Three-point family, branch `i`: supports `a_i < a_j < a_k`, middle mass
/// swept over the mass lattice, outer masses solved from mean equality.
fn enumerate_three_point(
    support: &[f64],
    cfg: &GameConfig,
    ticks: u64,
    i: usize,
    objective: Objective,
    near_floor: Option<f64>,
    acc: &mut SearchAcc,
) -> Result<()> {
    let a_i = support[i];
    if a_i > cfg.a_avg() + PROB_TOL {
        return Ok(());
    }
    for j in i + 1..support.len() {
        for k in j + 1..support.len() {
            let (a_j, a_k) = (support[j], support[k]);
            for t in 0..=ticks {
                let m_j = t as f64 / ticks as f64;
                let rest = 1.0 - m_j;
                if rest <= PROB_TOL {
                    continue;
                }
                let m_k = (cfg.a_avg() - m_j * a_j - rest * a_i) / (a_k - a_i);
                if !(-PROB_TOL..=rest + PROB_TOL).contains(&m_k) {
                    continue;
                }
                let m_k = m_k.clamp(0.0, rest);
                let atoms = [(a_i, rest - m_k), (a_j, m_j), (a_k, m_k)];
                fold_candidate(acc, &atoms, objective, near_floor)?;
            }
        }
    }
    Ok(())
}

/// Full simplex sweep, positions filled from the largest support point down
/// so the running mean prunes whole subtrees. `idx` is the position being
/// filled, `remaining` the unassigned ticks.
#[allow(clippy::too_many_arguments)]
fn enumerate_simplex(
    support: &[f64],
    cfg: &GameConfig,
    ticks: u64,
    idx: usize,
    remaining: u64,
    partial_mean: f64,
    stack: &mut Vec<(f64, f64)>,
    objective: Objective,
    near_floor: Option<f64>,
    acc: &mut SearchAcc,
) -> Result<()> {
    if idx == 0 {
        // The lattice starts at zero, so dumping the remaining ticks there
        // never raises the mean.
        let mut atoms = stack.clone();
        if remaining > 0 {
            atoms.push((support[0], remaining as f64 / ticks as f64));
        }
        if atoms.is_empty() {
            return Ok(());
        }
        return fold_candidate(acc, &atoms, objective, near_floor);
    }
    let loc = support[idx];
    for t in 0..=remaining {
        let mean = partial_mean + loc * t as f64 / ticks as f64;
        if mean > cfg.a_avg() + PROB_TOL {
            break;
        }
        if t > 0 {
            stack.push((loc, t as f64 / ticks as f64));
        }
        enumerate_simplex(
            support,
            cfg,
            ticks,
            idx - 1,
            remaining - t,
            mean,
            stack,
            objective,
            near_floor,
            acc,
        )?;
        if t > 0 {
            stack.pop();
        }
    }
    Ok(())
}

/// Runs the family enumeration split over top-level branches in parallel and
/// merges the per-branch accumulators in branch order.
fn run_search(
    cfg: &GameConfig,
    grid: &SearchGrid,
    objective: Objective,
    near_floor: Option<f64>,
) -> Result<SearchAcc> {
    let support = grid.support_points(cfg)?;
    let branches: Vec<usize> = match grid.family {
        GridFamily::TwoPoint | GridFamily::ThreePoint => (0..support.len()).collect(),
        GridFamily::SimplexGrid => (0..=grid.ticks as usize).collect(),
    };
    let partials: Vec<Result<SearchAcc>> = branches
        .into_par_iter()
        .map(|branch| {
            let mut acc = SearchAcc::default();
            match grid.family {
                GridFamily::TwoPoint => {
                    enumerate_two_point(&support, cfg, branch, objective, near_floor, &mut acc)?
                }
                GridFamily::ThreePoint => enumerate_three_point(
                    &support, cfg, grid.ticks, branch, objective, near_floor, &mut acc,
                )?,
                GridFamily::SimplexGrid => {
                    let top = support.len() - 1;
                    let t = branch as u64;
                    let mean = support[top] * t as f64 / grid.ticks as f64;
                    if mean > cfg.a_avg() + PROB_TOL {
                        return Ok(acc);
                    }
                    let mut stack = Vec::with_capacity(support.len());
                    if t > 0 {
                        stack.push((support[top], t as f64 / grid.ticks as f64));
                    }
                    if top == 0 {
                        fold_candidate(&mut acc, &stack, objective, near_floor)?;
                    } else {
                        enumerate_simplex(
                            &support,
                            cfg,
                            grid.ticks,
                            top - 1,
                            grid.ticks - t,
                            mean,
                            &mut stack,
                            objective,
                            near_floor,
                            &mut acc,
                        )?;
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = SearchAcc::default();
    for partial in partials {
        total.merge(partial?);
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Result of a brute-force search for the attacker's best grid distribution
/// against the system's best response.
#[derive(Debug, Clone, Serialize)]
pub struct AttackSearch {
    pub family: GridFamily,
    pub support_step: f64,
    pub mass_step: f64,
    /// Mean-feasible candidates enumerated, including skipped ones.
    pub candidates: u64,
    /// Candidates with an undefined objective (all mass at zero).
    pub skipped: u64,
    pub best: JamDistribution,
    pub best_beta: f64,
    pub age: AgeValue,
    /// Best score among candidates with a different support than the winner.
    pub runner_up_age: Option<f64>,
    pub runner_up_atoms: Option<Vec<(f64, f64)>>,
}

/// Maximizes the best-response age over the grid family. The theory says the
/// winner can never beat the closed-form equilibrium age and should approach
/// it as the grid refines.
pub fn brute_force_attacker(cfg: &GameConfig, grid: &SearchGrid) -> Result<AttackSearch> {
    let acc = run_search(cfg, grid, Objective::BestResponseAge, None)?;
    let best = acc.best.ok_or_else(|| {
        Error::InvalidGrid("no feasible candidate with positive support".into())
    })?;
    let dist = internal(
        JamDistribution::new(best.atoms.clone(), Vec::new()),
        "winning candidate failed canonicalization",
    )?;
    Ok(AttackSearch {
        family: grid.family,
        support_step: grid.support_step,
        mass_step: grid.mass_step,
        candidates: acc.evaluated + acc.skipped,
        skipped: acc.skipped,
        best: dist,
        best_beta: best.beta,
        age: AgeValue::time_average(best.score),
        runner_up_age: acc.second.as_ref().map(|c| c.score),
        runner_up_atoms: acc.second.map(|c| c.atoms),
    })
}

/// One probe point of the residual above the equilibrium threshold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Lemma4Entry {
    pub beta: f64,
    pub residual: f64,
    /// Finite-difference slope over a step of `1e-5`, clamped to stay inside
    /// `(beta_star, a_max]`.
    pub local_slope: f64,
}

/// Residual behaviour on `(beta_star, a_max]`: positivity and slope above
/// one half, the two facts that make the equilibrium threshold the only
/// root.
#[derive(Debug, Clone, Serialize)]
pub struct Lemma4Report {
    pub beta_star: f64,
    pub entries: Vec<Lemma4Entry>,
    pub min_residual: f64,
    pub min_local_slope: f64,
    /// Minimum difference quotient between consecutive grid points.
    pub min_pairwise_slope: f64,
    pub pass: bool,
}

/// Checks the residual against the equilibrium mixture on `beta_grid`,
/// which must consist of points strictly above `beta_star` and at most
/// `a_max`.
pub fn check_lemma4(cfg: &GameConfig, beta_grid: &[f64]) -> Result<Lemma4Report> {
    let solution = equilibrium(cfg)?;
    let beta_star = solution.beta_star;
    let dist = &solution.dist;
    if beta_grid.is_empty() {
        return Err(Error::InvalidGrid("empty beta grid".into()));
    }
    let mut betas = beta_grid.to_vec();
    for &beta in &betas {
        if !beta.is_finite() || beta <= beta_star || beta > cfg.a_max() {
            return Err(Error::InvalidGrid(format!(
                "beta {beta} lies outside ({beta_star}, {}]",
                cfg.a_max()
            )));
        }
    }
    betas.sort_by(f64::total_cmp);
    betas.dedup();

    let residual = |b: f64| br_residual(b, dist);
    let mut entries = Vec::with_capacity(betas.len());
    for &beta in &betas {
        let r = residual(beta)?;
        let hi = (beta + FD_STEP).min(cfg.a_max());
        let mut lo = beta - FD_STEP;
        if lo <= beta_star {
            lo = beta;
        }
        if hi <= lo {
            lo = beta - FD_STEP;
        }
        let local_slope = (residual(hi)? - residual(lo)?) / (hi - lo);
        entries.push(Lemma4Entry {
            beta,
            residual: r,
            local_slope,
        });
    }
    let min_residual = entries.iter().map(|e| e.residual).fold(f64::INFINITY, f64::min);
    let min_local_slope = entries
        .iter()
        .map(|e| e.local_slope)
        .fold(f64::INFINITY, f64::min);
    let mut min_pairwise_slope = f64::INFINITY;
    for pair in entries.windows(2) {
        let slope = (pair[1].residual - pair[0].residual) / (pair[1].beta - pair[0].beta);
        min_pairwise_slope = min_pairwise_slope.min(slope);
    }
    let pass = min_residual > 0.0
        && min_local_slope > 0.5 - SLOPE_TOL
        && (entries.len() < 2 || min_pairwise_slope > 0.5 - SLOPE_TOL);
    Ok(Lemma4Report {
        beta_star,
        entries,
        min_residual,
        min_local_slope,
        min_pairwise_slope,
        pass,
    })
}

/// Maximality probe of the clipped-moment ratio at one threshold.
#[derive(Debug, Clone, Serialize)]
pub struct Lemma5Report {
    pub beta: f64,
    pub g_equilibrium: f64,
    pub g_best: f64,
    pub best: JamDistribution,
    pub candidates: u64,
    pub skipped: u64,
    /// `g_equilibrium - g_best`; nonnegative up to [`LEMMA5_TOL`] when the
    /// equilibrium mixture is maximal.
    pub margin: f64,
    pub pass: bool,
}

/// Checks that no grid candidate beats the equilibrium mixture's
/// clipped-moment ratio at the threshold `beta` in `[0, a_max]`.
pub fn check_lemma5(cfg: &GameConfig, beta: f64, grid: &SearchGrid) -> Result<Lemma5Report> {
    if !beta.is_finite() || beta < 0.0 || beta > cfg.a_max() {
        return Err(Error::InvalidThreshold(beta));
    }
    let solution = equilibrium(cfg)?;
    let g_equilibrium = g_ratio(beta, &solution.dist)?;
    let acc = run_search(cfg, grid, Objective::GValue(beta), None)?;
    let best = acc.best.ok_or_else(|| {
        Error::InvalidGrid("no feasible candidate with a defined ratio".into())
    })?;
    let dist = internal(
        JamDistribution::new(best.atoms.clone(), Vec::new()),
        "winning candidate failed canonicalization",
    )?;
    let margin = g_equilibrium - best.score;
    Ok(Lemma5Report {
        beta,
        g_equilibrium,
        g_best: best.score,
        best: dist,
        candidates: acc.evaluated + acc.skipped,
        skipped: acc.skipped,
        margin,
        pass: margin >= -LEMMA5_TOL,
    })
}

/// A grid candidate whose best-response age comes within tolerance of the
/// equilibrium age.
#[derive(Debug, Clone, Serialize)]
pub struct NearOptimal {
    pub dist: JamDistribution,
    pub age: f64,
    pub tv_from_equilibrium: f64,
}

/// Support for the uniqueness claim: every near-optimal grid candidate sits
/// within grid resolution of the equilibrium mixture in total variation.
#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub equilibrium_age: f64,
    pub age_tolerance: f64,
    pub grid_best_age: f64,
    pub candidates: u64,
    pub near_optimal: Vec<NearOptimal>,
    pub max_tv_distance: f64,
    pub unique_within_grid: bool,
}

/// Collects all grid candidates within `tol` of the equilibrium age and
/// measures their total-variation distance from the equilibrium mixture.
pub fn uniqueness_probe(cfg: &GameConfig, grid: &SearchGrid, tol: f64) -> Result<UniquenessReport> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    let solution = equilibrium(cfg)?;
    let equilibrium_age = solution.age.as_time_average();
    let acc = run_search(
        cfg,
        grid,
        Objective::BestResponseAge,
        Some(equilibrium_age - tol),
    )?;
    let best = acc.best.ok_or_else(|| {
        Error::InvalidGrid("no feasible candidate with positive support".into())
    })?;
    let mut near = acc.near;
    near.sort_by(|a, b| prefer(b, a));
    let mut near_optimal = Vec::with_capacity(near.len());
    let mut max_tv = 0.0_f64;
    for c in near {
        let dist = internal(
            JamDistribution::new(c.atoms, Vec::new()),
            "near-optimal candidate failed canonicalization",
        )?;
        let tv = total_variation(&dist, &solution.dist);
        max_tv = max_tv.max(tv);
        near_optimal.push(NearOptimal {
            dist,
            age: c.score,
            tv_from_equilibrium: tv,
        });
    }
    Ok(UniquenessReport {
        equilibrium_age,
        age_tolerance: tol,
        grid_best_age: best.score,
        candidates: acc.evaluated + acc.skipped,
        max_tv_distance: max_tv,
        unique_within_grid: max_tv <= grid.mass_step + PROB_TOL,
        near_optimal,
    })
}

/// Summary of one family search inside an [`OracleReport`].
#[derive(Debug, Clone, Serialize)]
pub struct SearchSummary {
    pub family: GridFamily,
    pub support_step: f64,
    pub mass_step: f64,
    pub candidates: u64,
    pub skipped: u64,
    pub best_age: f64,
    pub best_beta: f64,
    pub best_atoms: Vec<(f64, f64)>,
    pub runner_up_age: Option<f64>,
    /// `equilibrium_age - best_age`; the equilibrium wins when nonnegative.
    pub advantage: f64,
}

/// Full adversarial audit of one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub schema: String,
    pub a_max: f64,
    pub a_avg: f64,
    pub profile: SearchProfile,
    pub equilibrium_beta: f64,
    pub equilibrium_age: f64,
    pub searches: Vec<SearchSummary>,
    pub lemma4: Lemma4Report,
    pub lemma5: Vec<Lemma5Report>,
    pub uniqueness: UniquenessReport,
    pub pass: bool,
}

/// Runs the standard audit: two-point and simplex searches, a residual probe
/// on a 32-point grid above the threshold, ratio-maximality checks on a
/// spread of thresholds, and the uniqueness probe.
pub fn oracle_report(cfg: &GameConfig, profile: SearchProfile) -> Result<OracleReport> {
    let solution = equilibrium(cfg)?;
    let beta_star = solution.beta_star;
    let equilibrium_age = solution.age.as_time_average();

    let mut searches = Vec::new();
    for grid in [profile.two_point_grid(cfg)?, profile.simplex_grid(cfg)?] {
        let search = brute_force_attacker(cfg, &grid)?;
        let best_age = search.age.as_time_average();
        searches.push(SearchSummary {
            family: search.family,
            support_step: search.support_step,
            mass_step: search.mass_step,
            candidates: search.candidates,
            skipped: search.skipped,
            best_age,
            best_beta: search.best_beta,
            best_atoms: search.best.atoms().to_vec(),
            runner_up_age: search.runner_up_age,
            advantage: equilibrium_age - best_age,
        });
    }

    let span = cfg.a_max() - beta_star;
    let lemma4_grid: Vec<f64> = (1..=32)
        .map(|k| {
            if k == 32 {
                cfg.a_max()
            } else {
                beta_star + span * k as f64 / 32.0
            }
        })
        .collect();
    let lemma4 = check_lemma4(cfg, &lemma4_grid)?;

    let simplex = profile.simplex_grid(cfg)?;
    let mut lemma5_betas = vec![
        0.0,
        cfg.a_max() / 8.0,
        cfg.a_max() / 4.0,
        beta_star,
        cfg.a_max() / 2.0,
        cfg.a_max(),
    ];
    lemma5_betas.sort_by(f64::total_cmp);
    lemma5_betas.dedup();
    let lemma5: Vec<Lemma5Report> = lemma5_betas
        .into_iter()
        .map(|beta| check_lemma5(cfg, beta, &simplex))
        .collect::<Result<_>>()?;

    let uniqueness = uniqueness_probe(cfg, &simplex, 1e-6)?;

    let pass = searches.iter().all(|s| s.advantage >= -LEMMA5_TOL)
        && lemma4.pass
        && lemma5.iter().all(|l| l.pass)
        && uniqueness.unique_within_grid;

    Ok(OracleReport {
        schema: crate::io::SCHEMA_VERSION.to_string(),
        a_max: cfg.a_max(),
        a_avg: cfg.a_avg(),
        profile,
        equilibrium_beta: beta_star,
        equilibrium_age,
        searches,
        lemma4,
        lemma5,
        uniqueness,
        pass,
    })
}

/// Convenience for tests and callers wanting the default threshold set used
/// by [`oracle_report`]'s ratio checks.
pub fn default_lemma5_betas(cfg: &GameConfig) -> Vec<f64> {
    let mut betas = vec![
        0.0,
        cfg.a_max() / 8.0,
        cfg.a_max() / 4.0,
        beta_star_closed_form(cfg),
        cfg.a_max() / 2.0,
        cfg.a_max(),
    ];
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    betas
}
