//! Core domain types: game configuration, mixed jamming-time distributions,
//! and sampling policies.
//!
//! A jamming-time distribution mixes point masses (atoms) with a
//! piecewise-constant density. Construction canonicalizes the parts so that
//! every downstream computation (moments, quantiles, mixtures) can walk the
//! support in a single ordered pass: atoms are sorted and coalesced, pieces
//! are sorted, disjoint, and split at interior atom locations, and the total
//! mass is renormalized to exactly 1 when it lands within a small band.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability bookkeeping tolerance: masses and mean comparisons are exact
/// up to this slack.
pub const PROB_TOL: f64 = 1e-12;

/// Atoms whose locations differ by at most this much coalesce into one.
pub const COALESCE_TOL: f64 = 1e-12;

/// Total input mass must land in `1 +/- NORMALIZE_BAND` to be renormalized;
/// anything further off is rejected as malformed rather than silently fixed.
pub const NORMALIZE_BAND: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Game configuration
// ---------------------------------------------------------------------------

/// Attacker resource model: each stage's jamming time is drawn i.i.d. from a
/// distribution supported on `[0, a_max]` with mean at most `a_avg`.
///
/// Invariant: `0 < a_avg <= a_max`, both finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameConfig {
    a_max: f64,
    a_avg: f64,
}

impl GameConfig {
    pub fn new(a_max: f64, a_avg: f64) -> Result<Self> {
        if !a_max.is_finite() || !a_avg.is_finite() {
            return Err(Error::NonFiniteConfig { a_max, a_avg });
        }
        if a_avg <= 0.0 {
            return Err(Error::DegenerateBudget(a_avg));
        }
        if a_avg > a_max {
            return Err(Error::InfeasibleMean { a_avg, a_max });
        }
        Ok(GameConfig { a_max, a_avg })
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn a_avg(&self) -> f64 {
        self.a_avg
    }

    /// Budget ratio `a_avg / a_max`, the equilibrium mass placed on `a_max`.
    pub fn jam_fraction(&self) -> f64 {
        self.a_avg / self.a_max
    }
}

// ---------------------------------------------------------------------------
// Jamming-time distributions
// ---------------------------------------------------------------------------

/// One interval of constant density. `mass = density * (hi - lo)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

impl Piece {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mass(&self) -> f64 {
        self.density * self.width()
    }
}

/// Raw serde shape: `{"atoms": [[loc, mass], ...], "pieces": [[lo, hi, density], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawDistribution {
    #[serde(default)]
    atoms: Vec<(f64, f64)>,
    #[serde(default)]
    pieces: Vec<(f64, f64, f64)>,
}

/// A mixed distribution of nonnegative jamming times: point masses plus a
/// piecewise-constant density, canonical after construction.
///
/// Invariants (established by [`JamDistribution::new`] and preserved by every
/// operation):
/// - atoms sorted by location, pairwise more than [`COALESCE_TOL`] apart,
///   all masses > 0;
/// - pieces sorted, non-overlapping, strictly positive density and width, and
///   split at every interior atom location;
/// - all support locations >= 0, total mass within [`PROB_TOL`] of 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct JamDistribution {
    atoms: Vec<(f64, f64)>,
    pieces: Vec<Piece>,
}

impl TryFrom<RawDistribution> for JamDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        JamDistribution::new(raw.atoms, raw.pieces)
    }
}

impl From<JamDistribution> for RawDistribution {
    fn from(dist: JamDistribution) -> Self {
        RawDistribution {
            atoms: dist.atoms,
            pieces: dist
                .pieces
                .into_iter()
                .map(|p| (p.lo, p.hi, p.density))
                .collect(),
        }
    }
}

impl JamDistribution {
    /// Builds a canonical distribution from raw atoms `(location, mass)` and
    /// density pieces `(lo, hi, density)`.
    ///
    /// Zero-mass atoms and zero-density pieces are dropped. The total mass
    /// must land within [`NORMALIZE_BAND`] of 1 and is then renormalized to
    /// exactly 1; a total further off is rejected.
    pub fn new(atoms: Vec<(f64, f64)>, pieces: Vec<(f64, f64, f64)>) -> Result<Self> {
        for &(loc, mass) in &atoms {
            if !loc.is_finite() || !mass.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "non-finite atom ({loc}, {mass})"
                )));
            }
            if loc < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "atom location {loc} is negative"
                )));
            }
            if mass < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "atom mass {mass} at {loc} is negative"
                )));
            }
        }
        for &(lo, hi, density) in &pieces {
            if !lo.is_finite() || !hi.is_finite() || !density.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "non-finite piece ({lo}, {hi}, {density})"
                )));
            }
            if lo < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "piece lower end {lo} is negative"
                )));
            }
            if hi <= lo {
                return Err(Error::InvalidDistribution(format!(
                    "piece [{lo}, {hi}] is empty or inverted"
                )));
            }
            if density < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "piece [{lo}, {hi}] has negative density {density}"
                )));
            }
        }

        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().filter(|&(_, m)| m > 0.0).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (loc, mass) in atoms {
            match merged.last_mut() {
                Some(last) if loc - last.0 <= COALESCE_TOL => last.1 += mass,
                _ => merged.push((loc, mass)),
            }
        }
        let mut atoms = merged;

        let mut pieces: Vec<Piece> = pieces
            .into_iter()
            .filter(|&(_, _, d)| d > 0.0)
            .map(|(lo, hi, density)| Piece { lo, hi, density })
            .collect();
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for pair in pieces.windows(2) {
            if pair[1].lo < pair[0].hi - PROB_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "pieces [{}, {}] and [{}, {}] overlap",
                    pair[0].lo, pair[0].hi, pair[1].lo, pair[1].hi
                )));
            }
        }

        let total: f64 = atoms.iter().map(|&(_, m)| m).sum::<f64>()
            + pieces.iter().map(Piece::mass).sum::<f64>();
        if (total - 1.0).abs() > NORMALIZE_BAND {
            return Err(Error::MassNotNormalized {
                total,
                band: NORMALIZE_BAND,
            });
        }
        for atom in &mut atoms {
            atom.1 /= total;
        }
        for piece in &mut pieces {
            piece.density /= total;
        }

        // Split pieces at interior atom locations so every later support walk
        // sees each atom sitting exactly on a piece boundary.
        let mut split: Vec<Piece> = Vec::with_capacity(pieces.len());
        for piece in pieces {
            let mut lo = piece.lo;
            for &(loc, _) in &atoms {
                if loc > lo + COALESCE_TOL && loc < piece.hi - COALESCE_TOL {
                    split.push(Piece {
                        lo,
                        hi: loc,
                        density: piece.density,
                    });
                    lo = loc;
                }
            }
            split.push(Piece {
                lo,
                hi: piece.hi,
                density: piece.density,
            });
        }

        Ok(JamDistribution {
            atoms,
            pieces: split,
        })
    }

    /// Point mass at `a`.
    pub fn point(a: f64) -> Result<Self> {
        Self::new(vec![(a, 1.0)], Vec::new())
    }

    /// Two-point distribution `(1 - mass_hi) delta(lo) + mass_hi delta(hi)`.
    pub fn two_point(lo: f64, hi: f64, mass_hi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mass_hi) {
            return Err(Error::InvalidDistribution(format!(
                "two-point mass {mass_hi} lies outside [0, 1]"
            )));
        }
        Self::new(vec![(lo, 1.0 - mass_hi), (hi, mass_hi)], Vec::new())
    }

    /// Uniform density on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::InvalidDistribution(format!(
                "uniform support [{lo}, {hi}] is empty or non-finite"
            )));
        }
        Self::new(Vec::new(), vec![(lo, hi, 1.0 / (hi - lo))])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Total mass; exactly `1.0` up to accumulated rounding after
    /// renormalization.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, m)| m).sum::<f64>()
            + self.pieces.iter().map(Piece::mass).sum::<f64>()
    }

    pub fn support_min(&self) -> f64 {
        let atom = self.atoms.first().map(|&(loc, _)| loc);
        let piece = self.pieces.first().map(|p| p.lo);
        match (atom, piece) {
            (Some(a), Some(p)) => a.min(p),
            (Some(a), None) => a,
            (None, Some(p)) => p,
            (None, None) => unreachable!("a unit-mass distribution has support"),
        }
    }

    pub fn support_max(&self) -> f64 {
        let atom = self.atoms.last().map(|&(loc, _)| loc);
        let piece = self.pieces.last().map(|p| p.hi);
        match (atom, piece) {
            (Some(a), Some(p)) => a.max(p),
            (Some(a), None) => a,
            (None, Some(p)) => p,
            (None, None) => unreachable!("a unit-mass distribution has support"),
        }
    }

    /// Mean jamming time `E[A]`.
    pub fn mean(&self) -> f64 {
        let atom_part: f64 = self.atoms.iter().map(|&(loc, m)| loc * m).sum();
        let piece_part: f64 = self
            .pieces
            .iter()
            .map(|p| p.density * (p.hi * p.hi - p.lo * p.lo) / 2.0)
            .sum();
        atom_part + piece_part
    }

    /// Right-continuous CDF `P(A <= a)`. Returns exactly 1 at and beyond the
    /// support maximum and 0 below 0.
    pub fn cdf(&self, a: f64) -> f64 {
        if a.is_nan() {
            return f64::NAN;
        }
        if a < self.support_min() {
            return 0.0;
        }
        if a >= self.support_max() {
            return 1.0;
        }
        // Accumulate in support-walk order, the same op sequence as
        // quantile(), so the two stay consistent to the last ulp and
        // quantile(cdf(a)) can never jump past a support point.
        let mut total = 0.0;
        for event in self.support_walk() {
            match event {
                SupportEvent::Atom(loc, mass) => {
                    if loc > a {
                        break;
                    }
                    total += mass;
                }
                SupportEvent::Piece(piece) => {
                    if piece.lo >= a {
                        break;
                    }
                    total += piece.density * (piece.hi.min(a) - piece.lo);
                }
            }
        }
        total.min(1.0)
    }

    /// Generalized inverse CDF: the smallest `a` with `cdf(a) >= p`.
    ///
    /// `quantile(0)` is the support minimum and `quantile(1)` the support
    /// maximum.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        let mut cum = 0.0;
        for event in self.support_walk() {
            match event {
                SupportEvent::Atom(loc, mass) => {
                    cum += mass;
                    if cum >= p {
                        return Ok(loc);
                    }
                }
                SupportEvent::Piece(piece) => {
                    let mass = piece.mass();
                    if cum + mass >= p {
                        let a = piece.lo + (p - cum) / piece.density;
                        return Ok(a.min(piece.hi));
                    }
                    cum += mass;
                }
            }
        }
        // Rounding can leave cum marginally below 1; clamp to the support end.
        Ok(self.support_max())
    }

    /// Merged, position-ordered iteration over atoms and pieces. An atom tied
    /// with a piece's lower end comes first, which matches CDF order because
    /// pieces carry no mass at a single location.
    pub(crate) fn support_walk(&self) -> impl Iterator<Item = SupportEvent> + '_ {
        let mut ai = 0;
        let mut pi = 0;
        std::iter::from_fn(move || {
            let atom = self.atoms.get(ai);
            let piece = self.pieces.get(pi);
            match (atom, piece) {
                (Some(&(loc, mass)), Some(p)) => {
                    if loc <= p.lo {
                        ai += 1;
                        Some(SupportEvent::Atom(loc, mass))
                    } else {
                        pi += 1;
                        Some(SupportEvent::Piece(*p))
                    }
                }
                (Some(&(loc, mass)), None) => {
                    ai += 1;
                    Some(SupportEvent::Atom(loc, mass))
                }
                (None, Some(p)) => {
                    pi += 1;
                    Some(SupportEvent::Piece(*p))
                }
                (None, None) => None,
            }
        })
    }

    /// Checks the attacker's constraints under `cfg`: unit mass, support
    /// inside `[0, a_max]`, and mean at most `a_avg` (all up to [`PROB_TOL`]).
    pub fn check_feasibility(&self, cfg: &GameConfig) -> FeasibilityReport {
        let mean = self.mean();
        let total_mass = self.total_mass();
        let support_min = self.support_min();
        let support_max = self.support_max();
        let mean_ok = mean <= cfg.a_avg() + PROB_TOL;
        let mass_ok = (total_mass - 1.0).abs() <= PROB_TOL;
        let support_ok = support_min >= -PROB_TOL && support_max <= cfg.a_max() + PROB_TOL;
        FeasibilityReport {
            mean,
            total_mass,
            support_min,
            support_max,
            mean_ok,
            mass_ok,
            support_ok,
            feasible: mean_ok && mass_ok && support_ok,
        }
    }
}

pub(crate) enum SupportEvent {
    Atom(f64, f64),
    Piece(Piece),
}

/// Outcome of [`JamDistribution::check_feasibility`]: the measured quantities
/// plus one verdict per constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub mean: f64,
    pub total_mass: f64,
    pub support_min: f64,
    pub support_max: f64,
    pub mean_ok: bool,
    pub mass_ok: bool,
    pub support_ok: bool,
    pub feasible: bool,
}

/// Convex mixture of distributions. Weights must be nonnegative and sum to 1
/// within [`PROB_TOL`]. Coincident atoms coalesce and overlapping density
/// pieces are flattened into disjoint pieces with summed densities.
pub fn mix(components: &[(JamDistribution, f64)]) -> Result<JamDistribution> {
    let mut total_weight = 0.0;
    for &(_, w) in components {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidWeight(w));
        }
        total_weight += w;
    }
    if (total_weight - 1.0).abs() > PROB_TOL {
        return Err(Error::WeightSum(total_weight));
    }

    let mut atoms = Vec::new();
    let mut raw_pieces: Vec<Piece> = Vec::new();
    for (dist, w) in components {
        if *w == 0.0 {
            continue;
        }
        for &(loc, mass) in dist.atoms() {
            atoms.push((loc, w * mass));
        }
        for p in dist.pieces() {
            raw_pieces.push(Piece {
                lo: p.lo,
                hi: p.hi,
                density: w * p.density,
            });
        }
    }

    // Flatten possibly overlapping pieces: cut at the union of boundaries and
    // sum densities of the pieces covering each cell.
    let mut bounds: Vec<f64> = raw_pieces.iter().flat_map(|p| [p.lo, p.hi]).collect();
    bounds.sort_by(f64::total_cmp);
    bounds.dedup_by(|b, a| (*b - *a).abs() <= COALESCE_TOL);
    let mut pieces = Vec::new();
    for cell in bounds.windows(2) {
        let (lo, hi) = (cell[0], cell[1]);
        let mid = 0.5 * (lo + hi);
        let density: f64 = raw_pieces
            .iter()
            .filter(|p| p.lo <= mid && mid < p.hi)
            .map(|p| p.density)
            .sum();
        if density > 0.0 {
            pieces.push((lo, hi, density));
        }
    }

    JamDistribution::new(atoms, pieces)
}

/// Exact total-variation distance between two mixed distributions:
/// half the summed absolute atom-mass differences plus half the integrated
/// absolute density difference (exact because densities are piecewise
/// constant).
pub fn total_variation(a: &JamDistribution, b: &JamDistribution) -> f64 {
    let mut atom_part = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < a.atoms.len() || j < b.atoms.len() {
        match (a.atoms.get(i), b.atoms.get(j)) {
            (Some(&(la, ma)), Some(&(lb, mb))) => {
                if (la - lb).abs() <= COALESCE_TOL {
                    atom_part += (ma - mb).abs();
                    i += 1;
                    j += 1;
                } else if la < lb {
                    atom_part += ma;
                    i += 1;
                } else {
                    atom_part += mb;
                    j += 1;
                }
            }
            (Some(&(_, ma)), None) => {
                atom_part += ma;
                i += 1;
            }
            (None, Some(&(_, mb))) => {
                atom_part += mb;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }

    let density_at = |dist: &JamDistribution, x: f64| -> f64 {
        dist.pieces
            .iter()
            .find(|p| p.lo <= x && x < p.hi)
            .map_or(0.0, |p| p.density)
    };
    let mut bounds: Vec<f64> = a
        .pieces
        .iter()
        .chain(b.pieces.iter())
        .flat_map(|p| [p.lo, p.hi])
        .collect();
    bounds.sort_by(f64::total_cmp);
    bounds.dedup_by(|y, x| (*y - *x).abs() <= COALESCE_TOL);
    let mut density_part = 0.0;
    for cell in bounds.windows(2) {
        let mid = 0.5 * (cell[0] + cell[1]);
        density_part += (density_at(a, mid) - density_at(b, mid)).abs() * (cell[1] - cell[0]);
    }

    0.5 * (atom_part + density_part)
}

// ---------------------------------------------------------------------------
// Sampling policies
// ---------------------------------------------------------------------------

/// The system's stationary sampling rule: the waiting time inserted after a
/// delivery, as a function of the observed jamming time of that stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplingPolicy {
    /// Water-filling rule `u(a) = max(beta - a, 0)`: wait until the stage has
    /// lasted at least `beta`, sample immediately otherwise.
    Threshold { beta: f64 },
    /// Sample the instant the update is delivered, `u(a) = 0`.
    ZeroWait,
    /// Piecewise-linear interpolation of `(a, delay)` knots, clamped to the
    /// end values outside the knot range. Knots must be strictly increasing
    /// in `a` with nonnegative delays.
    Tabulated { knots: Vec<(f64, f64)> },
}

impl SamplingPolicy {
    pub fn threshold(beta: f64) -> Result<Self> {
        let policy = SamplingPolicy::Threshold { beta };
        policy.validate()?;
        Ok(policy)
    }

    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        let policy = SamplingPolicy::Tabulated { knots };
        policy.validate()?;
        Ok(policy)
    }

    /// Re-checks the structural invariants, for policies built literally or
    /// deserialized from external input.
    pub fn validate(&self) -> Result<()> {
        match self {
            SamplingPolicy::Threshold { beta } => {
                if !beta.is_finite() || *beta < 0.0 {
                    return Err(Error::InvalidPolicy(format!(
                        "threshold beta {beta} must be finite and non-negative"
                    )));
                }
            }
            SamplingPolicy::ZeroWait => {}
            SamplingPolicy::Tabulated { knots } => {
                if knots.is_empty() {
                    return Err(Error::InvalidPolicy("tabulated policy has no knots".into()));
                }
                for &(a, d) in knots {
                    if !a.is_finite() || !d.is_finite() {
                        return Err(Error::InvalidPolicy(format!(
                            "non-finite knot ({a}, {d})"
                        )));
                    }
                    if d < 0.0 {
                        return Err(Error::InvalidPolicy(format!(
                            "negative delay {d} at a = {a}"
                        )));
                    }
                }
                for pair in knots.windows(2) {
                    if pair[1].0 <= pair[0].0 {
                        return Err(Error::InvalidPolicy(format!(
                            "knot abscissae {} and {} are not strictly increasing",
                            pair[0].0, pair[1].0
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Waiting time `u(a) >= 0` inserted after a stage whose jamming time
    /// was `a`.
    pub fn delay(&self, a: f64) -> f64 {
        match self {
            SamplingPolicy::Threshold { beta } => (beta - a).max(0.0),
            SamplingPolicy::ZeroWait => 0.0,
            SamplingPolicy::Tabulated { knots } => {
                if a <= knots[0].0 {
                    return knots[0].1;
                }
                if a >= knots[knots.len() - 1].0 {
                    return knots[knots.len() - 1].1;
                }
                for pair in knots.windows(2) {
                    let ((a0, d0), (a1, d1)) = (pair[0], pair[1]);
                    if a <= a1 {
                        return d0 + (d1 - d0) * (a - a0) / (a1 - a0);
                    }
                }
                unreachable!("a lies inside the knot range")
            }
        }
    }
}

/// One simulated stage: the jamming time, the inserted waiting time, their
/// sum, and the running epoch at which the stage's sample was taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StagePath {
    pub jam: f64,
    pub delay: f64,
    pub interval: f64,
    pub sample_epoch: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn equilibrium_two_point() -> JamDistribution {
        // 0.75 delta(0) + 0.25 delta(4)
        JamDistribution::two_point(0.0, 4.0, 0.25).unwrap()
    }

    #[test]
    fn config_accepts_interior_and_boundary_budgets() {
        let cfg = GameConfig::new(4.0, 1.0).unwrap();
        assert_eq!(cfg.a_max(), 4.0);
        assert_eq!(cfg.a_avg(), 1.0);
        assert!((cfg.jam_fraction() - 0.25).abs() < EPS);
        assert!(GameConfig::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn config_rejects_bad_budgets() {
        assert!(matches!(
            GameConfig::new(4.0, 0.0),
            Err(Error::DegenerateBudget(_))
        ));
        assert!(matches!(
            GameConfig::new(4.0, -1.0),
            Err(Error::DegenerateBudget(_))
        ));
        assert!(matches!(
            GameConfig::new(1.0, 2.0),
            Err(Error::InfeasibleMean { .. })
        ));
        assert!(matches!(
            GameConfig::new(f64::NAN, 1.0),
            Err(Error::NonFiniteConfig { .. })
        ));
        assert!(matches!(
            GameConfig::new(f64::INFINITY, 1.0),
            Err(Error::NonFiniteConfig { .. })
        ));
    }

    #[test]
    fn construction_canonicalizes() {
        // Unsorted input with a duplicate location and a zero-mass atom.
        let dist = JamDistribution::new(
            vec![(4.0, 0.25), (0.0, 0.5), (2.0, 0.0), (0.0, 0.25)],
            Vec::new(),
        )
        .unwrap();
        assert_eq!(dist.atoms(), &[(0.0, 0.75), (4.0, 0.25)]);
        assert!(dist.pieces().is_empty());
        assert!((dist.total_mass() - 1.0).abs() < EPS);
    }

    #[test]
    fn construction_splits_pieces_at_atoms() {
        let dist = JamDistribution::new(vec![(1.0, 0.5)], vec![(0.0, 2.0, 0.25)]).unwrap();
        let pieces = dist.pieces();
        assert_eq!(pieces.len(), 2);
        assert_eq!((pieces[0].lo, pieces[0].hi), (0.0, 1.0));
        assert_eq!((pieces[1].lo, pieces[1].hi), (1.0, 2.0));
        assert!((pieces[0].density - 0.25).abs() < EPS);
        assert!((dist.total_mass() - 1.0).abs() < EPS);
    }

    #[test]
    fn construction_renormalizes_inside_band_only() {
        let off = 1.0 + 0.5e-9;
        let dist = JamDistribution::new(vec![(1.0, off)], Vec::new()).unwrap();
        assert_eq!(dist.atoms()[0].1, 1.0);

        let err = JamDistribution::new(vec![(1.0, 0.5)], Vec::new()).unwrap_err();
        assert!(matches!(err, Error::MassNotNormalized { .. }));
    }

    #[test]
    fn construction_rejects_malformed_parts() {
        assert!(JamDistribution::new(vec![(-1.0, 1.0)], Vec::new()).is_err());
        assert!(JamDistribution::new(vec![(1.0, -0.5), (2.0, 1.5)], Vec::new()).is_err());
        assert!(JamDistribution::new(vec![(f64::NAN, 1.0)], Vec::new()).is_err());
        assert!(JamDistribution::new(Vec::new(), vec![(2.0, 1.0, 1.0)]).is_err());
        assert!(JamDistribution::new(Vec::new(), vec![(0.0, 1.0, -1.0)]).is_err());
        // Overlapping pieces.
        assert!(
            JamDistribution::new(Vec::new(), vec![(0.0, 1.0, 0.5), (0.5, 1.5, 0.5)]).is_err()
        );
        // Empty input has zero mass.
        assert!(matches!(
            JamDistribution::new(Vec::new(), Vec::new()),
            Err(Error::MassNotNormalized { .. })
        ));
    }

    #[test]
    fn mean_and_support_of_reference_distributions() {
        let f_star = equilibrium_two_point();
        assert!((f_star.mean() - 1.0).abs() < EPS);
        assert_eq!(f_star.support_min(), 0.0);
        assert_eq!(f_star.support_max(), 4.0);

        let unif = JamDistribution::uniform(0.0, 2.0).unwrap();
        assert!((unif.mean() - 1.0).abs() < EPS);
        assert_eq!(unif.support_max(), 2.0);

        let mixed = JamDistribution::new(vec![(1.0, 0.5)], vec![(0.0, 2.0, 0.25)]).unwrap();
        // 0.5 * 1 + 0.25 * (4 - 0) / 2 = 1.0
        assert!((mixed.mean() - 1.0).abs() < EPS);
    }

    #[test]
    fn cdf_walks_atoms_and_pieces() {
        let f_star = equilibrium_two_point();
        assert_eq!(f_star.cdf(-0.5), 0.0);
        assert!((f_star.cdf(0.0) - 0.75).abs() < EPS);
        assert!((f_star.cdf(3.9) - 0.75).abs() < EPS);
        assert_eq!(f_star.cdf(4.0), 1.0);
        assert_eq!(f_star.cdf(100.0), 1.0);

        let unif = JamDistribution::uniform(0.0, 2.0).unwrap();
        assert!((unif.cdf(0.5) - 0.25).abs() < EPS);
        assert_eq!(unif.cdf(2.0), 1.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let f_star = equilibrium_two_point();
        assert_eq!(f_star.quantile(0.0).unwrap(), 0.0);
        assert_eq!(f_star.quantile(0.5).unwrap(), 0.0);
        assert_eq!(f_star.quantile(0.75).unwrap(), 0.0);
        assert_eq!(f_star.quantile(0.8).unwrap(), 4.0);
        assert_eq!(f_star.quantile(1.0).unwrap(), 4.0);

        let unif = JamDistribution::uniform(0.0, 2.0).unwrap();
        assert!((unif.quantile(0.25).unwrap() - 0.5).abs() < EPS);
        assert_eq!(unif.quantile(1.0).unwrap(), 2.0);

        assert!(f_star.quantile(-0.1).is_err());
        assert!(f_star.quantile(1.1).is_err());
        assert!(f_star.quantile(f64::NAN).is_err());
    }

    #[test]
    fn feasibility_checks_each_constraint() {
        let cfg = GameConfig::new(4.0, 1.0).unwrap();
        let report = equilibrium_two_point().check_feasibility(&cfg);
        assert!(report.feasible);
        assert!((report.mean - 1.0).abs() < EPS);

        // Mean above budget.
        let hot = JamDistribution::two_point(0.0, 4.0, 0.5).unwrap();
        let report = hot.check_feasibility(&cfg);
        assert!(!report.mean_ok && report.mass_ok && report.support_ok);
        assert!(!report.feasible);

        // Support outside [0, a_max].
        let wide = JamDistribution::point(5.0).unwrap();
        let report = wide.check_feasibility(&cfg);
        assert!(report.mean > cfg.a_avg());
        assert!(!report.support_ok);
        assert!(!report.feasible);
    }

    #[test]
    fn mix_coalesces_atoms_and_flattens_pieces() {
        let f_star = equilibrium_two_point();
        let spike = JamDistribution::point(1.0).unwrap();
        let blend = mix(&[(f_star, 0.5), (spike, 0.5)]).unwrap();
        assert_eq!(blend.atoms(), &[(0.0, 0.375), (1.0, 0.5), (4.0, 0.125)]);

        let u1 = JamDistribution::uniform(0.0, 2.0).unwrap();
        let u2 = JamDistribution::uniform(1.0, 3.0).unwrap();
        let blend = mix(&[(u1, 0.5), (u2, 0.5)]).unwrap();
        let d: Vec<(f64, f64, f64)> = blend
            .pieces()
            .iter()
            .map(|p| (p.lo, p.hi, p.density))
            .collect();
        assert_eq!(d.len(), 3);
        assert_eq!((d[0].0, d[0].1), (0.0, 1.0));
        assert!((d[0].2 - 0.25).abs() < EPS);
        assert_eq!((d[1].0, d[1].1), (1.0, 2.0));
        assert!((d[1].2 - 0.5).abs() < EPS);
        assert_eq!((d[2].0, d[2].1), (2.0, 3.0));
        assert!((d[2].2 - 0.25).abs() < EPS);
        assert!((blend.total_mass() - 1.0).abs() < EPS);
    }

    #[test]
    fn mix_rejects_bad_weights() {
        let a = JamDistribution::point(1.0).unwrap();
        let b = JamDistribution::point(2.0).unwrap();
        assert!(matches!(
            mix(&[(a.clone(), 0.6), (b.clone(), 0.6)]),
            Err(Error::WeightSum(_))
        ));
        assert!(matches!(
            mix(&[(a, -0.5), (b, 1.5)]),
            Err(Error::InvalidWeight(_))
        ));
    }

    #[test]
    fn total_variation_is_exact_on_references() {
        let f_star = equilibrium_two_point();
        let spike = JamDistribution::point(0.0).unwrap();
        assert!((total_variation(&f_star, &spike) - 0.25).abs() < EPS);
        assert_eq!(total_variation(&f_star, &f_star), 0.0);

        let u1 = JamDistribution::uniform(0.0, 2.0).unwrap();
        let u2 = JamDistribution::uniform(1.0, 3.0).unwrap();
        assert!((total_variation(&u1, &u2) - 0.5).abs() < EPS);
        // Purely atomic vs purely continuous: mutually singular.
        assert!((total_variation(&f_star, &u1) - 1.0).abs() < EPS);
    }

    #[test]
    fn threshold_policy_is_water_filling() {
        let policy = SamplingPolicy::threshold(1.5).unwrap();
        assert_eq!(policy.delay(0.0), 1.5);
        assert_eq!(policy.delay(1.0), 0.5);
        assert_eq!(policy.delay(1.5), 0.0);
        assert_eq!(policy.delay(4.0), 0.0);
        assert!(SamplingPolicy::threshold(-0.1).is_err());
        assert!(SamplingPolicy::threshold(f64::NAN).is_err());
    }

    #[test]
    fn zero_wait_policy_never_delays() {
        let policy = SamplingPolicy::ZeroWait;
        assert_eq!(policy.delay(0.0), 0.0);
        assert_eq!(policy.delay(3.7), 0.0);
    }

    #[test]
    fn tabulated_policy_interpolates_and_clamps() {
        let policy = SamplingPolicy::tabulated(vec![(0.0, 1.0), (2.0, 0.0)]).unwrap();
        assert_eq!(policy.delay(0.0), 1.0);
        assert!((policy.delay(0.5) - 0.75).abs() < EPS);
        assert!((policy.delay(1.0) - 0.5).abs() < EPS);
        assert_eq!(policy.delay(2.0), 0.0);
        assert_eq!(policy.delay(5.0), 0.0);
        assert_eq!(policy.delay(-1.0), 1.0);

        assert!(SamplingPolicy::tabulated(Vec::new()).is_err());
        assert!(SamplingPolicy::tabulated(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(SamplingPolicy::tabulated(vec![(0.0, -1.0)]).is_err());
    }

    #[test]
    fn distribution_serde_round_trips() {
        let f_star = equilibrium_two_point();
        let json = serde_json::to_string(&f_star).unwrap();
        assert_eq!(json, r#"{"atoms":[[0.0,0.75],[4.0,0.25]],"pieces":[]}"#);
        let back: JamDistribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f_star);

        // Missing keys default to empty; validation still applies.
        let unif: JamDistribution =
            serde_json::from_str(r#"{"pieces":[[0.0,2.0,0.5]]}"#).unwrap();
        assert_eq!(unif, JamDistribution::uniform(0.0, 2.0).unwrap());
        assert!(serde_json::from_str::<JamDistribution>(r#"{"atoms":[[0.0,0.5]]}"#).is_err());
    }

    #[test]
    fn policy_serde_uses_kind_tag() {
        let policy = SamplingPolicy::threshold(1.5).unwrap();
        let json = serde_json::to_string(&policy).unwrap();
        assert_eq!(json, r#"{"kind":"threshold","beta":1.5}"#);

        let zw: SamplingPolicy = serde_json::from_str(r#"{"kind":"zero_wait"}"#).unwrap();
        assert_eq!(zw, SamplingPolicy::ZeroWait);

        let tab: SamplingPolicy =
            serde_json::from_str(r#"{"kind":"tabulated","knots":[[0.0,1.0],[2.0,0.0]]}"#).unwrap();
        assert!(tab.validate().is_ok());
        assert!((tab.delay(1.0) - 0.5).abs() < EPS);
    }
}
