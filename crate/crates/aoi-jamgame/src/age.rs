//! Age analytics: clipped moments, long-run average age, and the
//! best-response fixed-point residual.
//!
//! Renewal structure: stage `n` lasts `L_n = A_n + u(A_n)` where `A_n` is the
//! jamming time and `u` the sampling policy's waiting rule. The long-run
//! time-average age is `E[L^2] / (2 E[L])`; the per-stage peak-age convention
//! is twice that. Under a threshold policy `u(a) = max(beta - a, 0)` the
//! stage length collapses to `max(beta, A)`, so both moments reduce to
//! clipped moments of the jamming distribution.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{JamDistribution, Piece, SamplingPolicy};

/// Which normalization an age number carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AgeConvention {
    /// Long-run time average of the instantaneous age, `E[L^2] / (2 E[L])`.
    TimeAverage,
    /// Per-stage ratio `E[L^2] / E[L]`, exactly twice the time average.
    StageRatio,
}

/// An age number tagged with its convention so values under different
/// normalizations cannot be compared by accident.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgeValue {
    value: f64,
    convention: AgeConvention,
}

impl AgeValue {
    pub fn time_average(value: f64) -> Self {
        AgeValue {
            value,
            convention: AgeConvention::TimeAverage,
        }
    }

    pub fn stage_ratio(value: f64) -> Self {
        AgeValue {
            value,
            convention: AgeConvention::StageRatio,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn convention(&self) -> AgeConvention {
        self.convention
    }

    pub fn as_time_average(&self) -> f64 {
        match self.convention {
            AgeConvention::TimeAverage => self.value,
            AgeConvention::StageRatio => self.value / 2.0,
        }
    }

    pub fn as_stage_ratio(&self) -> f64 {
        match self.convention {
            AgeConvention::TimeAverage => 2.0 * self.value,
            AgeConvention::StageRatio => self.value,
        }
    }
}

/// Clipped moment `E[max(beta, A)^k]` for `k` in `{1, 2}`, in closed form.
pub fn clipped_moment(dist: &JamDistribution, beta: f64, k: u32) -> Result<f64> {
    if k != 1 && k != 2 {
        return Err(Error::InvalidMomentOrder(k));
    }
    check_threshold(beta)?;
    let (m1, m2) = clipped_pair(dist, beta);
    Ok(if k == 1 { m1 } else { m2 })
}

fn check_threshold(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidThreshold(beta));
    }
    Ok(())
}

/// Both clipped moments `(E[max(beta, A)], E[max(beta, A)^2])` in one pass.
///
/// Atoms contribute `m * max(beta, a)^k`. A density piece splits at `beta`:
/// below it the integrand is the constant `beta^k`, above it the plain
/// monomial with its closed-form antiderivative.
pub(crate) fn clipped_pair(dist: &JamDistribution, beta: f64) -> (f64, f64) {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for &(loc, mass) in dist.atoms() {
        let x = beta.max(loc);
        m1 += mass * x;
        m2 += mass * x * x;
    }
    for piece in dist.pieces() {
        let flat_hi = piece.hi.min(beta);
        if flat_hi > piece.lo {
            let w = piece.density * (flat_hi - piece.lo);
            m1 += w * beta;
            m2 += w * beta * beta;
        }
        let lin_lo = piece.lo.max(beta);
        if piece.hi > lin_lo {
            m1 += piece.density * (piece.hi * piece.hi - lin_lo * lin_lo) / 2.0;
            m2 += piece.density * (piece.hi * piece.hi * piece.hi - lin_lo * lin_lo * lin_lo) / 3.0;
        }
    }
    (m1, m2)
}

/// Long-run time-average age of `policy` against `dist`.
///
/// Errors with [`Error::ZeroStageLength`] when `E[L] = 0`, which requires all
/// mass at zero and a policy that never waits there.
pub fn average_age(dist: &JamDistribution, policy: &SamplingPolicy) -> Result<AgeValue> {
    policy.validate()?;
    let (el, el2) = match policy {
        SamplingPolicy::Threshold { beta } => clipped_pair(dist, *beta),
        SamplingPolicy::ZeroWait => clipped_pair(dist, 0.0),
        SamplingPolicy::Tabulated { knots } => tabulated_moments(dist, knots),
    };
    if el <= 0.0 {
        return Err(Error::ZeroStageLength);
    }
    Ok(AgeValue::time_average(el2 / (2.0 * el)))
}

/// Stage-length moments `(E[L], E[L^2])` under a tabulated policy, exact:
/// on each segment between knots the delay is linear in `a`, so `L(a)` is
/// linear and its square integrates in closed form against a constant
/// density.
fn tabulated_moments(dist: &JamDistribution, knots: &[(f64, f64)]) -> (f64, f64) {
    let policy = SamplingPolicy::Tabulated {
        knots: knots.to_vec(),
    };
    let mut el = 0.0;
    let mut el2 = 0.0;
    for &(loc, mass) in dist.atoms() {
        let l = loc + policy.delay(loc);
        el += mass * l;
        el2 += mass * l * l;
    }
    for piece in dist.pieces() {
        for (lo, hi) in knot_segments(piece, knots) {
            // L(a) = c + q * a on this segment.
            let (c0, q) = segment_line(knots, 0.5 * (lo + hi));
            let d = piece.density;
            el += d * (c0 * (hi - lo) + q * (hi * hi - lo * lo) / 2.0);
            el2 += d
                * (c0 * c0 * (hi - lo)
                    + c0 * q * (hi * hi - lo * lo)
                    + q * q * (hi * hi * hi - lo * lo * lo) / 3.0);
        }
    }
    (el, el2)
}

/// Cuts a piece at every interior knot abscissa.
fn knot_segments(piece: &Piece, knots: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut cuts = vec![piece.lo];
    for &(a, _) in knots {
        if a > piece.lo && a < piece.hi {
            cuts.push(a);
        }
    }
    cuts.push(piece.hi);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Coefficients `(c, q)` of `L(a) = c + q * a` on the segment containing `x`.
fn segment_line(knots: &[(f64, f64)], x: f64) -> (f64, f64) {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return (first.1, 1.0);
    }
    if x >= last.0 {
        return (last.1, 1.0);
    }
    for pair in knots.windows(2) {
        let ((a0, d0), (a1, d1)) = (pair[0], pair[1]);
        if x <= a1 {
            let s = (d1 - d0) / (a1 - a0);
            // delay(a) = d0 + s (a - a0), so L(a) = (d0 - s a0) + (1 + s) a.
            return (d0 - s * a0, 1.0 + s);
        }
    }
    unreachable!("x lies inside the knot range")
}

/// Clipped-moment ratio `g(beta, f) = E[max(beta, A)^2] / E[max(beta, A)]`.
///
/// The denominator vanishes only for `beta = 0` with all mass at zero; that
/// case errors rather than returning an indeterminate ratio.
pub fn g_ratio(beta: f64, dist: &JamDistribution) -> Result<f64> {
    check_threshold(beta)?;
    let (m1, m2) = clipped_pair(dist, beta);
    if m1 <= 0.0 {
        return Err(Error::ZeroStageLength);
    }
    Ok(m2 / m1)
}

/// Best-response residual `beta - g(beta, f) / 2`. A threshold is a best
/// response exactly when this vanishes; the residual is strictly increasing
/// through its unique root.
pub fn br_residual(beta: f64, dist: &JamDistribution) -> Result<f64> {
    Ok(beta - g_ratio(beta, dist)? / 2.0)
}
