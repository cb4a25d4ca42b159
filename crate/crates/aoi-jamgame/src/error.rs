//! Error taxonomy for the crate.
//!
//! Variants split into two classes. Validation errors describe rejected
//! inputs (bad configs, malformed distributions, infeasible requests) and map
//! to exit code 1 in the CLI. Internal errors signal a broken invariant in
//! our own numerics (a lost bisection bracket, a failed equilibrium
//! self-check) and map to exit code 2; they should never surface on valid
//! input.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration values must be finite, got a_max = {a_max}, a_avg = {a_avg}")]
    NonFiniteConfig { a_max: f64, a_avg: f64 },

    #[error("average jamming budget must be positive, got a_avg = {0}")]
    DegenerateBudget(f64),

    #[error("average jamming time {a_avg} exceeds the per-stage maximum {a_max}")]
    InfeasibleMean { a_avg: f64, a_max: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("total probability mass {total} lies outside the renormalization band 1 +/- {band}")]
    MassNotNormalized { total: f64, band: f64 },

    #[error("mixture weights must be finite and non-negative, got {0}")]
    InvalidWeight(f64),

    #[error("mixture weights sum to {0}, expected 1")]
    WeightSum(f64),

    #[error("probability {0} lies outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("invalid sampling policy: {0}")]
    InvalidPolicy(String),

    #[error("clipped moment order {0} is unsupported, only orders 1 and 2 exist")]
    InvalidMomentOrder(u32),

    #[error("threshold must be finite and non-negative, got {0}")]
    InvalidThreshold(f64),

    #[error("expected stage length is zero, the age ratio is undefined")]
    ZeroStageLength,

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("simulation requires at least one stage")]
    ZeroStages,

    #[error("trace of {stages} stages exceeds the cap of {cap}")]
    TraceCapExceeded { stages: u64, cap: u64 },

    #[error("invalid search grid: {0}")]
    InvalidGrid(String),

    #[error("invalid mixture coefficient {0}, expected a value in [0, 1]")]
    InvalidAlpha(f64),

    #[error("invalid alpha specification `{spec}`: {reason}")]
    InvalidAlphaSpec { spec: String, reason: String },

    #[error("invalid thread configuration: {0}")]
    InvalidThreads(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    /// Bisection lost its sign-change bracket. Unreachable for any
    /// distribution that passes construction, kept as a guarded invariant.
    #[error("internal: no sign change brackets the best-response threshold")]
    NoBracket,

    /// The iteration cap was hit before the residual fell under `tol`.
    #[error("internal: bisection stopped after {iterations} iterations with residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },

    /// A computed equilibrium failed one of its own defining identities.
    #[error("internal: equilibrium invariant violated: {0}")]
    BrokenInvariant(String),
}

impl Error {
    /// Internal errors indicate a defect in the solver itself rather than a
    /// rejected input; the CLI maps them to exit code 2.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::NoBracket | Error::NoConvergence { .. } | Error::BrokenInvariant(_)
        )
    }
}
