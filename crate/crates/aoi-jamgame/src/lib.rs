//! Stationary analysis of a jamming game over status-update age.
//!
//! An attacker occupies the channel after each delivered status update for a
//! random jamming time, constrained to `[0, a_max]` with mean budget `a_avg`.
//! The system then chooses how long to wait before sampling again, trading
//! update frequency against collision with the next jam. Age is the
//! long-run time average of the sawtooth process that resets at each
//! delivery.
//!
//! The crate computes the game's closed-form saddle point (the attacker
//! mixes the two extremes, the system water-fills to a threshold), solves
//! best responses to arbitrary mixed jamming distributions, verifies the
//! equilibrium numerically by brute-force adversarial search, and estimates
//! ages by reproducible Monte Carlo simulation:
//!
//! - [`model`]: configurations, mixed distributions, sampling policies;
//! - [`age`]: clipped moments, average age, the best-response residual;
//! - [`solver`]: bisection best response, closed-form equilibrium,
//!   independent verification;
//! - [`sim`]: counter-based, thread-count-invariant Monte Carlo;
//! - [`oracle`]: grid-search adversaries and maximality probes;
//! - [`sweep`]: the mixture-interpolation experiment;
//! - [`io`]: JSON/CSV persistence and ingestion.

pub mod age;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod sim;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{GameConfig, JamDistribution, SamplingPolicy};

/// Environment variable forcing the rayon thread count in the CLI
/// (`0` or unset picks the default).
pub const THREADS_ENV: &str = "AOI_JAMGAME_THREADS";
