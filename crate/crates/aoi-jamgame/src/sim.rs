//! Monte Carlo simulation of the stage process.
//!
//! Stage draws are counter-based: stage `n` reads one value from a
//! `ChaCha8` stream keyed by `(seed, n)`, so any stage's draw can be
//! reproduced in isolation and the sequence is independent of how stages are
//! chunked across threads. Aggregation keeps that independence: stages are
//! split into fixed-size chunks, each chunk is summed sequentially, and the
//! per-chunk sums are merged in chunk order. The result is bit-identical for
//! every thread count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{JamDistribution, SamplingPolicy, StagePath};

/// Default cap on the number of stages a trace will materialize.
pub const DEFAULT_TRACE_CAP: u64 = 100_000;

/// Stages per aggregation chunk. Fixed so the merge tree does not depend on
/// the thread count.
const CHUNK: u64 = 1 << 16;

/// The uniform draw for stage `ordinal` under `seed`: one 64-bit output of a
/// dedicated ChaCha8 stream, mapped to `[0, 1)` on the top 53 bits.
pub fn stage_uniform(seed: u64, ordinal: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ordinal);
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Jamming time of stage `ordinal`: the quantile of the stage's uniform draw.
pub fn sample_jam(dist: &JamDistribution, seed: u64, ordinal: u64) -> f64 {
    dist.quantile(stage_uniform(seed, ordinal))
        .expect("a uniform draw in [0, 1) is a valid probability")
}

/// Aggregate statistics of a simulated stage sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgeStats {
    pub stages: u64,
    /// Sum of stage intervals, the total simulated time.
    pub total_time: f64,
    /// Integral of the instantaneous age, `sum L_n^2 / 2`.
    pub total_area: f64,
    /// Time-average age estimate `total_area / total_time`.
    pub age_estimate: f64,
    pub min_interval: f64,
    pub max_interval: f64,
}

#[derive(Clone, Copy)]
struct Accumulator {
    stages: u64,
    time: f64,
    area: f64,
    min: f64,
    max: f64,
}

impl Accumulator {
    fn empty() -> Self {
        Accumulator {
            stages: 0,
            time: 0.0,
            area: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, interval: f64) {
        self.stages += 1;
        self.time += interval;
        self.area += interval * interval / 2.0;
        self.min = self.min.min(interval);
        self.max = self.max.max(interval);
    }

    fn merge(&mut self, other: &Accumulator) {
        self.stages += other.stages;
        self.time += other.time;
        self.area += other.area;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    fn finalize(&self) -> Result<AgeStats> {
        if self.time <= 0.0 {
            return Err(Error::ZeroStageLength);
        }
        Ok(AgeStats {
            stages: self.stages,
            total_time: self.time,
            total_area: self.area,
            age_estimate: self.area / self.time,
            min_interval: self.min,
            max_interval: self.max,
        })
    }
}

fn run_chunk(
    dist: &JamDistribution,
    policy: &SamplingPolicy,
    seed: u64,
    from: u64,
    to: u64,
) -> Accumulator {
    // One keyed rng per chunk; cloning and re-streaming per stage is
    // equivalent to fresh construction because the base is never advanced.
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Accumulator::empty();
    for ordinal in from..to {
        let mut rng = base.clone();
        rng.set_stream(ordinal);
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let jam = dist
            .quantile(u)
            .expect("a uniform draw in [0, 1) is a valid probability");
        acc.record(jam + policy.delay(jam));
    }
    acc
}

/// Simulates `stages` stages and returns aggregate age statistics.
///
/// Deterministic in `(dist, policy, stages, seed)` alone; thread count and
/// scheduling cannot change any output bit.
pub fn simulate(
    dist: &JamDistribution,
    policy: &SamplingPolicy,
    stages: u64,
    seed: u64,
) -> Result<AgeStats> {
    policy.validate()?;
    if stages == 0 {
        return Err(Error::ZeroStages);
    }
    let chunks = stages.div_ceil(CHUNK);
    let partials: Vec<Accumulator> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let from = c * CHUNK;
            let to = (from + CHUNK).min(stages);
            run_chunk(dist, policy, seed, from, to)
        })
        .collect();
    let mut total = Accumulator::empty();
    for part in &partials {
        total.merge(part);
    }
    total.finalize()
}

/// Materializes the first `stages` stage records, including running sample
/// epochs. Uses the same per-stage draws as [`simulate`]. Refuses more than
/// `cap` stages.
pub fn trace_capped(
    dist: &JamDistribution,
    policy: &SamplingPolicy,
    stages: u64,
    seed: u64,
    cap: u64,
) -> Result<Vec<StagePath>> {
    policy.validate()?;
    if stages == 0 {
        return Err(Error::ZeroStages);
    }
    if stages > cap {
        return Err(Error::TraceCapExceeded { stages, cap });
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(stages as usize);
    let mut epoch = 0.0;
    for ordinal in 0..stages {
        let mut rng = base.clone();
        rng.set_stream(ordinal);
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let jam = dist
            .quantile(u)
            .expect("a uniform draw in [0, 1) is a valid probability");
        let delay = policy.delay(jam);
        let interval = jam + delay;
        epoch += interval;
        out.push(StagePath {
            jam,
            delay,
            interval,
            sample_epoch: epoch,
        });
    }
    Ok(out)
}

/// [`trace_capped`] with the default cap of [`DEFAULT_TRACE_CAP`] stages.
pub fn trace(
    dist: &JamDistribution,
    policy: &SamplingPolicy,
    stages: u64,
    seed: u64,
) -> Result<Vec<StagePath>> {
    trace_capped(dist, policy, stages, seed, DEFAULT_TRACE_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f_star() -> JamDistribution {
        JamDistribution::two_point(0.0, 4.0, 0.25).unwrap()
    }

    #[test]
    fn stage_draws_are_counter_based() {
        let a = stage_uniform(7, 0);
        let b = stage_uniform(7, 1);
        let c = stage_uniform(8, 0);
        assert!(a != b, "distinct stages draw distinct values");
        assert!(a != c, "distinct seeds draw distinct values");
        assert_eq!(a, stage_uniform(7, 0), "draws are reproducible");
        assert!((0.0..1.0).contains(&a));
        // Stage access order is irrelevant by construction.
        assert_eq!(stage_uniform(7, 1000), stage_uniform(7, 1000));
    }

    #[test]
    fn point_mass_simulation_is_exact() {
        let d = JamDistribution::point(1.0).unwrap();
        let stats = simulate(&d, &SamplingPolicy::ZeroWait, 1000, 42).unwrap();
        assert_eq!(stats.stages, 1000);
        assert!((stats.total_time - 1000.0).abs() < 1e-9);
        assert!((stats.age_estimate - 0.5).abs() < 1e-12);
        assert_eq!(stats.min_interval, 1.0);
        assert_eq!(stats.max_interval, 1.0);
    }

    #[test]
    fn threshold_policy_floors_intervals() {
        let stats = simulate(
            &f_star(),
            &SamplingPolicy::Threshold { beta: 4.0 / 3.0 },
            10_000,
            1,
        )
        .unwrap();
        // Intervals are exactly max(beta, A), so only two values occur.
        assert!((stats.min_interval - 4.0 / 3.0).abs() < 1e-12);
        assert!((stats.max_interval - 4.0).abs() < 1e-12);
    }

    #[test]
    fn simulation_tracks_the_analytic_age() {
        // 1e6 stages of the saturated-budget equilibrium: age is exactly 0.5
        // because every interval is the constant 1.
        let d = JamDistribution::point(1.0).unwrap();
        let stats = simulate(&d, &SamplingPolicy::ZeroWait, 1_000_000, 3).unwrap();
        assert!((stats.age_estimate - 0.5).abs() < 1e-12);
    }

    #[test]
    fn simulate_rejects_degenerate_requests() {
        assert!(matches!(
            simulate(&f_star(), &SamplingPolicy::ZeroWait, 0, 1),
            Err(Error::ZeroStages)
        ));
        let origin = JamDistribution::point(0.0).unwrap();
        assert!(matches!(
            simulate(&origin, &SamplingPolicy::ZeroWait, 10, 1),
            Err(Error::ZeroStageLength)
        ));
        let bad = SamplingPolicy::Threshold { beta: -1.0 };
        assert!(matches!(
            simulate(&f_star(), &bad, 10, 1),
            Err(Error::InvalidPolicy(_))
        ));
    }

    #[test]
    fn trace_matches_simulate_draws() {
        let policy = SamplingPolicy::Threshold { beta: 4.0 / 3.0 };
        let d = f_star();
        let path = trace(&d, &policy, 500, 9).unwrap();
        assert_eq!(path.len(), 500);

        // Same draws as sample_jam, stage by stage.
        for (n, stage) in path.iter().enumerate() {
            assert_eq!(stage.jam, sample_jam(&d, 9, n as u64));
            assert_eq!(stage.interval, stage.jam + stage.delay);
        }

        // Epochs are the running interval sum.
        let mut epoch = 0.0;
        for stage in &path {
            epoch += stage.interval;
            assert_eq!(stage.sample_epoch, epoch);
        }

        // The aggregate of the trace reproduces simulate() exactly.
        let stats = simulate(&d, &policy, 500, 9).unwrap();
        let time: f64 = path.iter().map(|s| s.interval).sum();
        let area: f64 = path.iter().map(|s| s.interval * s.interval / 2.0).sum();
        assert_eq!(stats.total_time, time);
        assert_eq!(stats.total_area, area);
    }

    #[test]
    fn trace_respects_cap() {
        let policy = SamplingPolicy::ZeroWait;
        let d = f_star();
        assert!(trace_capped(&d, &policy, 11, 1, 10).is_err());
        assert!(matches!(
            trace(&d, &policy, DEFAULT_TRACE_CAP + 1, 1),
            Err(Error::TraceCapExceeded { .. })
        ));
        assert_eq!(trace_capped(&d, &policy, 10, 1, 10).unwrap().len(), 10);
    }

    #[test]
    fn empirical_frequencies_match_the_mixture() {
        // P(A = 4) = 0.25 under f*; check a 3-sigma band at 1e5 draws.
        let d = f_star();
        let n = 100_000;
        let hits = (0..n).filter(|&i| sample_jam(&d, 11, i) == 4.0).count();
        let p_hat = hits as f64 / n as f64;
        let sigma = (0.25 * 0.75 / n as f64).sqrt();
        assert!(
            (p_hat - 0.25).abs() < 3.0 * sigma,
            "p_hat = {p_hat}, sigma = {sigma}"
        );
    }
}
