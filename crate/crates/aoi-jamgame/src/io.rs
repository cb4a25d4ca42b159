//! Result persistence and ingestion: JSON exports with a schema tag, CSV
//! emission at fixed precision, and loaders for distribution and policy
//! files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{JamDistribution, SamplingPolicy, StagePath};
use crate::sim::AgeStats;
use crate::solver::EquilibriumSolution;
use crate::sweep::MixtureSweepRow;

/// Schema tag carried by every JSON artifact this crate emits.
pub const SCHEMA_VERSION: &str = "aoi-jamgame/1";

/// Significant digits for CSV floats. Re-parsing a printed value and
/// printing it again is the identity at this precision.
const CSV_DIGITS: usize = 12;

/// Formats `x` with [`CSV_DIGITS`] significant digits.
pub fn format_sig(x: f64) -> String {
    format!("{:.*e}", CSV_DIGITS - 1, x)
}

/// Equilibrium solution ready for JSON export.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumExport {
    pub schema: &'static str,
    pub a_max: f64,
    pub a_avg: f64,
    pub beta_star: f64,
    pub age_time_average: f64,
    pub age_stage_ratio: f64,
    pub jam_distribution: JamDistribution,
    pub residual_fixed_point: f64,
    pub residual_quadratic: f64,
    pub mean_slack: f64,
}

impl From<&EquilibriumSolution> for EquilibriumExport {
    fn from(solution: &EquilibriumSolution) -> Self {
        EquilibriumExport {
            schema: SCHEMA_VERSION,
            a_max: solution.config.a_max(),
            a_avg: solution.config.a_avg(),
            beta_star: solution.beta_star,
            age_time_average: solution.age.as_time_average(),
            age_stage_ratio: solution.age.as_stage_ratio(),
            jam_distribution: solution.dist.clone(),
            residual_fixed_point: solution.residuals.fixed_point,
            residual_quadratic: solution.residuals.quadratic,
            mean_slack: solution.residuals.mean_slack,
        }
    }
}

/// Best-response result ready for JSON export.
#[derive(Debug, Clone, Serialize)]
pub struct BestResponseExport {
    pub schema: &'static str,
    pub beta: f64,
    pub residual: f64,
    pub tol: f64,
}

/// Simulation statistics ready for JSON export.
#[derive(Debug, Clone, Serialize)]
pub struct AgeStatsExport {
    pub schema: &'static str,
    pub stages: u64,
    pub total_time: f64,
    pub total_area: f64,
    pub age_estimate: f64,
    pub min_interval: f64,
    pub max_interval: f64,
}

impl From<&AgeStats> for AgeStatsExport {
    fn from(stats: &AgeStats) -> Self {
        AgeStatsExport {
            schema: SCHEMA_VERSION,
            stages: stats.stages,
            total_time: stats.total_time,
            total_area: stats.total_area,
            age_estimate: stats.age_estimate,
            min_interval: stats.min_interval,
            max_interval: stats.max_interval,
        }
    }
}

/// Pretty JSON with a trailing newline. Field order follows struct
/// declaration order, so output is deterministic byte for byte.
pub fn json_string<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value)
        .expect("export types serialize without fallible map keys");
    text.push('\n');
    text
}

/// Sweep rows as CSV: header plus one row per alpha, floats at
/// [`CSV_DIGITS`] significant digits, the optional simulation column left
/// empty when absent.
pub fn sweep_csv(rows: &[MixtureSweepRow]) -> String {
    let mut out = String::new();
    out.push_str("alpha,age_equilibrium_policy,age_zero_wait,beta_br,age_simulated\n");
    for row in rows {
        let _ = write!(
            out,
            "{},{},{},{}",
            format_sig(row.alpha),
            format_sig(row.age_equilibrium_policy),
            format_sig(row.age_zero_wait),
            format_sig(row.beta_br),
        );
        match row.age_simulated {
            Some(age) => {
                let _ = writeln!(out, ",{}", format_sig(age));
            }
            None => out.push_str(",\n"),
        }
    }
    out
}

/// Stage trace as CSV with a stage index column.
pub fn trace_csv(path: &[StagePath]) -> String {
    let mut out = String::new();
    out.push_str("stage,jam,delay,interval,sample_epoch\n");
    for (stage, step) in path.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            stage,
            format_sig(step.jam),
            format_sig(step.delay),
            format_sig(step.interval),
            format_sig(step.sample_epoch),
        );
    }
    out
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `text` to `path`, surfacing failures with the path attached.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Serializes `value` as pretty JSON to `path`.
pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    write_text(path, &json_string(value))
}

/// Loads a jamming distribution from a JSON file; canonicalization and
/// validation run during deserialization.
pub fn load_distribution(path: &Path) -> Result<JamDistribution> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Loads a sampling policy from a JSON file and re-validates it.
pub fn load_policy(path: &Path) -> Result<SamplingPolicy> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let policy: SamplingPolicy = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    policy.validate()?;
    Ok(policy)
}

/// Parses an alpha specification: either a comma-separated list
/// (`0,0.5,1`) or an inclusive range `start:step:stop`. Range endpoints
/// within `1e-9` of `stop` snap to `stop` exactly.
pub fn parse_alpha_spec(spec: &str) -> Result<Vec<f64>> {
    let invalid = |reason: &str| Error::InvalidAlphaSpec {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    if spec.trim().is_empty() {
        return Err(invalid("empty specification"));
    }
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(invalid("a range needs exactly start:step:stop"));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| invalid("range parts must be numbers"))?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if !start.is_finite() || !step.is_finite() || !stop.is_finite() {
            return Err(invalid("range parts must be finite"));
        }
        if step <= 0.0 {
            return Err(invalid("range step must be positive"));
        }
        if stop < start {
            return Err(invalid("range stop must not precede start"));
        }
        let mut values = Vec::new();
        let mut k = 0u32;
        loop {
            let v = start + f64::from(k) * step;
            if v > stop + 1e-9 {
                break;
            }
            values.push(if (v - stop).abs() <= 1e-9 { stop } else { v });
            k += 1;
            if k > 1_000_000 {
                return Err(invalid("range produces too many values"));
            }
        }
        Ok(values)
    } else {
        spec.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid("list entries must be numbers"))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GameConfig;
    use crate::solver::equilibrium;
    use crate::sweep::{sweep_mixture, SimulationSpec};

    #[test]
    fn significant_digit_formatting_round_trips() {
        for &x in &[
            0.5,
            4.0 / 3.0,
            1.044815499854966,
            0.017115727731697117,
            1e-30,
            12345.6789,
            0.0,
        ] {
            let printed = format_sig(x);
            let reparsed: f64 = printed.parse().unwrap();
            assert_eq!(format_sig(reparsed), printed, "x = {x}");
        }
        assert_eq!(format_sig(0.5), "5.00000000000e-1");
        assert_eq!(format_sig(4.0 / 3.0), "1.33333333333e0");
    }

    #[test]
    fn sweep_csv_shape_and_reingestion() {
        let cfg = GameConfig::new(4.0, 1.0).unwrap();
        let rows = sweep_mixture(&cfg, &[0.0, 0.5, 1.0], None).unwrap();
        let csv = sweep_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "alpha,age_equilibrium_policy,age_zero_wait,beta_br,age_simulated"
        );
        let body: Vec<&str> = lines.collect();
        assert_eq!(body.len(), 3);
        for (line, row) in body.iter().zip(&rows) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 5);
            assert_eq!(fields[4], "", "no simulation column requested");
            // Bit-exact at printed precision: parse and reprint.
            for (text, value) in fields.iter().zip([
                row.alpha,
                row.age_equilibrium_policy,
                row.age_zero_wait,
                row.beta_br,
            ]) {
                assert_eq!(*text, format_sig(value));
                assert_eq!(format_sig(text.parse::<f64>().unwrap()), *text);
            }
        }

        // Header-only CSV for an empty row list.
        assert_eq!(
            sweep_csv(&[]),
            "alpha,age_equilibrium_policy,age_zero_wait,beta_br,age_simulated\n"
        );

        // With simulation the last column is filled.
        let spec = SimulationSpec {
            stages: 1000,
            seed: 5,
        };
        let rows = sweep_mixture(&cfg, &[0.0], Some(spec)).unwrap();
        let csv = sweep_csv(&rows);
        let last = csv.lines().nth(1).unwrap().split(',').nth(4).unwrap();
        assert_eq!(last, format_sig(0.5));
    }

    #[test]
    fn equilibrium_export_round_trips_through_loader() {
        let cfg = GameConfig::new(4.0, 1.0).unwrap();
        let solution = equilibrium(&cfg).unwrap();
        let export = EquilibriumExport::from(&solution);
        let text = json_string(&export);
        assert!(text.starts_with("{\n  \"schema\": \"aoi-jamgame/1\""));

        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let dist: JamDistribution =
            serde_json::from_value(value["jam_distribution"].clone()).unwrap();
        assert_eq!(dist, solution.dist);
        assert!((value["beta_star"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn loaders_attach_path_context() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dist.json");
        write_text(&path, r#"{"atoms":[[0.0,0.75],[4.0,0.25]]}"#).unwrap();
        let dist = load_distribution(&path).unwrap();
        assert_eq!(dist.atoms(), &[(0.0, 0.75), (4.0, 0.25)]);

        let missing = dir.path().join("absent.json");
        let err = load_distribution(&missing).unwrap_err();
        assert!(err.to_string().contains("absent.json"));
        assert!(!err.is_internal());

        // Malformed mass is a JSON-level validation error with context.
        write_text(&path, r#"{"atoms":[[0.0,0.5]]}"#).unwrap();
        let err = load_distribution(&path).unwrap_err();
        assert!(err.to_string().contains("dist.json"));

        let policy_path = dir.path().join("policy.json");
        write_text(&policy_path, r#"{"kind":"threshold","beta":1.5}"#).unwrap();
        let policy = load_policy(&policy_path).unwrap();
        assert_eq!(policy, SamplingPolicy::Threshold { beta: 1.5 });
        write_text(&policy_path, r#"{"kind":"threshold","beta":-2.0}"#).unwrap();
        assert!(load_policy(&policy_path).is_err());
    }

    #[test]
    fn alpha_specs_parse_ranges_and_lists() {
        let grid = parse_alpha_spec("0:0.1:1").unwrap();
        assert_eq!(grid.len(), 11);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[10], 1.0);
        assert!((grid[3] - 0.3).abs() < 1e-12);

        let sparse = parse_alpha_spec("0:0.3:1").unwrap();
        assert_eq!(sparse.len(), 4);
        assert!((sparse[3] - 0.9).abs() < 1e-12);

        assert_eq!(parse_alpha_spec("0,0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_alpha_spec("0.25").unwrap(), vec![0.25]);

        assert!(parse_alpha_spec("").is_err());
        assert!(parse_alpha_spec("0:0.1").is_err());
        assert!(parse_alpha_spec("0:-0.1:1").is_err());
        assert!(parse_alpha_spec("1:0.1:0").is_err());
        assert!(parse_alpha_spec("a,b").is_err());
    }

    #[test]
    fn trace_csv_has_stage_index() {
        let d = JamDistribution::point(1.0).unwrap();
        let path = crate::sim::trace(&d, &SamplingPolicy::ZeroWait, 3, 1).unwrap();
        let csv = trace_csv(&path);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "stage,jam,delay,interval,sample_epoch");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,"));
        assert!(lines[3].starts_with("2,"));
        let epoch: f64 = lines[3].split(',').nth(4).unwrap().parse().unwrap();
        assert_eq!(epoch, 3.0);
    }
}
