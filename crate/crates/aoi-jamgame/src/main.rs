//! Command-line front end: equilibrium computation, best responses,
//! simulation, the brute-force oracle, and the mixture-sweep experiment.
//!
//! Exit codes: 0 on success, 1 on validation or input errors, 2 on internal
//! assertion failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aoi_jamgame::age::average_age;
use aoi_jamgame::error::{Error, Result};
use aoi_jamgame::io::{
    self, format_sig, AgeStatsExport, BestResponseExport, EquilibriumExport,
};
use aoi_jamgame::model::{GameConfig, SamplingPolicy};
use aoi_jamgame::oracle::{oracle_report, SearchProfile};
use aoi_jamgame::sim::simulate;
use aoi_jamgame::solver::{best_response, equilibrium, verify_equilibrium, DEFAULT_BR_TOL};
use aoi_jamgame::sweep::{sweep_mixture, SimulationSpec};
use aoi_jamgame::THREADS_ENV;

#[derive(Parser)]
#[command(
    name = "aoi-jamgame",
    version,
    about = "Saddle-point analysis and simulation of a jamming game over status-update age"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Maximum per-stage jamming time.
    #[arg(long)]
    a_max: f64,
    /// Mean jamming-time budget.
    #[arg(long)]
    a_avg: f64,
}

impl ConfigArgs {
    fn build(&self) -> Result<GameConfig> {
        GameConfig::new(self.a_max, self.a_avg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Ci,
    Deep,
}

impl From<ProfileArg> for SearchProfile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Ci => SearchProfile::Ci,
            ProfileArg::Deep => SearchProfile::Deep,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute and verify the closed-form saddle point.
    Equilibrium {
        #[command(flatten)]
        config: ConfigArgs,
        /// Emit JSON instead of the text summary.
        #[arg(long)]
        json: bool,
    },
    /// Best-response threshold to a jamming distribution file.
    BestResponse {
        /// Path to a distribution JSON file.
        #[arg(long)]
        dist: PathBuf,
        /// Residual tolerance for the bisection.
        #[arg(long, default_value_t = DEFAULT_BR_TOL)]
        tol: f64,
        /// Emit JSON instead of the text summary.
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo age estimate for a distribution and policy.
    Simulate {
        /// Path to a distribution JSON file.
        #[arg(long)]
        dist: PathBuf,
        /// Policy: a JSON file path, or the literals "br" (best response to
        /// the distribution) or "zero-wait".
        #[arg(long)]
        policy: String,
        #[arg(long)]
        stages: u64,
        #[arg(long)]
        seed: u64,
        /// Also write the JSON report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force adversarial audit of the equilibrium.
    Oracle {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value = "ci")]
        profile: ProfileArg,
        /// Also write the JSON report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mixture-sweep experiment, written as CSV.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Alphas: comma list (0,0.5,1) or range start:step:stop.
        #[arg(long)]
        alphas: String,
        /// Append Monte Carlo estimates: stage count and seed.
        #[arg(long, num_args = 2, value_names = ["STAGES", "SEED"])]
        simulate: Option<Vec<u64>>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn resolve_policy(spec: &str, dist: &aoi_jamgame::JamDistribution) -> Result<SamplingPolicy> {
    match spec {
        "br" => best_response(dist, DEFAULT_BR_TOL),
        "zero-wait" | "zero_wait" => Ok(SamplingPolicy::ZeroWait),
        path => io::load_policy(Path::new(path)),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Equilibrium { config, json } => {
            let cfg = config.build()?;
            let solution = equilibrium(&cfg)?;
            let report = verify_equilibrium(&solution, 1e-9)?;
            if !report.pass {
                return Err(Error::BrokenInvariant(format!(
                    "equilibrium verification failed: {:?}",
                    report.checks
                )));
            }
            if json {
                print!("{}", io::json_string(&EquilibriumExport::from(&solution)));
            } else {
                println!("a_max            {}", format_sig(cfg.a_max()));
                println!("a_avg            {}", format_sig(cfg.a_avg()));
                println!("beta_star        {}", format_sig(solution.beta_star));
                println!(
                    "age time-average {}",
                    format_sig(solution.age.as_time_average())
                );
                println!(
                    "age stage-ratio  {}",
                    format_sig(solution.age.as_stage_ratio())
                );
                let atoms: Vec<String> = solution
                    .dist
                    .atoms()
                    .iter()
                    .map(|(loc, mass)| format!("({}, {})", format_sig(*loc), format_sig(*mass)))
                    .collect();
                println!("attacker atoms   {}", atoms.join(" "));
                println!(
                    "residuals        fixed_point={:e} quadratic={:e} mean_slack={:e}",
                    solution.residuals.fixed_point,
                    solution.residuals.quadratic,
                    solution.residuals.mean_slack
                );
                println!("verification     pass ({} checks)", report.checks.len());
            }
        }
        Command::BestResponse { dist, tol, json } => {
            let dist = io::load_distribution(&dist)?;
            let policy = best_response(&dist, tol)?;
            let SamplingPolicy::Threshold { beta } = policy else {
                unreachable!("best response is always a threshold rule");
            };
            let age = average_age(&dist, &policy)?;
            let residual = beta - age.as_time_average();
            if json {
                print!(
                    "{}",
                    io::json_string(&BestResponseExport {
                        schema: io::SCHEMA_VERSION,
                        beta,
                        residual,
                        tol,
                    })
                );
            } else {
                println!("beta     {}", format_sig(beta));
                println!("age      {}", format_sig(age.as_time_average()));
                println!("residual {residual:e}");
            }
        }
        Command::Simulate {
            dist,
            policy,
            stages,
            seed,
            out,
        } => {
            let dist = io::load_distribution(&dist)?;
            let policy = resolve_policy(&policy, &dist)?;
            let stats = simulate(&dist, &policy, stages, seed)?;
            let text = io::json_string(&AgeStatsExport::from(&stats));
            print!("{text}");
            if let Some(path) = out {
                io::write_text(&path, &text)?;
            }
        }
        Command::Oracle {
            config,
            profile,
            out,
        } => {
            let cfg = config.build()?;
            let report = oracle_report(&cfg, profile.into())?;
            let text = io::json_string(&report);
            print!("{text}");
            if let Some(path) = out {
                io::write_text(&path, &text)?;
            }
            if !report.pass {
                return Err(Error::BrokenInvariant(
                    "oracle audit found a violation; see report".into(),
                ));
            }
        }
        Command::Sweep {
            config,
            alphas,
            simulate,
            out,
        } => {
            let cfg = config.build()?;
            let alphas = io::parse_alpha_spec(&alphas)?;
            let sim = simulate.map(|args| SimulationSpec {
                stages: args[0],
                seed: args[1],
            });
            let rows = sweep_mixture(&cfg, &alphas, sim)?;
            io::write_text(&out, &io::sweep_csv(&rows))?;
            println!("wrote {} rows to {}", rows.len(), out.display());
        }
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        Error::InvalidThreads(format!(
            "{THREADS_ENV} must be a non-negative integer, got `{raw}`"
        ))
    })?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidThreads(format!("{THREADS_ENV}: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_internal() { 2 } else { 1 })
        }
    }
}
