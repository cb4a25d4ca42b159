//! End-to-end tests of the binary: exit codes, output formats, artifact
//! files, and reproducibility.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aoi-jamgame"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(output: &Output) -> &str {
    std::str::from_utf8(&output.stdout).unwrap()
}

fn stderr(output: &Output) -> &str {
    std::str::from_utf8(&output.stderr).unwrap()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("process exited normally")
}

fn json(output: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(output)).expect("stdout is a JSON document")
}

fn write_f_star(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("fstar.json");
    std::fs::write(&path, r#"{"atoms":[[0.0,0.75],[4.0,0.25]],"pieces":[]}"#).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(stdout(&help).contains("aoi-jamgame"));
    assert!(stdout(&help).contains("equilibrium"));

    let version = run(&["--version"]);
    assert_eq!(code(&version), 0);
    assert!(stdout(&version).contains("aoi-jamgame"));
}

#[test]
fn invalid_input_exits_one_with_message() {
    // Infeasible budget: a validation error, not an internal one.
    let out = run(&["equilibrium", "--a-max", "1", "--a-avg", "2"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("error"));

    // Unparsable flag value: clap's error, same exit class.
    let out = run(&["equilibrium", "--a-max", "abc", "--a-avg", "1"]);
    assert_eq!(code(&out), 1);

    // Missing distribution file: path shows up in the message.
    let out = run(&["best-response", "--dist", "/nonexistent/d.json"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("d.json"));
}

#[test]
fn equilibrium_text_pins_the_reference_solution() {
    let out = run(&["equilibrium", "--a-max", "4", "--a-avg", "1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("1.33333333333e0"), "beta* line:\n{text}");
    assert!(text.contains("verification     pass"));
}

#[test]
fn equilibrium_json_feeds_best_response() {
    let out = run(&["equilibrium", "--a-max", "4", "--a-avg", "1", "--json"]);
    assert_eq!(code(&out), 0);
    let value = json(&out);
    assert_eq!(value["schema"], "aoi-jamgame/1");
    let beta_star = value["beta_star"].as_f64().unwrap();
    assert!((beta_star - 4.0 / 3.0).abs() <= 1e-12);
    assert_eq!(value["age_stage_ratio"].as_f64().unwrap(), 2.0 * value["age_time_average"].as_f64().unwrap());

    // The embedded attacker law is itself a loadable distribution file.
    let dir = tempfile::tempdir().unwrap();
    let dist_path = dir.path().join("from-export.json");
    std::fs::write(
        &dist_path,
        serde_json::to_string(&value["jam_distribution"]).unwrap(),
    )
    .unwrap();
    let out = run(&["best-response", "--dist", dist_path.to_str().unwrap(), "--json"]);
    assert_eq!(code(&out), 0);
    let value = json(&out);
    assert!((value["beta"].as_f64().unwrap() - beta_star).abs() <= 1e-8);
    assert!(value["residual"].as_f64().unwrap().abs() <= 1e-9);
}

#[test]
fn unattainable_tolerance_is_an_internal_error() {
    // For this law the computed residual never rounds to exactly zero near
    // the root, so a tolerance below ulp scale exhausts the iteration budget.
    // (Against some laws, e.g. the two-extreme one, the residual does hit
    // 0.0 and any tolerance is met.)
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("half-two.json");
    std::fs::write(&path, r#"{"atoms":[[0.5,0.5],[2.0,0.5]]}"#).unwrap();
    let out = run(&[
        "best-response",
        "--dist",
        path.to_str().unwrap(),
        "--tol",
        "1e-300",
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("error"));
}

#[test]
fn simulate_point_mass_zero_wait_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("point.json");
    std::fs::write(&path, r#"{"atoms":[[1.0,1.0]]}"#).unwrap();
    let out = run(&[
        "simulate",
        "--dist",
        path.to_str().unwrap(),
        "--policy",
        "zero-wait",
        "--stages",
        "777",
        "--seed",
        "5",
    ]);
    assert_eq!(code(&out), 0);
    let value = json(&out);
    assert_eq!(value["schema"], "aoi-jamgame/1");
    assert_eq!(value["stages"].as_u64().unwrap(), 777);
    assert_eq!(value["age_estimate"].as_f64().unwrap(), 0.5);
    assert_eq!(value["min_interval"].as_f64().unwrap(), 1.0);
    assert_eq!(value["max_interval"].as_f64().unwrap(), 1.0);
}

#[test]
fn simulate_policy_sources_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write_f_star(&dir);

    // Threshold from a policy file: intervals are exactly max(2, A).
    let policy_path = dir.path().join("policy.json");
    std::fs::write(&policy_path, r#"{"kind":"threshold","beta":2.0}"#).unwrap();
    let out = run(&[
        "simulate",
        "--dist",
        &dist,
        "--policy",
        policy_path.to_str().unwrap(),
        "--stages",
        "20000",
        "--seed",
        "11",
    ]);
    assert_eq!(code(&out), 0);
    let value = json(&out);
    assert_eq!(value["min_interval"].as_f64().unwrap(), 2.0);
    assert_eq!(value["max_interval"].as_f64().unwrap(), 4.0);

    // Built-in best response, with --out mirroring stdout byte for byte.
    let report = dir.path().join("report.json");
    let out = run(&[
        "simulate",
        "--dist",
        &dist,
        "--policy",
        "br",
        "--stages",
        "20000",
        "--seed",
        "11",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&report).unwrap(), out.stdout);

    // Identical invocations are byte-identical.
    let again = run(&[
        "simulate",
        "--dist",
        &dist,
        "--policy",
        "br",
        "--stages",
        "20000",
        "--seed",
        "11",
    ]);
    assert_eq!(again.stdout, out.stdout);

    // The underscore alias for zero-wait parses too.
    let out = run(&[
        "simulate",
        "--dist",
        &dist,
        "--policy",
        "zero_wait",
        "--stages",
        "100",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn sweep_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("s1.csv");
    let second = dir.path().join("s2.csv");
    for path in [&first, &second] {
        let out = run(&[
            "sweep",
            "--a-max",
            "4",
            "--a-avg",
            "1",
            "--alphas",
            "0:0.1:1",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        assert!(stdout(&out).contains("wrote 11 rows"));
    }
    let bytes = std::fs::read(&first).unwrap();
    assert_eq!(bytes, std::fs::read(&second).unwrap());

    let text = String::from_utf8(bytes).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(
        lines[0],
        "alpha,age_equilibrium_policy,age_zero_wait,beta_br,age_simulated"
    );
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 5);
        assert!(line.ends_with(','), "simulation column stays empty: {line}");
    }
    // alpha = 1 endpoint: equilibrium age 4/3 against zero-wait 2.
    assert!(lines[11].starts_with("1.00000000000e0,1.33333333333e0,2.00000000000e0"));
}

#[test]
fn sweep_rejects_malformed_alphas() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("s.csv");
    for alphas in ["1:0.1:0", "a,b", "0:-0.1:1", ""] {
        let out = run(&[
            "sweep",
            "--a-max",
            "4",
            "--a-avg",
            "1",
            "--alphas",
            alphas,
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 1, "alphas spec {alphas:?}");
        assert!(!out_path.exists(), "no artifact on failure for {alphas:?}");
    }
}

#[test]
fn oracle_ci_profile_passes_and_mirrors_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("oracle.json");
    let out = run(&[
        "oracle",
        "--a-max",
        "4",
        "--a-avg",
        "1",
        "--profile",
        "ci",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let value = json(&out);
    assert_eq!(value["schema"], "aoi-jamgame/1");
    assert_eq!(value["pass"], true);
    assert_eq!(std::fs::read(&report).unwrap(), out.stdout);
}

#[test]
fn thread_env_rejects_garbage() {
    let out = bin()
        .env("AOI_JAMGAME_THREADS", "lots")
        .args(["equilibrium", "--a-max", "4", "--a-avg", "1"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("AOI_JAMGAME_THREADS"));
}
