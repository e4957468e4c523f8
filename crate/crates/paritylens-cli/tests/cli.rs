//! End-to-end tests of the `paritylens` binary: exit codes, the split
//! between human and machine output, byte-level determinism of repeated
//! runs, and a simulate-then-audit pipeline.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_paritylens")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary launches")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process not killed by signal")
}

fn audit_reference_args(json: bool) -> Vec<&'static str> {
    let mut args = vec!["audit"];
    if json {
        args.push("--json");
    }
    args.extend([
        "--sensitive",
        "gender",
        "--permissible",
        "x",
        "--outcome",
        "qualified",
        "--decision",
        "hired",
    ]);
    args
}

// ---- audit ---------------------------------------------------------------

#[test]
fn audit_perfect_predictor_exits_zero() {
    let path = fixture("perfect_predictor.csv");
    let mut args = audit_reference_args(false);
    args.push(path.to_str().unwrap());
    let out = run(&args);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    assert!(
        text.contains("all requested criteria satisfied"),
        "unexpected output:\n{text}"
    );
}

#[test]
fn audit_violation_exits_two_and_is_deterministic() {
    let path = fixture("hiring_example.csv");
    let mut args = audit_reference_args(true);
    args.push(path.to_str().unwrap());

    let first = run(&args);
    let second = run(&args);
    assert_eq!(code(&first), 2);
    assert_eq!(code(&second), 2);
    assert_eq!(first.stdout, second.stdout, "machine output must be stable");

    // stdout must be exactly one JSON document...
    let report: serde_json::Value =
        serde_json::from_str(&stdout_str(&first)).expect("stdout parses as JSON");
    for key in ["version", "mode", "dataset", "groups", "verdicts", "theorem_conditions"] {
        assert!(report.get(key).is_some(), "missing key {key}");
    }
    // ... with rationals carried as exact integer pairs.
    let gap = &report["verdicts"][0]["gap"];
    assert!(gap.get("num").is_some() && gap.get("den").is_some());
    // ... while the human narration went to stderr.
    assert!(!first.stderr.is_empty(), "human text belongs on stderr in --json mode");
}

#[test]
fn audit_criteria_selection_drives_exit_code_not_report() {
    let path = fixture("hiring_example.csv");
    let mut args = audit_reference_args(true);
    args.extend(["--criteria", "dp,erb"]);
    args.push(path.to_str().unwrap());
    let out = run(&args);
    assert_eq!(code(&out), 2);
    // The report always carries the full set of checks; the selection
    // only decides which violations count against the exit code.
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let verdicts = report["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 9);
    assert!(stderr_str(&out)
        .contains("result: violated criteria: demographic-parity, error-rate-balance"));
}

#[test]
fn audit_csv_without_roles_is_an_error() {
    let path = fixture("hiring_example.csv");
    let out = run(&["audit", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr_str(&out).contains("--outcome"));
}

#[test]
fn audit_unknown_criterion_is_an_error() {
    let path = fixture("hiring_example.csv");
    let mut args = audit_reference_args(false);
    args.extend(["--criteria", "karma"]);
    args.push(path.to_str().unwrap());
    let out = run(&args);
    assert_eq!(code(&out), 1);
    assert!(stderr_str(&out).contains("karma"));
}

#[test]
fn audit_missing_file_is_an_error() {
    let mut args = audit_reference_args(false);
    args.push("/nonexistent/data.csv");
    let out = run(&args);
    assert_eq!(code(&out), 1);
}

// ---- scenario subcommands --------------------------------------------------

#[test]
fn rates_json_has_exact_fractions() {
    let path = fixture("scenario_blind.kv");
    let out = run(&["sd-rates", "--json", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    for key in ["scenario", "policy", "rates"] {
        assert!(doc.get(key).is_some(), "missing key {key}");
    }
    // Blind technology, phi = 1/2, d = 1/4 for both genders:
    // TPR = phi + (1-phi) d = 5/8 regardless of gender.
    for gender in ["m", "f"] {
        let tpr = &doc["rates"][gender]["tpr"];
        assert_eq!(tpr["num"], serde_json::json!(5), "{gender}: {tpr}");
        assert_eq!(tpr["den"], serde_json::json!(8), "{gender}: {tpr}");
    }
}

#[test]
fn rates_needs_a_policy_from_somewhere() {
    // The precision fixture carries no policy block.
    let path = fixture("scenario_precision.json");
    let out = run(&["sd-rates", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr_str(&out).contains("policy"));

    // One flag without the other is also rejected.
    let out = run(&["sd-rates", "--d-m", "1/4", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);

    // Both flags together work.
    let out = run(&["sd-rates", "--d-m", "1/4", "--d-f", "1/3", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
}

#[test]
fn optimal_reports_the_threshold() {
    let path = fixture("scenario_blind.kv");
    let out = run(&["sd-optimal", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
    let text = stdout_str(&out);
    // B = 1, omega = -2 puts the hire bar at 2/3.
    assert!(text.contains("optimal threshold: 2/3"), "output:\n{text}");
}

#[test]
fn feasible_error_rate_balance_is_empty_for_unequal_precision() {
    let path = fixture("scenario_precision.json");
    let out = run(&[
        "sd-feasible",
        "--goal",
        "error-rate-balance",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
    assert!(stdout_str(&out).contains("feasible set: empty"));
}

#[test]
fn feasible_json_reports_points() {
    let path = fixture("scenario_precision.json");
    let out = run(&[
        "sd-feasible",
        "--json",
        "--goal",
        "pos-pred-parity",
        "--grid",
        "21",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let points = doc["points"].as_array().unwrap();
    // PPV parity holds along an exact line through the origin here, so the
    // grid search must find interior points as well as the origin.
    assert!(points.len() > 1, "found {} point(s)", points.len());
}

// ---- simulation ------------------------------------------------------------

#[test]
fn simulate_is_deterministic_and_its_output_audits() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    let scenario = fixture("scenario_blind.kv");

    for (target, expect_new) in [(&out_a, true), (&out_b, true)] {
        let out = run(&[
            "sd-simulate",
            "--n",
            "400",
            "--seed",
            "11",
            "--out",
            target.to_str().unwrap(),
            scenario.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
        assert_eq!(target.exists(), expect_new);
    }
    let bytes_a = std::fs::read(&out_a).unwrap();
    let bytes_b = std::fs::read(&out_b).unwrap();
    assert_eq!(bytes_a, bytes_b, "same seed must give identical CSV bytes");

    // The generated file is itself auditable input (its permissible
    // column is the three-valued signal, named "score").
    let args = [
        "audit",
        "--sensitive",
        "gender",
        "--permissible",
        "score",
        "--outcome",
        "qualified",
        "--decision",
        "hired",
        out_a.to_str().unwrap(),
    ];
    let audit = run(&args);
    assert!(
        [0, 2].contains(&code(&audit)),
        "audit of simulated data must complete; stderr: {}",
        stderr_str(&audit)
    );
}

#[test]
fn simulate_without_out_in_json_mode_emits_dataset_json() {
    let scenario = fixture("scenario_blind.kv");
    let out = run(&[
        "sd-simulate",
        "--json",
        "--n",
        "50",
        "--seed",
        "3",
        scenario.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!(doc.get("schema").is_some() && doc.get("records").is_some());
}

#[test]
fn simulate_rejects_zero_records() {
    let scenario = fixture("scenario_blind.kv");
    let out = run(&[
        "sd-simulate",
        "--n",
        "0",
        "--seed",
        "1",
        scenario.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
}

// ---- exhaustive verification ------------------------------------------------

#[test]
fn verify_impossibility_small_space() {
    let out = run(&[
        "verify-impossibility",
        "--json",
        "--x-arity",
        "2",
        "--mass-denominator",
        "2",
        "--prob-denominator",
        "2",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["counterexample_count"], serde_json::json!(0));
    assert_eq!(doc["verified"], serde_json::json!(true));
    assert_eq!(doc["examined"], doc["identity_checks"]);
}

// ---- global behaviour --------------------------------------------------------

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["audit", "--help"])), 0);
}

#[test]
fn unknown_subcommand_exits_one() {
    assert_eq!(code(&run(&["frobnicate"])), 1);
}

#[test]
fn thread_env_var_must_be_a_positive_integer() {
    let path = fixture("perfect_predictor.csv");
    let mut args = audit_reference_args(false);
    args.push(path.to_str().unwrap());
    let out = Command::new(bin())
        .args(&args)
        .env("PARITYLENS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    assert!(stderr_str(&out).contains("PARITYLENS_THREADS"));

    let out = Command::new(bin())
        .args(&args)
        .env("PARITYLENS_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr_str(&out));
}
