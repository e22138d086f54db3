//! End-to-end command-line tests: exit codes, file outputs, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_minimax-is"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Small benchmark model shared by the tests.
fn make_model(dir: &Path) -> PathBuf {
    let path = dir.join("model.json");
    let out = run(&[
        "gridworld",
        "--width",
        "3",
        "--height",
        "3",
        "--obstacles",
        "none",
        "--agent-start",
        "(-1,-1)",
        "--y0",
        "(1,1)",
        "--horizon",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn value_lines(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| l.trim_start().starts_with("y0 "))
        .map(|l| l.trim().to_string())
        .collect()
}

#[test]
fn gridworld_defaults_report_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gw.json");
    let out = run(&["gridworld", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("72 free cells"), "{text}");
    assert!(text.contains("radius-1 cell cover"), "{text}");
    assert!(path.exists());
}

#[test]
fn trivial_single_cell_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.json");
    let out = run(&[
        "gridworld",
        "--width",
        "1",
        "--height",
        "1",
        "--obstacles",
        "none",
        "--agent-start",
        "(0,0)",
        "--y0",
        "(0,0)",
        "--horizon",
        "0",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("1 free cells"));
}

#[test]
fn unknown_flag_is_usage_error_2() {
    let out = run(&["gridworld", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn obstacle_start_is_input_error_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let out = run(&[
        "gridworld",
        "--agent-start",
        "(-3,0)", // inside the default wall
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn memory_and_infostate_report_identical_values() {
    let dir = tempfile::tempdir().unwrap();
    let model = make_model(dir.path());
    let mem = run(&["solve", "--model", model.to_str().unwrap(), "--method", "memory"]);
    assert!(mem.status.success());
    let info = run(&[
        "solve",
        "--model",
        model.to_str().unwrap(),
        "--method",
        "infostate",
    ]);
    assert!(info.status.success());
    assert_eq!(value_lines(&stdout(&mem)), value_lines(&stdout(&info)));
}

#[test]
fn zero_radius_approx_matches_infostate() {
    let dir = tempfile::tempdir().unwrap();
    let model = make_model(dir.path());
    let info = run(&[
        "solve",
        "--model",
        model.to_str().unwrap(),
        "--method",
        "infostate",
    ]);
    let approx = run(&[
        "solve",
        "--model",
        model.to_str().unwrap(),
        "--method",
        "approx",
        "--gamma",
        "0",
    ]);
    assert!(approx.status.success());
    assert_eq!(value_lines(&stdout(&info)), value_lines(&stdout(&approx)));
}

#[test]
fn capacity_overflow_is_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let model = make_model(dir.path());
    let out = run(&[
        "solve",
        "--model",
        model.to_str().unwrap(),
        "--method",
        "memory",
        "--budget",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_suites_pass_on_random_batches() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    for suite in ["theorem1", "def1"] {
        let out = run(&[
            "verify",
            "--suite",
            suite,
            "--random",
            "3",
            "--seed",
            "5",
            "--out",
            report.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "suite {suite}: {}",
            stdout(&out)
        );
        assert!(stdout(&out).contains("PASS"));
    }
    let parsed: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(parsed["passed"], serde_json::Value::Bool(true));
}

#[test]
fn verify_def2_with_zero_radius_reports_zero_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("ledger.json");
    let out = run(&[
        "verify",
        "--suite",
        "def2",
        "--random",
        "2",
        "--seed",
        "9",
        "--gamma",
        "0",
        "--ledger-out",
        ledger.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let parsed: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&ledger).unwrap()).unwrap();
    for entry in parsed.as_array().unwrap() {
        assert_eq!(entry["measured"]["epsilon_terminal"], 0.0);
        for a in entry["measured"]["alphas"].as_array().unwrap() {
            assert_eq!(a.as_f64().unwrap(), 0.0);
        }
    }
}

#[test]
fn verify_bounds_suite_passes() {
    let out = run(&["verify", "--suite", "bounds", "--random", "4", "--seed", "11"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("within formula"));
}

#[test]
fn simulate_zero_runs_writes_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let model = make_model(dir.path());
    let policy = dir.path().join("policy.json");
    let csv = dir.path().join("stats.csv");
    let solve = run(&[
        "solve",
        "--model",
        model.to_str().unwrap(),
        "--method",
        "infostate",
        "--out",
        policy.to_str().unwrap(),
    ]);
    assert!(solve.status.success());
    let out = run(&[
        "simulate",
        "--model",
        model.to_str().unwrap(),
        "--policy-a",
        policy.to_str().unwrap(),
        "--policy-b",
        policy.to_str().unwrap(),
        "--runs",
        "0",
        "--seed",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let content = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(content.trim(), "run,cost_a,cost_b,diff");
}

#[test]
fn identical_policies_give_all_zero_differences() {
    let dir = tempfile::tempdir().unwrap();
    let model = make_model(dir.path());
    let policy = dir.path().join("policy.json");
    run(&[
        "solve",
        "--model",
        model.to_str().unwrap(),
        "--method",
        "infostate",
        "--out",
        policy.to_str().unwrap(),
    ]);
    let csv = dir.path().join("stats.csv");
    let out = run(&[
        "simulate",
        "--model",
        model.to_str().unwrap(),
        "--policy-a",
        policy.to_str().unwrap(),
        "--policy-b",
        policy.to_str().unwrap(),
        "--runs",
        "25",
        "--seed",
        "7",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let content = std::fs::read_to_string(&csv).unwrap();
    for line in content.lines().skip(1) {
        assert!(line.ends_with(",0"), "{line}");
    }
}

#[test]
fn missing_policy_file_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let model = make_model(dir.path());
    let out = run(&[
        "simulate",
        "--model",
        model.to_str().unwrap(),
        "--policy-a",
        "nope-a.json",
        "--policy-b",
        "nope-b.json",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let model_a = dir.path().join("a.json");
    let model_b = dir.path().join("b.json");
    for path in [&model_a, &model_b] {
        run(&[
            "gridworld",
            "--width",
            "3",
            "--height",
            "3",
            "--obstacles",
            "none",
            "--agent-start",
            "(0,0)",
            "--y0",
            "(1,1)",
            "--horizon",
            "2",
            "--out",
            path.to_str().unwrap(),
        ]);
    }
    assert_eq!(
        std::fs::read(&model_a).unwrap(),
        std::fs::read(&model_b).unwrap()
    );

    let sol_a = dir.path().join("sa.json");
    let sol_b = dir.path().join("sb.json");
    for (model, sol) in [(&model_a, &sol_a), (&model_b, &sol_b)] {
        run(&[
            "solve",
            "--model",
            model.to_str().unwrap(),
            "--method",
            "approx",
            "--gamma",
            "1",
            "--out",
            sol.to_str().unwrap(),
        ]);
    }
    assert_eq!(std::fs::read(&sol_a).unwrap(), std::fs::read(&sol_b).unwrap());

    let csv_a = dir.path().join("ca.csv");
    let csv_b = dir.path().join("cb.csv");
    for csv in [&csv_a, &csv_b] {
        let out = run(&[
            "simulate",
            "--model",
            model_a.to_str().unwrap(),
            "--policy-a",
            sol_a.to_str().unwrap(),
            "--policy-b",
            sol_a.to_str().unwrap(),
            "--runs",
            "50",
            "--seed",
            "13",
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&csv_a).unwrap(), std::fs::read(&csv_b).unwrap());
}

#[test]
fn policy_for_wrong_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let model = make_model(dir.path());
    let other = dir.path().join("other.json");
    run(&[
        "gridworld",
        "--width",
        "3",
        "--height",
        "3",
        "--obstacles",
        "none",
        "--agent-start",
        "(0,0)",
        "--y0",
        "(0,0)",
        "--horizon",
        "1",
        "--out",
        other.to_str().unwrap(),
    ]);
    let policy = dir.path().join("p.json");
    run(&[
        "solve",
        "--model",
        other.to_str().unwrap(),
        "--method",
        "infostate",
        "--out",
        policy.to_str().unwrap(),
    ]);
    let out = run(&[
        "simulate",
        "--model",
        model.to_str().unwrap(),
        "--policy-a",
        policy.to_str().unwrap(),
        "--policy-b",
        policy.to_str().unwrap(),
        "--runs",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
