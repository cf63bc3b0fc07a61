//! End-to-end checks of the command-line surface, including the exit-code
//! contract: 0 = success/consistent, 1 = inconsistent, 2 = validation
//! failure, 3 = I/O or parse failure.

use std::path::Path;
use std::process::{Command, Output};

use decohist::scenario::{builtin_spin_half, save_scenario, spin_half_scenario, PsgFile};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decohist"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_consistent(dir: &Path) -> String {
    let path = dir.join("consistent.json");
    save_scenario(&builtin_spin_half(), &path).unwrap();
    path.to_string_lossy().into_owned()
}

fn write_inconsistent(dir: &Path) -> String {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let path = dir.join("inconsistent.json");
    save_scenario(
        &spin_half_scenario([1.0, 0.0, 0.0], [s, 0.0, s], [0.0, 0.0, 1.0]),
        &path,
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_accepts_wellformed_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_consistent(dir.path());
    let out = run(&["validate", &path]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("valid"));
}

#[test]
fn validate_reports_broken_invariants_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut s = builtin_spin_half();
    s.times = vec![2.0, 1.0];
    // write the raw JSON by hand: save_scenario has no reason to accept it
    std::fs::write(&path, serde_json::to_string(&s).unwrap()).unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("strictly increasing"), "stderr: {err}");
}

#[test]
fn malformed_json_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn missing_file_exits_3() {
    let out = run(&["consistency", "/nonexistent/scenario.json"]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn consistency_exit_codes_track_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_consistent(dir.path());
    let bad = write_inconsistent(dir.path());
    let out = run(&["consistency", &good]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("weak-consistent"));

    let out = run(&["consistency", &bad]);
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("violated"));
}

#[test]
fn probabilities_refuse_inconsistent_families() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_consistent(dir.path());
    let bad = write_inconsistent(dir.path());
    let out = run(&["probabilities", &good]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("sum:"));

    let out = run(&["probabilities", &bad]);
    assert_eq!(exit_code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("inconsistent"), "stderr: {err}");
}

#[test]
fn structured_output_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_consistent(dir.path());
    let out = run(&["probabilities", &good, "--format", "structured"]);
    assert_eq!(exit_code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 4);
    let p0 = entries[0]["probability"].as_f64().unwrap();
    assert!((p0 - 1.0).abs() < 1e-10);
}

#[test]
fn medium_condition_flag_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_consistent(dir.path());
    let out = run(&[
        "consistency",
        &good,
        "--condition",
        "medium",
        "--tol",
        "1e-9",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("medium"));
}

#[test]
fn decoherence_matrix_prints_all_entries() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_consistent(dir.path());
    let out = run(&["decoherence-matrix", &good]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    // 4 histories → 16 entries
    assert_eq!(text.matches("d(").count(), 16);
}

#[test]
fn compat_detects_complementary_families() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let x = [1.0, 0.0, 0.0];
    let z = [0.0, 0.0, 1.0];
    save_scenario(&spin_half_scenario(x, x, z), &a).unwrap();
    save_scenario(&spin_half_scenario(x, z, z), &b).unwrap();
    let out = run(&["compat", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("complementary"));
    assert!(text.contains("do not commute"));
}

#[test]
fn compat_of_identical_scenarios_finds_a_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_consistent(dir.path());
    let out = run(&["compat", &good, &good]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("common refinement constructed"));
}

#[test]
fn hpo_command_checks_the_embedded_propositions() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_consistent(dir.path());
    let out = run(&["hpo", &good]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("orthoalgebra axioms: pass"));
}

#[test]
fn psg_validate_reads_a_composition_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.json");
    let file = PsgFile {
        elements: vec!["t1".into(), "t2".into(), "t1t2".into()],
        table: vec![
            ("t1".into(), "t1".into(), "t1".into()),
            ("t2".into(), "t2".into(), "t2".into()),
            ("t1t2".into(), "t1t2".into(), "t1t2".into()),
            ("t1".into(), "t2".into(), "t1t2".into()),
        ],
    };
    std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
    let out = run(&["psg-validate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("associative: true"));
}

#[test]
fn example_spin_half_default_is_consistent() {
    let out = run(&["example", "spin-half"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("analytic"));
    assert!(text.contains("weak-consistent"));
}

#[test]
fn example_spin_half_oblique_axis_is_inconsistent() {
    let out = run(&[
        "example",
        "spin-half",
        "--n0",
        "1,0,0",
        "--nprime",
        "0.7071067811865476,0,0.7071067811865476",
        "--n",
        "0,0,1",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("violated"));
}

#[test]
fn example_spin_half_rejects_non_unit_axis() {
    let out = run(&["example", "spin-half", "--n0", "1,1,1"]);
    assert_eq!(exit_code(&out), 2);
}
