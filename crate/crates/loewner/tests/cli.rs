use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_loewner"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

const AFFINE: &str = r#"{"d": 1, "nodes": [
  {"x": [0], "f": 0, "grad": [1]},
  {"x": [1], "f": 1, "grad": [1]},
  {"x": [3], "f": 3, "grad": [1]}]}"#;

const XY: &str = r#"{"d": 2, "nodes": [
  {"x": [1, 1], "f": 1, "grad": [1, 1]},
  {"x": [2, 2], "f": 4, "grad": [2, 2]}]}"#;

const BIDISK: &str = r#"{"kind": "transfer", "grading": [1, 1], "unitary_flag": true,
  "a": [0, 0], "beta": [[0, 0], [1, 0]], "gamma": [[1, 0], [0, 0]],
  "D": [[[0, 0], [0, 0]], [[1, 0], [0, 0]]]}"#;

#[test]
fn affine_certifies_with_all_ones_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "affine.json", AFFINE);
    let (code, stdout, _) = run(&["certify", "--input", input.to_str().unwrap()]);
    assert_eq!(code, 0);
    let report = json(&stdout);
    assert_eq!(report["status"], "certified");
    for row in report["certificate"]["kernels"][0].as_array().unwrap() {
        for entry in row.as_array().unwrap() {
            assert_eq!(entry[0].as_f64().unwrap(), 1.0);
            assert_eq!(entry[1].as_f64().unwrap(), 0.0);
        }
    }
}

#[test]
fn product_is_refuted_with_a_serialized_witness() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "xy.json", XY);
    let out = dir.path().join("report.json");
    let (code, stdout, _) = run(&["certify", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stdout.is_empty());
    let report = json(&std::fs::read_to_string(&out).unwrap());
    let r = &report["refutation"];
    assert_eq!(r["kind"], "infeasible");
    assert!((r["raw_min_eig"].as_f64().unwrap() + 3.0).abs() < 1e-9);
    assert!(r["witness_min_eig"].as_f64().unwrap() < -1e-9);
    assert_eq!(r["witness"].as_array().unwrap().len(), 2);
}

#[test]
fn geomean_fuzz_passes() {
    let (code, stdout, _) = run(&["fuzz", "--mode", "geomean", "--s", "0.5", "--trials", "200", "--seed", "7"]);
    assert_eq!(code, 0);
    let report = json(&stdout);
    assert!(report["worst_violation"].as_f64().unwrap() >= -1e-8);
    assert_eq!(report["passes"], 200);
}

#[test]
fn product_fuzz_with_larger_power_reports_exploration() {
    let (code, stdout, _) = run(&["fuzz", "--mode", "geomean", "--s", "2", "--trials", "200", "--seed", "7"]);
    let report = json(&stdout);
    assert_eq!(report["asserted"], false);
    assert_eq!(code, 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["fuzz", "--mode", "global"]).0, 1);
    assert_eq!(run(&["certify"]).0, 1);
    assert_eq!(run(&["certify", "--input", "/nonexistent/file.json"]).0, 1);
    assert_eq!(run(&["fuzz", "--seed", "1", "--mode", "global", "--box", "1,0;0,1"]).0, 1);
    assert_eq!(run(&["nonsense"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn schema_errors_name_the_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let bad = BIDISK.replace(r#""beta": [[0, 0], [1, 0]]"#, r#""beta": [[0, 0], [1]]"#);
    let input = write(dir.path(), "bad.json", &bad);
    let (code, _, stderr) = run(&["synth", "--input", input.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.contains("/beta/1"), "{stderr}");
}

#[test]
fn synth_and_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bidisk.json", BIDISK);
    let out = dir.path().join("synth.json");
    let (code, _, _) = run(&["synth", "--input", input.to_str().unwrap(), "--tau", "0,1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let report = json(&std::fs::read_to_string(&out).unwrap());
    assert!(report["realization_residual"].as_f64().unwrap() <= 1e-8);
    assert!(report["cauchy_residual"].as_f64().unwrap() <= 1e-8);

    let cauchy = write(dir.path(), "cauchy.json", &report["cauchy"].to_string());
    let (code, stdout, _) = run(&["eval", "--input", cauchy.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(code, 0, "{stdout}");
    let (code, _, _) = run(&["fuzz", "--mode", "global", "--seed", "3", "--trials", "30", "--input", cauchy.to_str().unwrap(), "--box", "-0.3,0.3;-0.3,0.3"]);
    assert_eq!(code, 0);
}

#[test]
fn eval_measure_and_boundary_sum() {
    let dir = tempfile::tempdir().unwrap();
    let circle = write(
        dir.path(),
        "mu.json",
        r#"{"support": "circle", "atoms": [{"theta": 0.0, "mass": 0.5}, {"theta": 3.141592653589793, "mass": 0.5}]}"#,
    );
    let (code, stdout, _) = run(&["eval", "--input", circle.to_str().unwrap(), "--at", "0.3,0.2", "--tau", "0,1"]);
    assert_eq!(code, 0);
    let report = json(&stdout);
    assert!(report["bpoint_sum"]["sum"].as_f64().unwrap() > 0.0);
    let line = write(dir.path(), "line.json", r#"{"support": "line", "atoms": [{"loc": -1.0, "mass": 1.0}, {"loc": 2.0, "mass": 0.25}]}"#);
    assert_eq!(run(&["eval", "--input", line.to_str().unwrap()]).0, 0);
}

#[test]
fn report_is_canonical_and_keeps_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "xy.json", XY);
    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    assert_eq!(run(&["certify", "--input", input.to_str().unwrap(), "--out", first.to_str().unwrap()]).0, 2);
    assert_eq!(run(&["report", "--input", first.to_str().unwrap(), "--out", second.to_str().unwrap()]).0, 2);
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn inconclusive_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "xy.json", XY);
    let (code, stdout, _) = run(&["certify", "--input", input.to_str().unwrap(), "--max-iter", "3"]);
    assert_eq!(code, 3);
    assert_eq!(json(&stdout)["status"], "inconclusive");
}

#[test]
fn fuzz_is_deterministic_end_to_end() {
    let args = ["fuzz", "--mode", "local", "--seed", "99", "--trials", "40"];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
}
