use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dirac-minmax"));
    cmd.env("SOURCE_DATE_EPOCH", "1700000000");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn solve_reports_exact_energy_for_exact_power() {
    let out = run(&["solve", "--Z", "20", "--trial", "exact-power"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!(v["gap_to_exact"].as_f64().unwrap().abs() < 1e-10);
    assert_eq!(v["trial"], "exact-power");
    assert_eq!(v["coupling"], "same-radial");
    let m = &v["manifest"];
    assert_eq!(m["command"], "solve");
    assert_eq!(m["parameters"]["Z"], "20");
    assert_eq!(m["timestamp"], "2023-11-14T22:13:20Z");
    assert!(m["constants_used"]["c"].as_f64().unwrap() > 137.0);
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        &["solve", "--Z", "200"][..],
        &["solve", "--Z", "1", "--trial", "exact-power", "--coupling", "kb"],
        &["solve", "--Z", "1", "--points", "2"],
        &["solve", "--Z", "abc"],
        &["solve"],
        &["scan", "shower", "--Z", "1", "--zeta", "1", "--lambda", "3:1:0"],
        &["frobnicate"],
    ] {
        let out = run(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty(), "{args:?} wrote to stdout");
    }
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["scan", "--help"])), 0);
}

#[test]
fn unwritable_output_exits_with_one_and_leaves_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("x.csv");
    let out = run(&["scan", "maxmin", "--Z", "1", "--out", target.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(listing(dir.path()).is_empty());
}

#[test]
fn csv_goes_to_stdout_with_manifest_on_stderr() {
    let out = run(&["scan", "shower", "--Z", "1", "--zeta", "0.5,1,2", "--lambda", "0.001:0.02:20"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("zeta,lambda,eps_minus_mc2"));
    assert_eq!(lines.count(), 60);
    let manifest: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(manifest["command"], "scan shower");
    assert_eq!(manifest["parameters"]["lambda"], "0.001:0.02:20");
}

#[test]
fn out_writes_file_and_manifest_only() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("fig5.csv");
    let out = run(&["scan", "fig5", "--Z", "1", "--zeta", "0.5:2:7", "--out", target.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    assert_eq!(listing(dir.path()), ["fig5.csv", "fig5.csv.manifest.json"]);
    let text = std::fs::read_to_string(&target).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(text.starts_with("zeta,eps_plus_minus_mc2,eps_minus_plus_mc2,pot_plus,pot_minus\n"));
}

#[test]
fn dft_fallacy_writes_density_table() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("dft.csv");
    let out = run(&["scan", "dft-fallacy", "--Z", "1", "--n", "1,3", "--r", "0.1:5:25", "--out", target.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        listing(dir.path()),
        ["dft.csv", "dft.csv.manifest.json", "dft.density.csv", "dft.density.csv.manifest.json"]
    );
    let density = std::fs::read_to_string(dir.path().join("dft.density.csv")).unwrap();
    assert_eq!(density.lines().next(), Some("r,density_n1,density_n3"));
    assert_eq!(density.lines().count(), 26);
}

#[test]
fn dft_fallacy_requires_out() {
    assert_eq!(code(&run(&["scan", "dft-fallacy", "--Z", "1"])), 2);
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# hydrogen-like\nZ = 5\ntrial=exact-power\n").unwrap();
    let from_file = stdout_json(&run(&["solve", "--config", cfg.to_str().unwrap()]));
    assert_eq!(from_file["manifest"]["parameters"]["Z"], "5");
    let overridden = stdout_json(&run(&["solve", "--config", cfg.to_str().unwrap(), "--Z", "3"]));
    assert_eq!(overridden["manifest"]["parameters"]["Z"], "3");
    assert_eq!(overridden["trial"], "exact-power");

    std::fs::write(&cfg, "Z\n").unwrap();
    assert_eq!(code(&run(&["solve", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn speed_of_light_override_reaches_manifest() {
    let v = stdout_json(&run(&["--c", "13703.5999084", "solve", "--Z", "1", "--trial", "exact-power"]));
    assert_eq!(v["manifest"]["constants_used"]["c"].as_f64().unwrap(), 13703.5999084);
    assert!((v["eps_minus_mc2"].as_f64().unwrap() + 0.5).abs() < 1e-8);
    assert_eq!(code(&run(&["--c", "-1", "solve", "--Z", "1"])), 2);
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["scan", "maxmin", "--Z", "2", "--zeta", "0.01:3:12"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn matrix_reports() {
    let c = stdout_json(&run(&["matrix", "collapse"]));
    assert_eq!(c["collapsed"], true);
    assert_eq!(c["violations"], 0);
    let n = stdout_json(&run(&["matrix", "nepp", "--eg", "18000"]));
    assert_eq!(n["bound_satisfied"], true);
    let j = stdout_json(&run(&["matrix", "conjugation", "--uppers", "0.5,2,3"]));
    assert_eq!(j["dim"], 6);
    assert!(j["max_asymmetry_over_mc2"].as_f64().unwrap() < 1e-12);
}
