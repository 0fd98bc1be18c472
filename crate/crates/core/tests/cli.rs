use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn abmetric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abmetric")).args(args).output().expect("binary runs")
}

fn run_with(command: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![command, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    abmetric(&args)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

const BASE: &str = "name = \"x\"\nn = 2\n[alpha]\nkind = \"euclidean\"\n[beta]\nkind = \"constant\"\nb = [0.5, 0.0]\n[probe]\npoints = [[0.0, 0.0]]\n";

fn write_config(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn scalars_row_matches_closed_forms() {
    let out = run_with("scalars", &fixture("scalars_randers.toml"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["schema_version"], abmetric::cli::SCHEMA_VERSION);
    let rows = report["fixtures"][0]["tables"][0]["rows"].as_array().unwrap();
    let row = rows.iter().find(|r| r["s"].as_f64() == Some(0.2)).unwrap();
    let get = |k: &str| row[k].as_f64().unwrap();
    assert!((get("Delta") - 1.2).abs() < 1e-12);
    assert!((get("Phi") + 3.6).abs() < 1e-12);
    assert!((get("Xi") + 1.125).abs() < 1e-12);
}

#[test]
fn floats_use_seventeen_digits() {
    let out = run_with("scalars", &fixture("scalars_randers.toml"), &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"Xi\": -1.1250000000000000e+0"), "{text}");
}

#[test]
fn csv_table() {
    let out = run_with("scalars", &fixture("scalars_randers.toml"), &["--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("fixture,point,b2,s,phi,Q,Delta"));
    assert_eq!(lines.count(), 4);
    // csv only makes sense for the scalar grids
    assert_eq!(run_with("verify", &fixture("scalars_randers.toml"), &["--format", "csv"]).status.code(), Some(1));
}

#[test]
fn riemannian_verifies_with_zero_curvature() {
    let config = fixture("riemannian.toml");
    assert_eq!(run_with("verify", &config, &[]).status.code(), Some(0));
    let report = json(&run_with("analyze", &config, &[]));
    for entry in report["fixtures"][0]["entries"].as_array().unwrap() {
        let c = &entry["curvature"];
        assert!(c["S_closed"].as_f64().unwrap().abs() < 1e-14);
        for row in c["E_closed"].as_array().unwrap() {
            assert!(row.as_array().unwrap().iter().all(|v| v.as_f64().unwrap().abs() < 1e-14));
        }
    }
}

#[test]
fn example_profiles_are_equivalent() {
    let out = run_with("equivalence", &fixture("profiles.toml"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let fixtures = report["fixtures"].as_array().unwrap();
    assert_eq!(fixtures.len(), 4);
    for f in fixtures {
        for p in f["points"].as_array().unwrap() {
            assert_eq!(p["check"]["verdict"], "equivalent", "{}", f["fixture"]);
        }
    }
}

#[test]
fn same_seed_same_bytes() {
    for command in ["verify", "classify", "analyze"] {
        let a = run_with(command, &fixture("funk.toml"), &["--seed", "3"]);
        let b = run_with(command, &fixture("funk.toml"), &["--seed", "3"]);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{command}");
    }
}

#[test]
fn report_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let config = fixture("funk.toml");
    let out = run_with("classify", &config, &["--report", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), run_with("classify", &config, &[]).stdout);
}

#[test]
fn point_override() {
    let config = fixture("funk.toml");
    let report = json(&run_with("classify", &config, &["--point", "-0.1,0.2"]));
    let points = report["fixtures"][0]["points"].as_array().unwrap();
    assert_eq!(points.len(), 1);
    assert_eq!(points[0]["classification"]["x"][0].as_f64(), Some(-0.1));
    // outside the unit ball
    assert_eq!(run_with("classify", &config, &["--point", "0.9,0.9"]).status.code(), Some(1));
    assert_eq!(run_with("classify", &config, &["--point", "0.1"]).status.code(), Some(1));
}

#[test]
fn parse_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(abmetric(&["verify", "--config", "/nonexistent.toml"]).status.code(), Some(1));
    assert_eq!(abmetric(&["frobnicate", "--config", "x.toml"]).status.code(), Some(1));
    let out = run_with("verify", &write_config(&dir, "name = \"x\"\nn = 2\n[alpha\n"), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let out = run_with("verify", &write_config(&dir, &format!("{BASE}[phi]\nfamily = \"power\"\n")), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("phi.m"));
}

#[test]
fn precondition_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{BASE}[phi]\nfamily = \"randers\"\n[scalars]\nb2 = 0.25\ns = [0.6]\n");
    let out = run_with("scalars", &write_config(&dir, &text), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn verification_failure_lists_every_residual() {
    let dir = tempfile::tempdir().unwrap();
    let text = "builtin = \"linear_power1_n2\"\n[tolerances]\ns_rel = 1e-30\n";
    let out = run_with("verify", &write_config(&dir, text), &[]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let fails: Vec<_> = stderr.lines().filter(|l| l.starts_with("FAIL")).collect();
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "failed");
    let listed = report["failures"].as_array().unwrap();
    assert!(fails.len() > 1);
    assert_eq!(fails.len(), listed.len());
    assert!(listed.iter().all(|c| c["name"] == "s_oracle"));
}
