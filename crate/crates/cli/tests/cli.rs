use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn dln(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dln")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SWEEP: &str = r#"{"n0": 64, "p": 32, "widths": [32, 40], "nu": 2.0,
                        "sigma2": {"min": 0.5, "max": 2.0, "count": 4, "scale": "log"}}"#;

#[test]
fn sweep_is_byte_identical_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", SWEEP);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(dln(&["evidence-sweep", "--config", &cfg, "--out", a.to_str().unwrap(), "--threads", "1"]).status.success());
    assert!(dln(&["evidence-sweep", "--config", &cfg, "--out", b.to_str().unwrap(), "--threads", "3"]).status.success());
    let x = fs::read(a.join("evidence-sweep.csv")).unwrap();
    assert_eq!(x, fs::read(b.join("evidence-sweep.csv")).unwrap());
    let text = String::from_utf8(x).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "sigma2,log_evidence,log_evidence_asymptotic,sigma_star2,status");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let cells: Vec<&str> = r.split(',').collect();
        assert_eq!(cells.len(), 5);
        assert_eq!(cells[4], "ok");
        // 17 significant digits.
        assert_eq!(cells[1].split('e').next().unwrap().trim_start_matches('-').len(), 18);
        assert!(cells[1].parse::<f64>().unwrap().is_finite());
    }
}

#[test]
fn seeded_monte_carlo_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"n0": 12, "p": 6, "widths": [8, 12], "nu": [2.0], "samples": 5000}"#,
    );
    let run = |out: &str, seed: &str| {
        let o = dir.path().join(out);
        assert!(dln(&["oracle-density", "--config", &cfg, "--out", o.to_str().unwrap(), "--seed", seed]).status.success());
        fs::read(o.join("oracle-density.csv")).unwrap()
    };
    assert_eq!(run("a", "5"), run("b", "5"));
    assert_ne!(run("a", "5"), run("c", "6"));
}

#[test]
fn manifest_records_the_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"regime": "finite_l", "n0": 64, "p": 32, "nu": 4.0, "width": [32, 64], "depth": {"fixed": 2}}"#,
    );
    let out = dir.path().join("o");
    assert!(dln(&["posterior-variance", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "9"]).status.success());
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "posterior-variance");
    assert_eq!(m["seed"], 9);
    assert_eq!(m["csv"], "posterior-variance.csv");
    assert_eq!(m["rows"], 2);
    assert_eq!(m["config"]["regime"], "finite_l");
    assert!(m["version"].is_string());
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    assert_eq!(dln(&["evidence-sweep", "--out", out]).status.code(), Some(2));
    let unknown = write(dir.path(), "u.json", r#"{"n0": 4, "bogus": true}"#);
    assert_eq!(dln(&["evidence-sweep", "--config", &unknown, "--out", out]).status.code(), Some(2));
    let invalid = write(dir.path(), "i.json", r#"{"n0": 4, "p": 8, "widths": [], "nu": 1.0, "sigma2": [1.0]}"#);
    assert_eq!(dln(&["evidence-sweep", "--config", &invalid, "--out", out]).status.code(), Some(2));
    let cfg = write(dir.path(), "c.json", SWEEP);
    assert_eq!(dln(&["evidence-sweep", "--config", &cfg, "--out", out, "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn singular_grid_point_is_a_numeric_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"n0": 32, "sigma_eps2": 0.25, "alpha0": [0.5, 1.0], "trials": 8}"#);
    let out = dir.path().join("o");
    let o = dln(&["double-descent", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let csv = fs::read_to_string(out.join("double-descent.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows[0].ends_with(",ok"));
    assert!(rows[1].contains("error:"));
}

#[test]
fn validation_suite_passes_and_fails_on_demand() {
    let dir = TempDir::new().unwrap();
    let small = r#"{"oracle_samples": 20000, "ks_samples": 2000}"#;
    let cfg = write(dir.path(), "ok.json", small);
    let out = dir.path().join("o");
    let o = dln(&["validate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let strict = write(dir.path(), "strict.json", r#"{"oracle_samples": 20000, "ks_samples": 2000, "stationarity_tol": 1e-9}"#);
    let o = dln(&["validate", "--config", &strict, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let csv = fs::read_to_string(out.join("validate.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("evidence_stationarity") && l.ends_with(",fail")));
}
