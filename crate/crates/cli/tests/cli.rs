use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saddle-lab"))
        .args(args)
        .env("SADDLE_LAB_THREADS", "2")
        .current_dir(dir)
        .output()
        .expect("run saddle-lab")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn profile_only_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("lab.toml"), "stages = [\"profile\"]\nnonlinearity.kind = \"allen_cahn\"\n").unwrap();
    let out = lab(&["pipeline", "--config", "lab.toml", "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("run");
    let csv = std::fs::read_to_string(run.join("profile.csv")).unwrap();
    assert!(csv.starts_with("tau,u0,u0dot"));
    let report = json(&run.join("profile.json"));
    assert_eq!(report["schema"], 1);
    assert!(report["summary"]["max_hamiltonian_residual"].as_f64().unwrap() < 1e-10);
    let manifest = json(&run.join("manifest.json"));
    assert_eq!(manifest["exit_code"], 0);
    assert!(!run.join("field.csv").exists());
}

#[test]
fn bad_dimension_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["solve", "--m", "0", "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.m"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("lab.toml"), "grid.radius_typo = 3.0\n").unwrap();
    let out = lab(&["pipeline", "--config", "lab.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = lab(&["pipeline", "--set", "solver.nope=1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_writes_field_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        &["solve", "--m", "2", "--R", "8", "--h", "0.25", "--nl", "sine", "--bc", "profile", "--max-iter", "50", "--tol", "1e-9", "--out", "run"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("run");
    let solve = json(&run.join("solve.json"));
    assert_eq!(solve["kind"], "solve");
    let field = std::fs::read_to_string(run.join("field.csv")).unwrap();
    let mut lines = field.lines();
    assert_eq!(lines.next(), Some("i,j,s,t,class,u"));
    assert!(lines.count() > 100);
    let cfg = std::fs::read_to_string(run.join("config.toml")).unwrap();
    assert!(cfg.contains("R = 8.0") && cfg.contains("kind = \"sine\"") && cfg.contains("boundary = \"profile\""));
}

#[test]
fn stability_modes() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["stability", "--mode", "hardy", "--m", "2", "--out", "hardy"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&dir.path().join("hardy/stability.json"));
    assert!((rep["hardy"]["margin"].as_f64().unwrap() + 0.75).abs() < 1e-12);

    let out = lab(&["stability", "--mode", "sweep", "--m", "2", "--a-list", "5,10", "--out", "sweep"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("a,value,"));

    let out = lab(&["stability", "--mode", "sweep", "--alpha", "1.5", "--out", "bad"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_fans_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        &["sweep", "--set", "stages=[\"profile\"]", "--vary", "nonlinearity.kind=allen_cahn,sine", "--vary", "profile.tau_max=16,20", "--out", "sw"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("sw/sweep.json"));
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 4);
    for (i, r) in runs.iter().enumerate() {
        assert_eq!(r["index"], i);
        assert!(dir.path().join(format!("sw/run-{i:03}/profile.csv")).exists());
    }
}
