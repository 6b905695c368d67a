use std::f64::consts::PI;
use std::fs;

use lagflow::session::{
    cmd_simulate, cmd_verify, load_snapshot, parse_config, RunConfig, Suite, SERIES_HEADER,
};

fn config(text: &str) -> RunConfig {
    parse_config(text).unwrap()
}

fn series_rows(dir: &std::path::Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(dir.join("series.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(SERIES_HEADER));
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn zero_hamiltonian_converges_at_once() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_simulate(&config("n = 16\nhamiltonian = \"0\"\n"), dir.path()).unwrap();
    assert_eq!(report.termination, "converged");
    assert_eq!(series_rows(dir.path()).len(), 1);
    for f in &report.files {
        assert!(f.exists(), "{}", f.display());
    }
}

#[test]
fn translation_only_reports_constant_flux() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("n = 16\nhamiltonian = \"0\"\ntranslation = [0.5, 0.25]\n");
    let report = cmd_simulate(&cfg, dir.path()).unwrap();
    assert_eq!(report.termination, "converged");
    assert!((report.total_flux.0 + 2.0 * PI * 0.25).abs() < 1e-10);
    assert!((report.total_flux.1 - 2.0 * PI * 0.5).abs() < 1e-10);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["termination"], "converged");
}

#[test]
fn short_run_outputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("n = 16\nhamiltonian = \"0.1*cos(x)*cos(y)\"\nt_max = 0.2\nsnapshot_every = 10\n");
    let report = cmd_simulate(&cfg, dir.path()).unwrap();
    assert_eq!(report.termination, "horizon");
    let rows = series_rows(dir.path());
    assert_eq!(rows.len(), report.steps + 1);
    let area: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(area.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    let snap = load_snapshot(dir.path().join("final.lmcf")).unwrap();
    assert_eq!(snap.t, report.final_time);
    let theta = snap.theta.unwrap();
    let spread: f64 = rows.last().unwrap()[6].parse().unwrap();
    assert!((theta.spread() - spread).abs() < 1e-12);
    assert!(dir.path().join("snap_0000010.lmcf").exists());
    let svg = fs::read_to_string(dir.path().join("theta.svg")).unwrap();
    assert!(svg.contains(&format!("min {:.6e}", theta.min())));
}

#[test]
fn failures_are_reported_with_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("n = 16\nhamiltonian = \"0.3*cos(x)*cos(y)\"\nt_max = 1\ndefect_tolerance = 1e-12\n");
    let report = cmd_simulate(&cfg, dir.path()).unwrap();
    assert!(!report.succeeded());
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn stationary_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = cmd_verify(&config("n = 32\n"), Suite::Stationary, dir.path()).unwrap();
    assert!(report.passed(), "{:?}", report.rows);
    let table = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert_eq!(table.lines().count(), report.rows.len() + 1);
}

#[test]
fn flux_suite_with_translation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("n = 16\nm = 32\nhamiltonian = \"0.1*cos(x)*cos(y)\"\ntranslation = [1.0, 0.0]\n");
    let report = cmd_verify(&cfg, Suite::Flux, dir.path()).unwrap();
    assert!(report.passed(), "{:?}", report.rows);
}

#[test]
fn failing_suite_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    // the flow cannot converge before t_max here
    let cfg = config("n = 16\nhamiltonian = \"0.1*cos(x)*cos(y)\"\nt_max = 0.1\n");
    let report = cmd_verify(&cfg, Suite::Flux, dir.path()).unwrap();
    assert!(!report.passed());
    assert!(fs::read_to_string(dir.path().join("verify.csv")).unwrap().contains("false"));
}
