use std::fs;
use std::process::Command;

fn lagflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lagflow"))
}

#[test]
fn info_prints_conventions() {
    let out = lagflow().arg("info").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("X_G = (dG/dy, -dG/dx)"));
    assert!(text.contains("w2 = x2 - i y2"));
}

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "n = 16\nhamiltonian = \"0.1*cos(x)*cos(y)\"\nt_max = 0.05\n").unwrap();
    let out = dir.path().join("out");
    let status = lagflow()
        .env("LAGFLOW_THREADS", "2")
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for f in ["series.csv", "report.json", "initial.lmcf", "final.lmcf", "theta.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn verify_exit_status_follows_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "n = 16\noutput = \"unused\"\n").unwrap();
    let pass = lagflow()
        .args(["verify", "--suite", "stationary", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("a"))
        .output()
        .unwrap();
    assert!(pass.status.success());
    assert!(String::from_utf8(pass.stdout).unwrap().starts_with("PASS"));

    fs::write(&cfg, "n = 16\nhamiltonian = \"0.1*cos(x)*cos(y)\"\nt_max = 0.1\n").unwrap();
    let fail = lagflow()
        .args(["verify", "--suite", "flux", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("b"))
        .status()
        .unwrap();
    assert_eq!(fail.code(), Some(1));
}

#[test]
fn bad_inputs_exit_with_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "n = 7\n").unwrap();
    let out = lagflow().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("`n`"));

    let out = lagflow().args(["verify", "--suite", "nope", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = lagflow().env("LAGFLOW_THREADS", "zero").arg("info").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
