use std::fs;
use std::process::Command;

fn qdyn() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qdyn"));
    c.env_remove("QDYN_JOBS");
    c
}

#[test]
fn simulate_with_overrides_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdyn()
        .args(["simulate", "--model", "ohmic", "--param", "omega_c=1", "--param", "s=3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("trajectory.csv").exists());
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn sweep_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"model":"ohmic","omega_c":1,"s":3,"time":{"points":20}}"#).unwrap();
    let out = qdyn()
        .args(["sweep", "--range", "2.1:5:8", "--jobs", "2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sweep = fs::read_to_string(dir.path().join("o/sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 9);
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"model":"ohmic","omega_c":1,"s":3,"tolerances":{"h":0}}"#).unwrap();
    let out = qdyn().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerances.h"));

    // sweep without a range
    let out = qdyn().args(["sweep", "--model", "ohmic", "--param", "omega_c=1", "--param", "s=3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(qdyn().args(["simulate", "--range", "1:2"]).output().unwrap().status.code(), Some(2));
    assert_eq!(qdyn().arg("frobnicate").output().unwrap().status.code(), Some(2));
    let missing = qdyn().args(["simulate", "--config", "/nonexistent/run.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn computation_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tan.json");
    fs::write(&cfg, r#"{"model":"pauli_tan","lambda":1,"omega":1,"time":{"points":10},"analysis":{"oracle":true}}"#)
        .unwrap();
    let out = qdyn().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn table1_reports_and_exits_by_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdyn().args(["table1", "--out"]).arg(dir.path()).output().unwrap();
    // the resonant JC row fails at gamma_m = lambda
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("row 1: ohmic (s) PASS"));
    assert!(dir.path().join("table1.json").exists());
    assert_eq!(fs::read_to_string(dir.path().join("table1.txt")).unwrap(), text);

    let out = qdyn().args(["table1", "--json", "--ohmic-gamma-scale", "1.01"]).output().unwrap();
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["rows"][0]["passed"], false);
    assert_eq!(report["rows"][1]["passed"], true);

    assert_eq!(qdyn().args(["table1", "--fd-tol", "0"]).output().unwrap().status.code(), Some(2));
}
