use std::fs;
use std::path::Path;

use qdyn_cli::{parse_config, run, thread_pool, RunConfig};

fn config(doc: &str, dir: &Path) -> RunConfig {
    let mut c = parse_config(doc).unwrap();
    c.output_dir = dir.to_path_buf();
    c
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    names
}

fn column(path: &Path, k: usize) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn empty_toggles_write_only_the_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(r#"{"model":"ohmic","omega_c":1,"s":3,"time":{"points":50}}"#, dir.path());
    let out = run(&c, &thread_pool(Some(1)).unwrap()).unwrap();
    assert!(out.report.is_none());
    assert_eq!(listing(dir.path()), vec!["trajectory.csv"]);

    let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,y,z,fidelity"));
    // 17 significant digits
    assert_eq!(lines.next(), Some("0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,6.1232339957367660e-17,1.0000000000000000e0"));
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn ohmic_sweep_has_increasing_initial_speed() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        r#"{"model":"ohmic","omega_c":1,"s":3,"time":{"points":20},"sweep":{"start":2.1,"end":5,"points":16}}"#,
        dir.path(),
    );
    let out = run(&c, &thread_pool(Some(2)).unwrap()).unwrap();
    assert_eq!(listing(dir.path()), vec!["report.json", "sweep.csv", "trajectory.csv"]);
    let header = fs::read_to_string(dir.path().join("sweep.csv")).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "s,v0_squared,blp,indivisible");
    let v: Vec<f64> = column(&dir.path().join("sweep.csv"), 1).iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(v.len(), 16);
    assert!(v.windows(2).all(|w| w[1] > w[0]));
    assert!(column(&dir.path().join("sweep.csv"), 2).iter().all(String::is_empty));
    let mono = out.report.unwrap().monotonicity.unwrap();
    assert_eq!(mono.verdict, qdyn_core::Monotonicity::StrictlyIncreasing);
}

#[test]
fn pauli_tanh_sweep_is_indivisible_without_backflow() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        r#"{"model":"pauli_tanh","lambda":1,"omega":0.5,"time":{"points":20},
            "sweep":{"start":0,"end":1,"points":8,"open_start":true},
            "analysis":{"blp":true,"divisibility":true},
            "diagnostics":{"pair_search":{"time_points":500},"st_points":20}}"#,
        dir.path(),
    );
    let out = run(&c, &thread_pool(None).unwrap()).unwrap();
    assert_eq!(out.sweep.len(), 8);
    for row in &out.sweep {
        assert!(row.value > 0.0);
        assert!(row.blp.unwrap() <= 1e-8, "{row:?}");
        assert_eq!(row.indivisible, Some(true));
    }
    assert!(column(&dir.path().join("sweep.csv"), 3).iter().all(|s| s == "true"));
    let report = out.report.unwrap();
    let nm = report.nonmarkov.unwrap();
    assert!(!nm.has_backflow());
    assert!(nm.cp_divisibility.divisibility.is_indivisible());
}

#[test]
fn outputs_are_deterministic() {
    let doc = r#"{"model":"jaynes_cummings","lambda":1,"gamma_m":3,"delta":0.2,
        "time":{"points":200},"pairs":[[0,0,3.141592653589793,0],[1,2,2,1]],
        "sweep":{"start":0.6,"end":3,"points":5},
        "analysis":{"speed":true,"blp":true,"divisibility":true,"oracle":true},
        "diagnostics":{"pair_search":{"time_points":400},"st_points":12},"seed":11}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&config(doc, a.path()), &thread_pool(Some(1)).unwrap()).unwrap();
    run(&config(doc, b.path()), &thread_pool(Some(4)).unwrap()).unwrap();
    let names = listing(a.path());
    assert_eq!(names, vec!["report.json", "speed.csv", "sweep.csv", "trajectory.csv"]);
    for name in &names {
        let (x, y) = (fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
        if name == "report.json" {
            // the output directory is echoed in the config
            let strip = |v: Vec<u8>| {
                let mut j: serde_json::Value = serde_json::from_slice(&v).unwrap();
                j["config"]["output_dir"] = serde_json::Value::Null;
                j
            };
            assert_eq!(strip(x), strip(y));
        } else {
            assert_eq!(x, y, "{name}");
        }
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("report.json")).unwrap()).unwrap();
    assert!(report["convention"].as_str().unwrap().starts_with("dimensionless units"));
    assert_eq!(report["ball_check"]["seed"], 11);
    assert_eq!(report["ball_check"]["passed"], true);
    assert!(report["oracle"]["max_error"].as_f64().unwrap() < 1e-7);
    let header = fs::read_to_string(a.path().join("trajectory.csv")).unwrap();
    assert!(header.starts_with("t,x,y,z,fidelity,d_1,d_2\n"));
}

#[test]
fn ball_check_uses_the_seed() {
    let maps = qdyn_core::dynamics::bloch_maps(
        &qdyn_core::ModelSpec::JaynesCummings { lambda: 1.0, gamma_m: 2.0, delta: 0.0 },
        &[0.0, 0.5, 1.0],
    )
    .unwrap();
    let a = qdyn_cli::run::ball_check(&maps, 1, 100, 1e-9);
    let b = qdyn_cli::run::ball_check(&maps, 1, 100, 1e-9);
    let c = qdyn_cli::run::ball_check(&maps, 2, 100, 1e-9);
    assert_eq!(a, b);
    assert_ne!(a.worst_excess, c.worst_excess);
    assert!(a.passed && a.worst_excess <= 0.0);
}

#[test]
fn computation_errors_name_their_module() {
    let dir = tempfile::tempdir().unwrap();
    // the integrator refuses the kink of the tan channel
    let c = config(
        r#"{"model":"pauli_tan","lambda":1,"omega":1,"time":{"points":10},"analysis":{"oracle":true}}"#,
        dir.path(),
    );
    let e = run(&c, &thread_pool(Some(1)).unwrap()).unwrap_err();
    assert!(e.to_string().starts_with("dynamics:"), "{e}");
}
