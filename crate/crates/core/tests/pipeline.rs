use std::fs;
use std::path::Path;
use std::process::Command;

use lte_hetnet::config::{load_config, parse_config};
use lte_hetnet::output::SUMMARY_COLUMNS;
use lte_hetnet::sweep::run_sweep;
use lte_hetnet::{Algorithm, ScenarioKind};

const BIN: &str = env!("CARGO_BIN_EXE_lte-hetnet");

const SMALL_SWEEP: &str = r#"{
    "simulation": { "duration_s": 0.4, "flow_duration_s": 0.3 },
    "sweep": {
        "user_counts": [3, 6],
        "algorithms": ["pf", "mlwdf", "exppf"],
        "scenarios": ["macro", "hetnet"],
        "runs_per_point": 2,
        "record_wall_time": false
    }
}"#;

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn sweep_output_is_reproducible_and_ordered() {
    let spec = parse_config(SMALL_SWEEP, Path::new("inline")).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out_a = run_sweep(&spec, a.path()).unwrap();
    run_sweep(&spec, b.path()).unwrap();

    assert!(out_a.failures.is_empty());
    assert_eq!(out_a.rows.len(), 2 * 3 * 2 * 2);
    let csv_a = read(&a.path().join("summary.csv"));
    assert_eq!(csv_a, read(&b.path().join("summary.csv")));
    assert_eq!(csv_a.lines().next().unwrap(), SUMMARY_COLUMNS.join(","));
    assert_eq!(csv_a.lines().count(), 1 + 24);
    assert!(!a.path().join("failures.csv").exists());

    let manifest: serde_json::Value = serde_json::from_str(&read(&a.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["runs"], 24);
    assert_eq!(manifest["failures"], 0);
}

#[test]
fn parallel_sweep_matches_serial() {
    let serial = parse_config(SMALL_SWEEP, Path::new("inline")).unwrap();
    let mut parallel = serial.clone();
    parallel.sweep.workers = 3;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_sweep(&serial, a.path()).unwrap();
    run_sweep(&parallel, b.path()).unwrap();
    assert_eq!(read(&a.path().join("summary.csv")), read(&b.path().join("summary.csv")));
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    fs::write(&path, SMALL_SWEEP).unwrap();
    let spec = load_config(&path).unwrap();
    assert_eq!(spec.sweep.user_counts, vec![3, 6]);
    assert_eq!(spec.sweep.scenarios, ScenarioKind::ALL.to_vec());
    assert_eq!(spec.sweep.algorithms, Algorithm::ALL.to_vec());
    assert_eq!(spec.base.simulation.flow_duration_s, 0.3);

    fs::write(&path, r#"{ "radio": { "bandwith_mhz": 10 } }"#).unwrap();
    assert!(load_config(&path).is_err(), "misspelt keys must be rejected");
    assert!(load_config(&dir.path().join("missing.json")).is_err());
}

#[test]
fn cli_simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = Command::new(BIN)
        .args(["simulate", "--scenario", "hetnet", "--scheduler", "exppf", "--users", "6"])
        .args(["--seed", "4", "--duration", "0.3", "--trace", "--no-wall-time", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    for f in ["summary.csv", "flows.csv", "geometry.csv", "trace.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let summary = read(&out.join("summary.csv"));
    let row = summary.lines().nth(1).unwrap();
    assert!(row.starts_with("hetnet,exppf,6,4,"), "{row}");
    // geometry: header + macro + two picos
    assert_eq!(read(&out.join("geometry.csv")).lines().count(), 4);
}

#[test]
fn cli_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{ "radio": { "bandwidth_mhz": 7 } }"#).unwrap();

    let cases: Vec<Vec<String>> = vec![
        vec!["simulate".into(), "--config".into(), bad.display().to_string()],
        vec!["simulate".into(), "--scheduler".into(), "round-robin".into()],
        vec!["simulate".into(), "--duration".into(), "-1".into()],
        vec!["sweep".into(), "--config".into(), dir.path().join("nope.json").display().to_string()],
    ];
    for args in cases {
        let o = Command::new(BIN).args(&args).arg("--out").arg(dir.path().join("o")).output().unwrap();
        assert!(!o.status.success(), "{args:?} should fail");
    }
}

#[test]
fn cli_sweep_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    fs::write(&cfg, SMALL_SWEEP.replace("\"runs_per_point\": 2", "\"runs_per_point\": 1")).unwrap();
    let out = dir.path().join("sweep");
    let o = Command::new(BIN).arg("sweep").arg("--config").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&out.join("summary.csv")).lines().count(), 1 + 12);
}
