//! End-to-end checks of the `qps` binary: subcommand surfaces, file outputs,
//! exit codes, and thread-count determinism through the CLI path.

use std::path::Path;
use std::process::{Command, Output};

fn qps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qps"))
        .args(args)
        .output()
        .expect("spawn qps")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn le_reports_formula_and_numeric() {
    let out = qps(&[
        "le", "--model", "amo", "--lambda", "2", "--energy", "0", "--steps", "2000",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("le_formula"));
    assert!(text.contains("0.6931"), "expected log 2 in output:\n{text}");
    assert!(text.contains("PositiveLE"));
}

#[test]
fn le_json_mode() {
    let out = qps(&[
        "le", "--model", "gps", "--alpha", "0.5", "--lambda", "1", "--energy", "3", "--steps",
        "2000", "--json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["le_formula"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["regime"], "PositiveLE");
}

#[test]
fn bad_flags_exit_config_error() {
    assert_eq!(qps(&["le", "--model", "bogus", "--energy", "0"]).status.code(), Some(1));
    assert_eq!(
        qps(&["le", "--model", "gps", "--alpha", "1.5", "--energy", "0"]).status.code(),
        Some(1),
        "|alpha| >= 1 is a config error"
    );
    assert_eq!(
        qps(&["phase-diagram", "--grid", "nonsense", "--out", "/tmp/x.csv"]).status.code(),
        Some(1)
    );
    // steps below the estimator precondition
    assert_eq!(
        qps(&["le", "--model", "amo", "--energy", "0", "--steps", "10"]).status.code(),
        Some(1)
    );
}

#[test]
fn io_failure_exits_3() {
    let out = qps(&[
        "spectrum", "--model", "amo", "--lambda", "2", "--N", "10", "--out",
        "/nonexistent-dir/spectrum.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn spectrum_csv_and_vectors_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.csv");
    let out = qps(&[
        "spectrum", "--model", "amo", "--lambda", "2", "--N", "50", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("index,E\n"));
    assert_eq!(text.lines().count(), 51);

    // vectors require JSON
    let out = qps(&["spectrum", "--model", "amo", "--N", "50", "--vectors"]);
    assert_eq!(out.status.code(), Some(1));
    let out = qps(&[
        "spectrum", "--model", "amo", "--N", "50", "--vectors", "--format", "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["eigenvectors"].as_array().unwrap().len(), 50);
}

fn run_grid(dir: &Path, name: &str, threads: &str) -> Vec<u8> {
    let path = dir.join(name);
    let out = qps(&[
        "phase-diagram",
        "--model", "gps",
        "--lambda", "-0.9",
        "--grid", "alpha:-0.8:0.8:5",
        "--grid", "E:-4:2:6",
        "--N", "80",
        "--threads", threads,
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    std::fs::read(&path).unwrap()
}

#[test]
fn phase_diagram_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_grid(dir.path(), "a.csv", "1");
    let b = run_grid(dir.path(), "b.csv", "8");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("alpha,lambda,E,le_formula,le_numeric,regime,ipr,edge_distance,status\n"));
    assert_eq!(text.lines().count(), 1 + 5 * 6);
    // companion plot script written next to the data file
    assert!(dir.path().join("a_plot.py").exists());
}

#[test]
fn le_scan_and_acceleration_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let scan = dir.path().join("scan.csv");
    let out = qps(&[
        "le-scan",
        "--model", "amo",
        "--lambda", "2",
        "--grid", "E:-1:1:5",
        "--N", "200",
        "--steps", "2000",
        "--phases", "2",
        "--out", scan.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&scan).unwrap();
    assert!(text.starts_with("alpha,lambda,E,le_formula,le_numeric,gap,in_spectrum,status\n"));
    assert_eq!(text.lines().count(), 6);

    let acc = dir.path().join("acc.json");
    let out = qps(&[
        "acceleration",
        "--model", "amo",
        "--lambda", "2",
        "--energy", "0",
        "--eps", "0", "--eps", "0.02",
        "--steps", "5000",
        "--phases", "2",
        "--format", "json",
        "--out", acc.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&acc).unwrap()).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row["status"], "ok");
        let omega = row["omega"].as_f64().unwrap();
        assert!((omega - 1.0).abs() < 0.2, "omega {omega}");
    }
}

#[test]
fn localization_smoke() {
    let out = qps(&[
        "localization", "--model", "amo", "--lambda", "4", "--theta", "0.2", "--N", "120",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.starts_with("index,E,ipr,decay_rate,fit_r2,classification,regime,edge_distance\n"));
    assert!(text.contains("Localized"));
    let summary = String::from_utf8_lossy(&out.stderr);
    assert!(summary.contains("edge agreement"), "{summary}");
}
