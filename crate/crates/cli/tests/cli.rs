use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn gradtrack(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradtrack"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn gradtrack")
}

fn with_config(json: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c.json"), json).unwrap();
    dir
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

#[test]
fn single_round_has_header_and_one_row() {
    let dir = with_config(r#"{"n": 20, "iterations": 1, "algorithms": ["gt", "dgd_fixed", "dgd_vanishing", "cgd"]}"#);
    let out = gradtrack(&["run", "--config", "c.json", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for alg in ["gt", "dgd_fixed", "dgd_vanishing", "cgd"] {
        let csv = fs::read_to_string(dir.path().join(format!("o/run_{alg}.csv"))).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 2, "{alg}");
        assert!(lines[1].starts_with("1,"));
    }
    let gt = fs::read_to_string(dir.path().join("o/run_gt.csv")).unwrap();
    assert!(gt.lines().next().unwrap().contains("tracking_err"));
    let dgd = fs::read_to_string(dir.path().join("o/run_dgd_fixed.csv")).unwrap();
    assert!(!dgd.lines().next().unwrap().contains("tracking_err"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/summary.json")).unwrap()).unwrap();
    assert!(summary["sigma"].as_f64().unwrap() < 1.0);
    // Temp files never survive a successful write.
    for entry in fs::read_dir(dir.path().join("o")).unwrap() {
        assert!(!entry.unwrap().file_name().to_string_lossy().starts_with('.'));
    }
}

#[test]
fn replay_from_written_graph_and_suite_is_byte_identical() {
    let dir = with_config(r#"{"n": 15, "case": 2, "iterations": 50}"#);
    assert_eq!(code(&gradtrack(&["run", "--config", "c.json", "--out", "o"], dir.path())), 0);
    let out = gradtrack(&["run", "--config", "o/replay.json", "--out", "r"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let a = fs::read(dir.path().join("o/run_gt.csv")).unwrap();
    let b = fs::read(dir.path().join("r/run_gt.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn seed_override_changes_output() {
    let dir = with_config(r#"{"n": 15, "iterations": 5}"#);
    assert_eq!(code(&gradtrack(&["run", "--config", "c.json", "--out", "a"], dir.path())), 0);
    let args = ["run", "--config", "c.json", "--out", "b", "--seed-override", "data_seed=99"];
    assert_eq!(code(&gradtrack(&args, dir.path())), 0);
    let a = fs::read(dir.path().join("a/run_gt.csv")).unwrap();
    let b = fs::read(dir.path().join("b/run_gt.csv")).unwrap();
    assert_ne!(a, b);
    let bad = ["run", "--config", "c.json", "--out", "b", "--seed-override", "n=3"];
    assert_eq!(code(&gradtrack(&bad, dir.path())), 2);
}

#[test]
fn bounds_are_deterministic() {
    let dir = with_config(r#"{"n": 30}"#);
    assert_eq!(code(&gradtrack(&["bounds", "--config", "c.json", "--out", "a"], dir.path())), 0);
    assert_eq!(code(&gradtrack(&["bounds", "--config", "c.json", "--out", "b"], dir.path())), 0);
    let a = fs::read(dir.path().join("a/bounds.json")).unwrap();
    let b = fs::read(dir.path().join("b/bounds.json")).unwrap();
    assert_eq!(a, b);
    let report: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert!(report["rho"].as_f64().unwrap() < 1.0);
}

#[test]
fn bounds_from_explicit_constants() {
    let dir = with_config(r#"{"alpha": 1.0, "beta": 26.23, "sigma": 0.915, "n": 50}"#);
    let out = gradtrack(&["bounds", "--config", "c.json", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let partial = with_config(r#"{"alpha": 1.0, "beta": 26.23}"#);
    assert_eq!(code(&gradtrack(&["bounds", "--config", "c.json", "--out", "o"], partial.path())), 2);
}

#[test]
fn zero_step_is_out_of_range() {
    let dir = with_config(r#"{"n": 20, "eta": 0}"#);
    let out = gradtrack(&["bounds", "--config", "c.json", "--out", "o"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of range"));
    assert!(!dir.path().join("o/bounds.json").exists());
}

#[test]
fn config_errors_exit_two() {
    let dir = with_config(r#"{"n": 20, "no_such_field": 1}"#);
    assert_eq!(code(&gradtrack(&["run", "--config", "c.json", "--out", "o"], dir.path())), 2);
    assert_eq!(code(&gradtrack(&["run", "--config", "missing.json", "--out", "o"], dir.path())), 2);
    fs::write(dir.path().join("c.json"), r#"{"case": 2, "step_rule": "strongly_convex"}"#).unwrap();
    assert_eq!(code(&gradtrack(&["run", "--config", "c.json", "--out", "o"], dir.path())), 2);
    fs::write(dir.path().join("c.json"), r#"{"n": 20, "algorithms": ["gt"]}"#).unwrap();
    assert_eq!(code(&gradtrack(&["compare", "--config", "c.json", "--out", "o"], dir.path())), 2);
}

#[test]
fn divergence_exits_three() {
    let dir = with_config(r#"{"n": 20, "eta": 5, "iterations": 2000}"#);
    let out = gradtrack(&["run", "--config", "c.json", "--out", "o"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("iteration"));
}

#[test]
fn separable_logistic_data_exits_four() {
    let dir = with_config(r#"{"n": 2, "graph": "path", "case": 2, "samples": 1, "dim": 3}"#);
    assert_eq!(code(&gradtrack(&["run", "--config", "c.json", "--out", "o"], dir.path())), 4);
}

#[test]
fn compare_aligns_four_columns() {
    let dir = with_config(
        r#"{"n": 20, "iterations": 300, "step_rule": "rate_optimal",
            "algorithms": ["gt", "dgd_fixed", "dgd_vanishing", "cgd"]}"#,
    );
    let out = gradtrack(&["compare", "--config", "c.json", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("o/compare.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    assert_eq!(
        header,
        ["t", "gt_avg_obj_err", "dgd_fixed_avg_obj_err", "dgd_vanishing_avg_obj_err", "cgd_avg_obj_err"]
    );
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 300);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r[0], (k + 1) as f64);
    }
    let last = rows.last().unwrap();
    assert!(last[1] < last[2], "gt {} vs dgd_fixed {}", last[1], last[2]);
}

#[test]
fn scaling_writes_one_row_per_size() {
    let dir = with_config(r#"{"sizes": [10, 12], "degree": 3, "graph": "random_regular", "max_iterations": 200000, "target_error": 1e-6}"#);
    let out = gradtrack(&["scaling", "--config", "c.json", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("o/scaling.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("10,"));
    assert!(lines[2].starts_with("12,"));
}
