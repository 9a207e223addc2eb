use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bsee(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsee")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn optimize_prints_json() {
    let o = bsee(&["optimize"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["mu_star"], 1.0);
    assert!(v["ee_max"].as_f64().unwrap() > 0.0);
    assert!(v["tau_star"].as_f64().unwrap() < 1.0);
}

#[test]
fn preset_to_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = bsee(&["run", "--preset", "fig8", "--seed", "5", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.contains("# seed: 5\n"));
    assert!(text.lines().any(|l| l == "b_b,abc_only,htt_only,hybrid"));
}

#[test]
fn simulate_json_and_csv() {
    let o = bsee(&["simulate", "--frames", "20000", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["num_frames"], 20000);

    let o = bsee(&["simulate", "--frames", "20000", "--seed", "3", "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn simulate_at_configured_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"tau": 0.4, "alpha": 0.5, "mu": 1.0}"#);
    let o = bsee(&["simulate", "--config", &cfg, "--frames", "10000", "--detector", "exact_chi_square"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"bandwidth": -1}"#);
    let o = bsee(&["optimize", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bandwidth"));

    let cfg = write_config(dir.path(), r#"{"sweep": {"axis": "power", "values": [1]}}"#);
    assert_eq!(bsee(&["run", "--config", &cfg]).status.code(), Some(2));

    assert_eq!(bsee(&["run", "--preset", "fig42"]).status.code(), Some(2));
    assert_eq!(bsee(&["optimize", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(bsee(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn infeasible_constraints_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"target_pf": 1e-12, "num_samples": 100}"#);
    let o = bsee(&["optimize", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn custom_sweep_writes_to_config_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{"sweep": {{"axis": "num_samples", "values": [500, 1000, 2000]}}, "modes": ["hybrid", "no_sensing_errors"], "output_path": {:?}}}"#,
            out.to_str().unwrap()
        ),
    );
    let o = bsee(&["run", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.lines().any(|l| l == "num_samples,hybrid,no_sensing_errors"));
}
