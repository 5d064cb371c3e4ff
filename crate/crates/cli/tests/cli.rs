use std::process::{Command, Output};

use serde_json::Value;

fn bundlelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bundlelab")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn list_names_every_experiment() {
    let out = bundlelab(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["hopf-periods", "blowup-divisor", "linking", "montgomery", "rigidity", "bochner", "thurston-sweep", "straighten"] {
        assert!(text.contains(name), "{name}");
    }
    assert_eq!(text, String::from_utf8(bundlelab(&["list"]).stdout).unwrap());
}

#[test]
fn hopf_periods_passes() {
    let out = bundlelab(&["hopf-periods", "--tol", "1e-10", "--n", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["experiment"], "hopf-periods");
    assert_eq!(r["pass"], true);
    assert!(r["metrics"]["max_period_error"].as_f64().unwrap() < 1e-8);
    for key in ["params", "seed", "wall_time"] {
        assert!(r.get(key).is_some(), "{key}");
    }
}

#[test]
fn rigidity_example_passes() {
    let out = bundlelab(&["rigidity", "--epsilon", "0.05", "--E", "1", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(report(&out)["metrics"]["conjugacy_residual"].as_f64().unwrap() < 1e-5);
}

#[test]
fn failing_check_exits_one() {
    let out = bundlelab(&["thurston-closure", "--lmin", "0.5", "--lmax", "0.6"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["pass"], false);
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(bundlelab(&["hopf-periods", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(bundlelab(&["transition-degree", "--E", "3", "--n", "4"]).status.code(), Some(2));
    assert_eq!(bundlelab(&["hopf-periods", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    assert_eq!(bundlelab(&["hopf-periods", "--bogus"]).status.code(), Some(2));
}

#[test]
fn flags_override_config_file_and_reports_go_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment": "hopf-periods", "n": 50, "tol": 1e-9, "seed": 7}"#).unwrap();
    let rep = dir.path().join("out.json");
    let csv = dir.path().join("orbit.csv");
    let out = bundlelab(&[
        "hopf-periods",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "4",
        "--report",
        rep.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(r["params"]["n"], 4);
    assert_eq!(r["params"]["tol"], 1e-9);
    assert_eq!(r["seed"], 7);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().count() > 10);

    std::fs::write(&cfg, r#"{"experiment": "linking"}"#).unwrap();
    assert_eq!(bundlelab(&["hopf-periods", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn same_seed_same_report() {
    let strip = |o: &Output| {
        let mut v = report(o);
        v.as_object_mut().unwrap().remove("wall_time");
        v
    };
    let args = ["transversality", "--n", "50", "--seed", "11"];
    assert_eq!(strip(&bundlelab(&args)), strip(&bundlelab(&args)));
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = bundlelab(&["thurston-sweep", "--lmin", "0.05", "--lmax", "1", "--step", "0.05", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("lambda,alpha1,alpha2,geometric_phase,dynamical_phase,closure_defect,k_detected"));
    assert_eq!(text.lines().count(), 21);
}
