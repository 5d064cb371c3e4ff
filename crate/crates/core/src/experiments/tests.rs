use super::*;

fn cfg(name: &str) -> ExperimentConfig {
    ExperimentConfig::new(name)
}

fn without_time(r: &Report) -> String {
    let mut v = serde_json::to_value(r).unwrap();
    v.as_object_mut().unwrap().remove("wall_time");
    serde_json::to_string(&v).unwrap()
}

#[test]
fn validation_rejects_bad_configs() {
    assert!(cfg("hopf-periods").validate().is_ok());
    let bad = [
        ExperimentConfig { tol: Some(0.0), ..cfg("hopf-periods") },
        ExperimentConfig { tol: Some(-1e-8), ..cfg("hopf-periods") },
        ExperimentConfig { n: Some(0), ..cfg("linking") },
        ExperimentConfig { euler: Some(vec![1, 0]), ..cfg("linking") },
        ExperimentConfig { epsilon: Some(vec![0.5]), ..cfg("rigidity") },
        ExperimentConfig { lmin: Some(2.0), lmax: Some(1.0), ..cfg("thurston-sweep") },
        ExperimentConfig { n: Some(16), euler: Some(vec![3]), ..cfg("transition-degree") },
        cfg("no-such-experiment"),
    ];
    for c in bad {
        assert!(matches!(run(&c), Err(Error::Config(_))), "{c:?}");
    }
}

#[test]
fn later_fields_override() {
    let file = ExperimentConfig { tol: Some(1e-9), n: Some(5), seed: 3, ..cfg("hopf-periods") };
    let flags = ExperimentConfig { n: Some(7), ..Default::default() };
    let merged = cfg("hopf-periods").overridden_by(&file).overridden_by(&flags);
    assert_eq!(merged.tol, Some(1e-9));
    assert_eq!(merged.n, Some(7));
    assert_eq!(merged.seed, 3);
    assert_eq!(merged.experiment, "hopf-periods");
}

#[test]
fn config_round_trips_through_json() {
    let c = ExperimentConfig { euler: Some(vec![1, 2]), lambda: Some(0.5), seed: 9, ..cfg("linking") };
    let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(back, c);
    assert!(serde_json::from_str::<ExperimentConfig>(r#"{"experiment": "linking", "bogus": 1}"#).is_err());
}

#[test]
fn reports_are_deterministic() {
    let c = ExperimentConfig { n: Some(5), seed: 42, ..cfg("hopf-periods") };
    let (a, b) = (run(&c).unwrap(), run(&c).unwrap());
    assert_eq!(without_time(&a), without_time(&b));
    assert_eq!(a.seed, 42);
    let other = run(&ExperimentConfig { seed: 43, ..c }).unwrap();
    assert_ne!(a.metrics, other.metrics);
}

#[test]
fn quick_experiments_pass() {
    for c in [
        cfg("transition-degree"),
        ExperimentConfig { n: Some(8), ..cfg("straighten") },
        ExperimentConfig { n: Some(10), ..cfg("hopf-periods") },
        ExperimentConfig { lambda: Some(1.0), ..cfg("thurston-closure") },
        ExperimentConfig { lambda: Some(2.0), ratio: Some(0.7), ..cfg("thurston-closure") },
    ] {
        let r = run(&c).unwrap();
        assert!(r.pass, "{}: {:?}", c.experiment, r.failures());
        assert!(!r.checks.is_empty());
    }
}

#[test]
fn failing_check_marks_the_report() {
    let c = ExperimentConfig { lmin: Some(0.5), lmax: Some(0.6), step: Some(0.05), ..cfg("thurston-closure") };
    let r = run(&c).unwrap();
    assert!(!r.pass);
    assert_eq!(r.failures().len(), 1);
    assert!((r.metrics["min_closure_defect"] - 0.05 * std::f64::consts::PI * 0.25).abs() < 1e-8);
}

#[test]
fn sweep_writes_csv() {
    let path = std::env::temp_dir().join(format!("bundlelab-sweep-{}.csv", std::process::id()));
    let c = ExperimentConfig {
        lmin: Some(0.5),
        lmax: Some(1.0),
        step: Some(0.25),
        csv: Some(path.to_string_lossy().into_owned()),
        ..cfg("thurston-sweep")
    };
    assert!(run(&c).unwrap().pass);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn listing_is_complete_and_stable() {
    let a = list_experiments();
    assert_eq!(a, list_experiments());
    for name in [
        "hopf-periods", "blowup-divisor", "linking", "transition-degree", "montgomery", "rigidity", "bochner",
        "straighten", "thurston-sweep", "thurston-closure",
    ] {
        assert!(a.lines().any(|l| l.starts_with(name)), "{name}");
    }
    assert_eq!(a.lines().count(), EXPERIMENTS.len());
}
