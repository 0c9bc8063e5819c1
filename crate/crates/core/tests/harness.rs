use std::fs;

use mmrisk::harness::{
    fit_rate_csv, run_scenario, run_scenario_with_threads, sandwich_sl_config, verify_suite,
    write_outputs, ExperimentConfig, RESULTS_CSV,
};
use mmrisk::Error;

const FD_FULL: &str = r#"{
    "schema": 1,
    "scenario": "FD",
    "class": {"kind": "Bnd", "bound": 1.0},
    "instance": {"mu": 1.0, "L": 4.0},
    "target": {"atoms": [[0.0], [1.0], [2.0]], "weights": [0.2, 0.3, 0.5]},
    "design": {"points": [[0.0], [1.0], [2.0]]},
    "replications": 1,
    "estimator": {"kind": "FDBnd"},
    "optimizer": {"schedule": {"kind": "SingleOracle", "steps": 200}}
}"#;

#[test]
fn noiseless_full_support_oracle_reaches_the_floor() {
    let cfg = ExperimentConfig::from_json(FD_FULL).unwrap();
    let res = run_scenario(&cfg).unwrap();
    assert_eq!(res.records.len(), 1);
    assert!(res.records[0].excess_risk <= 1e-10, "{:?}", res.records[0]);
    assert!(res.passed);
}

#[test]
fn same_seed_gives_identical_bytes_for_any_thread_count() {
    let cfg = sandwich_sl_config(42, 20);
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (dir, threads) in dirs.iter().zip([Some(1), Some(3), None]) {
        let res = run_scenario_with_threads(&cfg, threads).unwrap();
        write_outputs(&res, dir.path()).unwrap();
    }
    let bytes: Vec<Vec<u8>> = dirs
        .iter()
        .map(|d| fs::read(d.path().join(RESULTS_CSV)).unwrap())
        .collect();
    assert_eq!(bytes[0], bytes[1]);
    assert_eq!(bytes[0], bytes[2]);
    let other = run_scenario(&sandwich_sl_config(43, 20)).unwrap();
    let first = run_scenario(&cfg).unwrap();
    assert_ne!(first.records, other.records);
}

#[test]
fn csv_has_the_documented_columns_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let res = run_scenario(&sandwich_sl_config(1, 50)).unwrap();
    let (csv, json) = write_outputs(&res, dir.path()).unwrap();
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "scenario,n,rep,excess_risk,samples_used,warmup_steps"
    );
    assert_eq!(text.lines().count(), 1 + 7 * 50);
    let fit = fit_rate_csv(&csv).unwrap();
    assert!(fit.slope < -0.5, "{fit:?}");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(summary["points"].as_array().unwrap().len(), 7);
    for p in &res.points {
        assert!(p.mean >= -1e-12);
        assert!(p.std_err >= 0.0);
        assert!(p.bounds.is_some());
    }
}

#[test]
fn config_errors_name_the_field() {
    let bad = FD_FULL.replace("\"replications\": 1", "\"replications\": 0");
    match ExperimentConfig::from_json(&bad) {
        Err(Error::Config { field, .. }) => assert_eq!(field, "replications"),
        other => panic!("{other:?}"),
    }
    let bad = FD_FULL.replace("\"kind\": \"FDBnd\"", "\"kind\": \"TLMean\"");
    assert!(matches!(
        ExperimentConfig::from_json(&bad),
        Err(Error::Config { .. })
    ));
    let bad = FD_FULL.replace("\"schema\": 1,", "\"schema\": 1, \"colour\": 3,");
    assert!(matches!(
        ExperimentConfig::from_json(&bad),
        Err(Error::Json(_))
    ));
}

#[test]
fn transfer_and_federated_configs_run() {
    let tl = r#"{
        "schema": 1,
        "scenario": "TL",
        "class": {"kind": "Bnd", "bound": 1.0},
        "instance": {"mu": 1.0, "L": 2.0},
        "target": {"atoms": [[0.0], [1.0]], "weights": [0.7, 0.3]},
        "source": {"atoms": [[0.0], [1.0]], "weights": [0.3, 0.7]},
        "n_grid": [8, 16],
        "replications": 5,
        "estimator": {"kind": "TLMean"},
        "optimizer": {"schedule": {"kind": "FixedBatch", "a": 0.5}}
    }"#;
    let res = run_scenario(&ExperimentConfig::from_json(tl).unwrap()).unwrap();
    assert_eq!(res.points.len(), 2);
    assert!(res.points[0].bounds.as_ref().unwrap().lower.is_some());

    let fl = r#"{
        "schema": 1,
        "scenario": "FL",
        "class": {"kind": "Bnd", "bound": 1.0},
        "instance": {"mu": 1.0, "L": 1.0},
        "target": {"atoms": [[0.0], [1.0], [2.0], [3.0]], "weights": [0.25, 0.25, 0.25, 0.25]},
        "agents": [
            {"distribution": {"atoms": [[0.0], [1.0], [2.0], [3.0]], "weights": [0.25, 0.25, 0.25, 0.25]}, "share": 1.0},
            {"distribution": {"atoms": [[2.0], [3.0], [4.0], [5.0]], "weights": [0.25, 0.25, 0.25, 0.25]}, "share": 100.0}
        ],
        "n_grid": [101, 202],
        "replications": 20,
        "estimator": {"kind": "FLWeightedMean"},
        "optimizer": {"schedule": {"kind": "SingleOracle", "steps": 3}}
    }"#;
    let res = run_scenario(&ExperimentConfig::from_json(fl).unwrap()).unwrap();
    assert!(res
        .points
        .iter()
        .all(|p| p.bounds.as_ref().unwrap().upper.is_some()));
}

#[test]
fn robust_gaussian_config_runs() {
    let rl = r#"{
        "schema": 1,
        "scenario": "RL",
        "class": {"kind": "Lip", "bound": 1.0},
        "instance": {"mu": 1.0, "L": 2.0, "dim": 2},
        "target": {"gaussian": {"mean": [0.0, 0.0], "cov": [[1.0, 0.0], [0.0, 1.0]]}},
        "outliers": {"atoms": [[50.0, 0.0]], "weights": [1.0]},
        "eta": 0.1,
        "n_grid": [64, 128],
        "replications": 4,
        "estimator": {"kind": "RobustFilterMean"},
        "optimizer": {"schedule": {"kind": "Exponential"}}
    }"#;
    let res = run_scenario(&ExperimentConfig::from_json(rl).unwrap()).unwrap();
    let b = res.points[0].bounds.as_ref().unwrap();
    assert!(b.lower.is_none() && b.upper.is_some());
}

#[test]
fn unknown_suite_is_rejected() {
    assert!(verify_suite("sandwich-xx", 7).is_err());
    assert!(verify_suite("schedules", 7).unwrap().passed);
}
