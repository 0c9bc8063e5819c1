use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mmrisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmrisk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const CONFIG: &str = r#"{
    "schema": 1,
    "scenario": "SL",
    "class": {"kind": "Bnd", "bound": 1.0},
    "instance": {"mu": 1.0, "L": 4.0},
    "target": {"atoms": [[0.0], [1.0]], "weights": [0.5, 0.5]},
    "n_grid": [16, 32, 64, 128],
    "replications": 40,
    "estimator": {"kind": "SampleMean"},
    "optimizer": {"schedule": {"kind": "Exponential"}}
}"#;

#[test]
fn run_then_fit_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", CONFIG);
    let out = dir.path().join("out");
    let o = mmrisk(&[
        "run",
        "--config",
        &cfg,
        "--seed",
        "42",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = out.join("results.csv");
    assert!(out.join("summary.json").exists());
    let first = fs::read(&csv).unwrap();

    let o = mmrisk(&["fit-rate", "--input", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let fit: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(fit["slope"].as_f64().unwrap() < 0.0);

    let out2 = dir.path().join("again");
    let o = mmrisk(&[
        "run",
        "--config",
        &cfg,
        "--seed",
        "42",
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(first, fs::read(out2.join("results.csv")).unwrap());
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", CONFIG);
    let mut files = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_mmrisk"))
            .args([
                "run",
                "--config",
                &cfg,
                "--seed",
                "9",
                "--out",
                out.to_str().unwrap(),
            ])
            .env("MMRISK_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        files.push(fs::read(out.join("results.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(
        mmrisk(&["verify", "--suite", "bogus", "--seed", "7"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mmrisk(&["schedule", "--n", "2", "--kappa", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(mmrisk(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        &CONFIG.replace("\"schema\": 1", "\"schema\": 1, \"extra\": true"),
    );
    let o = mmrisk(&[
        "run",
        "--config",
        &bad,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn schedule_prints_batches() {
    let o = mmrisk(&["schedule", "--n", "101", "--kappa", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let batches: Vec<u64> = v["batches"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b.as_u64().unwrap())
        .collect();
    assert_eq!(batches.len(), 50);
    assert!(batches.iter().sum::<u64>() <= 100);
    assert_eq!(v["total"].as_u64().unwrap(), batches.iter().sum::<u64>());
}

#[test]
fn divergence_of_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.json",
        r#"{"atoms": [[0.0], [1.0]], "weights": [0.5, 0.5]}"#,
    );
    let q = write(
        dir.path(),
        "q.json",
        r#"{"atoms": [[1.0], [2.0]], "weights": [0.5, 0.5]}"#,
    );
    let o = mmrisk(&["divergence", "--p", &p, "--q", &q]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["tv"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["lecam"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn verify_reports_json() {
    let o = mmrisk(&["verify", "--suite", "fixed-data", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["suite"], "fixed-data");
    assert_eq!(v["passed"], true);
}
