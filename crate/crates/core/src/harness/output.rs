use std::fs;
use std::path::{Path, PathBuf};

use super::run::ExperimentResult;
use crate::error::Result;

pub const RESULTS_CSV: &str = "results.csv";
pub const SUMMARY_JSON: &str = "summary.json";

/// Writes `results.csv` (one row per replication) and `summary.json` into `dir`.
pub fn write_outputs(
    result: &ExperimentResult,
    dir: impl AsRef<Path>,
) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(RESULTS_CSV);
    let mut w = csv::Writer::from_path(&csv_path)?;
    for r in &result.records {
        w.serialize(r)?;
    }
    w.flush()?;
    let json_path = dir.join(SUMMARY_JSON);
    fs::write(&json_path, serde_json::to_string_pretty(result)? + "\n")?;
    Ok((csv_path, json_path))
}
