//! Log-log least squares on mean excess risk.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::RepRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Grid points kept after dropping nonpositive means.
    pub points: usize,
}

/// OLS of `ln mean` on `ln n`. Nonpositive means are dropped; at least four
/// points must remain.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, m)| *n > 0.0 && *m > 0.0 && m.is_finite())
        .map(|(n, m)| (n.ln(), m.ln()))
        .collect();
    if xy.len() < 4 {
        return Err(Error::invalid(format!(
            "rate fit needs at least 4 positive means, got {}",
            xy.len()
        )));
    }
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::invalid("rate fit needs at least two distinct n"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xy
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: xy.len(),
    })
}

/// Per-n mean excess risk of a results CSV, in increasing `n`.
pub fn means_from_csv(path: impl AsRef<Path>) -> Result<Vec<(usize, f64)>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for row in rdr.deserialize() {
        let r: RepRecord = row?;
        let e = acc.entry(r.n).or_insert((0.0, 0));
        e.0 += r.excess_risk;
        e.1 += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(n, (s, c))| (n, s / c as f64))
        .collect())
}

pub fn fit_rate_csv(path: impl AsRef<Path>) -> Result<RateFit> {
    let means: Vec<(f64, f64)> = means_from_csv(path)?
        .into_iter()
        .map(|(n, m)| (n as f64, m))
        .collect();
    fit_rate(&means)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_inverse_law() {
        let pts: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0]
            .iter()
            .map(|&n| (n, 3.0 / n))
            .collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-9);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plateau_has_zero_slope() {
        let pts: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0]
            .iter()
            .map(|&n| (n, 0.2))
            .collect();
        assert!(fit_rate(&pts).unwrap().slope.abs() < 1e-9);
    }

    #[test]
    fn too_few_positive_points() {
        let pts = [
            (16.0, 1.0),
            (32.0, 0.0),
            (64.0, -1.0),
            (128.0, 0.5),
            (256.0, 0.1),
        ];
        assert!(fit_rate(&pts).is_err());
    }
}
