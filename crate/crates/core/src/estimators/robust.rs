//! Iterative spectral filter for the mean of a contaminated sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::oracles::Observation;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub max_rounds: usize,
    pub power_steps: usize,
    /// Stop once the top eigenvalue is at most `threshold * sigma0^2`.
    pub threshold: f64,
    /// Known per-direction variance bound of the clean points. When absent
    /// it is taken from the median squared distance to the coordinate-wise
    /// median, divided by the dimension.
    #[serde(default)]
    pub sigma_sq: Option<f64>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            max_rounds: 50,
            power_steps: 100,
            threshold: 20.0,
            sigma_sq: None,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 || self.power_steps == 0 || !(self.threshold > 0.0) {
            return Err(Error::invalid(
                "filter rounds, power steps and threshold must be positive",
            ));
        }
        if let Some(s) = self.sigma_sq {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(Error::invalid("sigma_sq must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustMean<T> {
    pub value: Vec<T>,
    pub rounds: usize,
    /// The spectral stopping rule fired before `max_rounds`.
    pub converged: bool,
    /// False when `eta > 1/4`; the estimate is still returned.
    pub guarantee_holds: bool,
}

fn median<T: Real>(mut v: Vec<T>) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

fn default_scale<T: Real>(values: &[Vec<T>]) -> T {
    let dim = values[0].len();
    let center: Vec<T> = (0..dim)
        .map(|k| median(values.iter().map(|v| v[k]).collect()))
        .collect();
    median(values.iter().map(|v| linalg::dist_sq(v, &center)).collect()) / T::count(dim.max(1))
}

/// Filter-based robust mean.
///
/// Each round forms the weighted mean and covariance, finds the top
/// eigenpair by power iteration and either stops (top eigenvalue at most
/// `threshold * sigma0^2`) or scales every weight by `1 - tau_i / tau_max`,
/// where `tau_i` is the squared projection of the centred point onto the top
/// eigenvector.
pub fn robust_filter_mean<T: Real>(
    obs: &Observation<T>,
    eta: T,
    cfg: &FilterConfig,
) -> Result<RobustMean<T>> {
    cfg.validate()?;
    if obs.is_empty() {
        return Err(Error::Empty("robust mean of an empty observation"));
    }
    if !(eta >= T::zero() && eta <= T::one()) {
        return Err(Error::invalid(format!("eta must lie in [0, 1], got {eta}")));
    }
    let values = &obs.values;
    let sigma_sq = match cfg.sigma_sq {
        Some(s) => T::lit(s),
        None => default_scale(values),
    };
    let limit = T::lit(cfg.threshold) * sigma_sq;
    let mut w = vec![T::one(); values.len()];
    let mut rounds = 0;
    let mut converged = false;
    let mut mean = linalg::weighted_mean(values, &w);
    while rounds < cfg.max_rounds {
        rounds += 1;
        mean = linalg::weighted_mean(values, &w);
        let cov = SymMatrix::weighted_covariance(values, &w, &mean);
        let (lambda, u) = cov.top_eigenpair(cfg.power_steps);
        if lambda <= limit {
            converged = true;
            break;
        }
        let tau: Vec<T> = values
            .iter()
            .map(|v| {
                let s = linalg::dot(&linalg::sub(v, &mean), &u);
                s * s
            })
            .collect();
        let tau_max = tau
            .iter()
            .zip(&w)
            .filter(|(_, &wi)| wi > T::zero())
            .fold(T::zero(), |m, (&t, _)| m.max(t));
        if tau_max <= T::zero() {
            converged = true;
            break;
        }
        for (wi, &t) in w.iter_mut().zip(&tau) {
            *wi = (*wi * (T::one() - t / tau_max)).max(T::zero());
        }
        if w.iter().all(|&wi| wi <= T::zero()) {
            break;
        }
    }
    if !converged && w.iter().any(|&wi| wi > T::zero()) {
        mean = linalg::weighted_mean(values, &w);
    }
    Ok(RobustMean {
        value: mean,
        rounds,
        converged,
        guarantee_holds: eta <= T::lit(0.25),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::Seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn constant_sample_returns_the_constant() {
        let o = Observation::new(vec![vec![1.5, -2.0]; 10]);
        let r = robust_filter_mean(&o, 0.0, &FilterConfig::default()).unwrap();
        assert_eq!(r.value, vec![1.5, -2.0]);
        assert!(r.converged);
    }

    #[test]
    fn removes_far_outliers() {
        let mut rng = Seed::new(3, 0).rng();
        let mut values = Vec::new();
        for i in 0..500 {
            let mut v: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            if i % 5 == 0 {
                v[0] += 100.0;
            }
            values.push(v);
        }
        let o = Observation::new(values);
        let naive = linalg::norm_sq(&linalg::mean_rows(&o.values).unwrap());
        let r = robust_filter_mean(&o, 0.2, &FilterConfig::default()).unwrap();
        assert!(r.converged);
        assert!(linalg::norm_sq(&r.value) < naive / 100.0, "{:?}", r.value);
    }

    #[test]
    fn eta_above_quarter_is_flagged() {
        let o = Observation::new(vec![vec![0.0], vec![1.0]]);
        let r = robust_filter_mean(&o, 0.3, &FilterConfig::default()).unwrap();
        assert!(!r.guarantee_holds);
    }

    #[test]
    fn rejects_bad_config() {
        let o = Observation::new(vec![vec![0.0]]);
        let cfg = FilterConfig {
            max_rounds: 0,
            ..FilterConfig::default()
        };
        assert!(robust_filter_mean(&o, 0.1, &cfg).is_err());
    }
}
