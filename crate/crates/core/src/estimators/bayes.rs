use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::Observation;
use crate::scalar::Real;

/// Beta(a, b) prior on the probability of observing `+B e_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> BetaPrior<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a > T::zero() && b > T::zero()) || !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid(format!(
                "prior parameters must be positive, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    /// `a = b = sqrt(n) / 2`.
    pub fn root_n(n: usize) -> Self {
        let a = T::count(n).sqrt() / T::lit(2.0);
        let a = if a > T::zero() { a } else { T::lit(0.5) };
        Self { a, b: a }
    }

    /// Posterior-mean coefficient `2 (k + a) / (n + a + b) - 1` after `k`
    /// positives out of `n`.
    pub fn coefficient(&self, k: usize, n: usize) -> T {
        T::lit(2.0) * (T::count(k) + self.a) / (T::count(n) + self.a + self.b) - T::one()
    }
}

/// Bayes estimate of `E g = (2P - 1) B e_1` from two-point observations.
///
/// Every value must be `+B e_1` or `-B e_1`. An empty observation has no
/// dimension of its own, so the prior mean is returned as a 1-vector.
pub fn bayes_two_point<T: Real>(
    obs: &Observation<T>,
    prior: &BetaPrior<T>,
    bound: T,
) -> Result<Vec<T>> {
    let dim = obs.dim().max(1);
    let tol = T::lit(1e-12) * (T::one() + bound.abs());
    let mut k = 0usize;
    for v in &obs.values {
        if v.len() != dim || v[1..].iter().any(|x| x.abs() > tol) {
            return Err(Error::invalid("two-point observation off the e_1 axis"));
        }
        if (v[0] - bound).abs() <= tol {
            k += 1;
        } else if (v[0] + bound).abs() > tol {
            return Err(Error::invalid(format!(
                "value {} is neither +B nor -B",
                v[0]
            )));
        }
    }
    let mut out = vec![T::zero(); dim];
    out[0] = prior.coefficient(k, obs.len()) * bound;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(signs: &[f64]) -> Observation<f64> {
        Observation::new(signs.iter().map(|&s| vec![s, 0.0]).collect())
    }

    #[test]
    fn symmetric_posterior_at_half_count() {
        let p = BetaPrior::new(2.0, 2.0).unwrap();
        assert_eq!(
            bayes_two_point(&obs(&[1.0, -1.0, 1.0, -1.0]), &p, 1.0).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn empty_observation_gives_prior_mean() {
        let p = BetaPrior::<f64>::new(3.0, 1.0).unwrap();
        let v = bayes_two_point(&Observation::new(vec![]), &p, 2.0).unwrap();
        assert!((v[0] - (2.0 * 3.0 / 4.0 - 1.0) * 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_values_off_the_two_point_set() {
        let p = BetaPrior::new(1.0, 1.0).unwrap();
        assert!(bayes_two_point(&obs(&[1.0, 0.5]), &p, 1.0).is_err());
        assert!(BetaPrior::new(0.0, 1.0).is_err());
    }
}
