//! Data laws over `R^D`: finite discrete supports with exact masses, and
//! Gaussian samplers.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::scalar::Real;

/// Tolerance used for mass normalisation at scalar precision `T`.
pub(crate) fn mass_tolerance<T: Real>(n: usize) -> T {
    T::lit(1e-12).max(T::epsilon() * T::count(16 * n.max(1)))
}

/// Finite distribution: distinct atoms with nonnegative masses summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<T> {
    atoms: Vec<Vec<T>>,
    weights: Vec<T>,
    cumulative: Vec<T>,
}

impl<T: Real> DiscreteDistribution<T> {
    pub fn new(atoms: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Empty(
                "discrete distribution needs at least one atom",
            ));
        }
        check_dim(atoms.len(), weights.len())?;
        let dim = atoms[0].len();
        for a in &atoms {
            check_dim(dim, a.len())?;
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("atom coordinates must be finite"));
            }
        }
        if weights.iter().any(|&w| !(w >= T::zero()) || !w.is_finite()) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > mass_tolerance::<T>(weights.len()) {
            return Err(Error::invalid(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                if atoms[i] == atoms[j] {
                    return Err(Error::invalid(format!("atoms {i} and {j} coincide")));
                }
            }
        }
        let mut acc = T::zero();
        let cumulative = weights
            .iter()
            .map(|&w| {
                acc = acc + w;
                acc
            })
            .collect();
        Ok(Self {
            atoms,
            weights,
            cumulative,
        })
    }

    /// Uniform law over the given (distinct) atoms.
    pub fn uniform(atoms: Vec<Vec<T>>) -> Result<Self> {
        let n = atoms.len();
        if n == 0 {
            return Err(Error::Empty(
                "discrete distribution needs at least one atom",
            ));
        }
        let w = T::one() / T::count(n);
        Self::new(atoms, vec![w; n])
    }

    pub fn point_mass(atom: Vec<T>) -> Self {
        Self::new(vec![atom], vec![T::one()]).expect("single finite atom is a valid law")
    }

    pub fn atoms(&self) -> &[Vec<T>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn index_of(&self, point: &[T]) -> Option<usize> {
        self.atoms.iter().position(|a| a.as_slice() == point)
    }

    /// `P({point})`, zero off the support.
    pub fn mass_of(&self, point: &[T]) -> T {
        self.index_of(point).map_or(T::zero(), |i| self.weights[i])
    }

    /// Exact expectation of a vector-valued function.
    pub fn expectation<F>(&self, mut f: F) -> Vec<T>
    where
        F: FnMut(&[T]) -> Vec<T>,
    {
        let mut acc: Option<Vec<T>> = None;
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            let v = f(a);
            match acc.as_mut() {
                Some(s) => linalg::axpy(w, &v, s),
                None => acc = Some(linalg::scale(&v, w)),
            }
        }
        acc.unwrap_or_default()
    }

    /// Exact expectation of a scalar function.
    pub fn expectation_scalar<F>(&self, mut f: F) -> T
    where
        F: FnMut(&[T]) -> T,
    {
        self.atoms
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (a, &w)| acc + w * f(a))
    }

    pub fn mean(&self) -> Vec<T> {
        self.expectation(<[T]>::to_vec)
    }

    /// `E ||xi - E xi||^2`.
    pub fn variance(&self) -> T {
        let m = self.mean();
        self.expectation_scalar(|a| linalg::dist_sq(a, &m))
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = T::lit(rng.random::<f64>());
        let idx = self.cumulative.partition_point(|&c| c <= u);
        // Rounding can leave the last cumulative value a hair under one.
        let idx = idx.min(self.atoms.len() - 1);
        if self.weights[idx] > T::zero() {
            idx
        } else {
            // Never return a zero-mass atom: step back to the last charged one.
            (0..=idx)
                .rev()
                .find(|&i| self.weights[i] > T::zero())
                .unwrap_or(idx)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        self.atoms[self.sample_index(rng)].clone()
    }

    pub fn cast<U: Real>(&self) -> DiscreteDistribution<U> {
        DiscreteDistribution::new(
            self.atoms.iter().map(|a| cast_vec(a)).collect(),
            cast_vec(&self.weights),
        )
        .expect("casting preserves validity")
    }
}

pub(crate) fn cast_vec<T: Real, U: Real>(v: &[T]) -> Vec<U> {
    v.iter().map(|&x| U::lit(x.as_f64())).collect()
}

/// Multivariate normal law with a PSD covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDistribution<T> {
    mean: Vec<T>,
    covariance: SymMatrix<T>,
    factor: Vec<Vec<T>>,
}

impl<T: Real> GaussianDistribution<T> {
    pub fn new(mean: Vec<T>, covariance: SymMatrix<T>) -> Result<Self> {
        check_dim(mean.len(), covariance.dim())?;
        if mean.is_empty() {
            return Err(Error::Empty("gaussian mean"));
        }
        let sym_tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
        if covariance.asymmetry() > sym_tol {
            return Err(Error::invalid("covariance is not symmetric"));
        }
        let eig_tol = T::lit(-1e-10).min(-T::epsilon().sqrt());
        if let Some(&lo) = covariance.eigenvalues().first() {
            if lo < eig_tol {
                return Err(Error::invalid(format!(
                    "covariance has negative eigenvalue {lo}"
                )));
            }
        }
        let factor = covariance.psd_cholesky(T::epsilon() * covariance.trace().max(T::one()));
        Ok(Self {
            mean,
            covariance,
            factor,
        })
    }

    /// `N(mean, I)`.
    pub fn isotropic(mean: Vec<T>) -> Self {
        let d = mean.len();
        Self::new(mean, SymMatrix::identity(d)).expect("identity covariance is valid")
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn covariance(&self) -> &SymMatrix<T> {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Trace of the covariance, i.e. `E ||xi - E xi||^2`.
    pub fn variance(&self) -> T {
        self.covariance.trace()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let z: Vec<T> = (0..self.dim())
            .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let mut out = self.mean.clone();
        for (i, row) in self.factor.iter().enumerate() {
            out[i] = out[i] + linalg::dot(row, &z);
        }
        out
    }
}

/// Either kind of data law.
#[derive(Debug, Clone, PartialEq)]
pub enum DataDistribution<T> {
    Discrete(DiscreteDistribution<T>),
    Gaussian(GaussianDistribution<T>),
}

impl<T: Real> DataDistribution<T> {
    pub fn dim(&self) -> usize {
        match self {
            Self::Discrete(d) => d.dim(),
            Self::Gaussian(g) => g.dim(),
        }
    }

    pub fn mean(&self) -> Vec<T> {
        match self {
            Self::Discrete(d) => d.mean(),
            Self::Gaussian(g) => g.mean().to_vec(),
        }
    }

    pub fn variance(&self) -> T {
        match self {
            Self::Discrete(d) => d.variance(),
            Self::Gaussian(g) => g.variance(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        match self {
            Self::Discrete(d) => d.sample(rng),
            Self::Gaussian(g) => g.sample(rng),
        }
    }

    pub fn as_discrete(&self) -> Option<&DiscreteDistribution<T>> {
        match self {
            Self::Discrete(d) => Some(d),
            Self::Gaussian(_) => None,
        }
    }
}

impl<T> From<DiscreteDistribution<T>> for DataDistribution<T> {
    fn from(d: DiscreteDistribution<T>) -> Self {
        Self::Discrete(d)
    }
}

impl<T> From<GaussianDistribution<T>> for DataDistribution<T> {
    fn from(g: GaussianDistribution<T>) -> Self {
        Self::Gaussian(g)
    }
}

/// JSON form of a distribution.
///
/// Either `{"atoms": [[...], ...], "weights": [...]}` or
/// `{"gaussian": {"mean": [...], "cov": [[...], ...]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistributionSpec {
    Discrete(DiscreteSpec),
    Gaussian(GaussianWrapper),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteSpec {
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianWrapper {
    pub gaussian: GaussianSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl DistributionSpec {
    pub fn build<T: Real>(&self) -> Result<DataDistribution<T>> {
        match self {
            Self::Discrete(d) => Ok(DiscreteDistribution::new(
                d.atoms.iter().map(|a| cast_vec(a)).collect(),
                cast_vec(&d.weights),
            )?
            .into()),
            Self::Gaussian(GaussianWrapper { gaussian }) => {
                let rows: Vec<Vec<T>> = gaussian.cov.iter().map(|r| cast_vec(r)).collect();
                let cov = SymMatrix::from_rows(&rows)
                    .ok_or_else(|| Error::invalid("covariance must be square"))?;
                Ok(GaussianDistribution::new(cast_vec(&gaussian.mean), cov)?.into())
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl<T: Real> From<&DiscreteDistribution<T>> for DistributionSpec {
    fn from(d: &DiscreteDistribution<T>) -> Self {
        Self::Discrete(DiscreteSpec {
            atoms: d.atoms().iter().map(|a| cast_vec(a)).collect(),
            weights: cast_vec(d.weights()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_weights_and_duplicates() {
        assert!(DiscreteDistribution::new(vec![vec![0.0], vec![1.0]], vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![vec![0.0], vec![1.0]], vec![-0.5, 1.5]).is_err());
        assert!(DiscreteDistribution::new(vec![vec![0.0], vec![0.0]], vec![0.5, 0.5]).is_err());
        assert!(DiscreteDistribution::<f64>::new(vec![], vec![]).is_err());
    }

    #[test]
    fn exact_moments() {
        let d = DiscreteDistribution::uniform(vec![vec![-1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(d.mean(), vec![0.0, 0.0]);
        assert_eq!(d.variance(), 1.0);
    }

    #[test]
    fn zero_mass_atoms_never_sampled() {
        let d =
            DiscreteDistribution::new(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0.0, 1.0, 0.0])
                .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..1000).all(|_| d.sample_index(&mut rng) == 1));
    }

    #[test]
    fn gaussian_rejects_indefinite_covariance() {
        let cov = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(GaussianDistribution::new(vec![0.0, 0.0], cov).is_err());
        let asym = SymMatrix::from_rows(&[vec![1.0, 0.1], vec![0.0, 1.0]]).unwrap();
        assert!(GaussianDistribution::new(vec![0.0, 0.0], asym).is_err());
    }

    #[test]
    fn json_forms_parse() {
        let d =
            DistributionSpec::from_json(r#"{"atoms": [[0.0], [1.0]], "weights": [0.25, 0.75]}"#)
                .unwrap()
                .build::<f64>()
                .unwrap();
        assert_eq!(d.mean(), vec![0.75]);
        let g = DistributionSpec::from_json(
            r#"{"gaussian": {"mean": [1.0, 2.0], "cov": [[2.0, 0.0], [0.0, 3.0]]}}"#,
        )
        .unwrap()
        .build::<f32>()
        .unwrap();
        assert_eq!(g.variance(), 5.0);
        assert!(
            DistributionSpec::from_json(r#"{"atoms": [[0.0]], "weights": [1.0], "x": 1}"#).is_err()
        );
    }
}
