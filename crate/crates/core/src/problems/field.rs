//! Gradient fields `g : R^D -> R^d` and the regularity classes they belong to.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::distribution::{DataDistribution, DiscreteDistribution};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::scalar::Real;

/// Regularity of the loss gradient in the data argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassKind {
    /// `xi -> A xi + b` with nuclear norm of `A` at most `B`.
    Aff,
    /// `B`-Lipschitz in the data point.
    Lip,
    /// Within distance `B` of some constant centre.
    Bnd,
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassKind::Aff => "Aff",
            ClassKind::Lip => "Lip",
            ClassKind::Bnd => "Bnd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionClass<T> {
    pub kind: ClassKind,
    pub bound: T,
}

impl<T: Real> FunctionClass<T> {
    pub fn new(kind: ClassKind, bound: T) -> Result<Self> {
        if !(bound >= T::zero()) || !bound.is_finite() {
            return Err(Error::invalid(format!(
                "class bound must be finite and >= 0, got {bound}"
            )));
        }
        Ok(Self { kind, bound })
    }

    pub fn bnd(bound: T) -> Self {
        Self::new(ClassKind::Bnd, bound).expect("valid bound")
    }

    pub fn lip(bound: T) -> Self {
        Self::new(ClassKind::Lip, bound).expect("valid bound")
    }

    pub fn aff(bound: T) -> Self {
        Self::new(ClassKind::Aff, bound).expect("valid bound")
    }
}

type Evaluator<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

/// Affine representation `xi -> A xi + b`, kept when a field is known to be affine.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap<T> {
    /// `d x D`, row-major rows.
    pub matrix: Vec<Vec<T>>,
    pub offset: Vec<T>,
}

impl<T: Real> AffineMap<T> {
    pub fn apply(&self, xi: &[T]) -> Vec<T> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, &b)| linalg::dot(row, xi) + b)
            .collect()
    }

    /// Sum of singular values.
    pub fn nuclear_norm(&self) -> T {
        let cols = self.matrix.first().map_or(0, Vec::len);
        let mut gram = SymMatrix::zeros(cols);
        for i in 0..cols {
            for j in 0..cols {
                let v = self.matrix.iter().fold(T::zero(), |s, r| s + r[i] * r[j]);
                gram.set(i, j, v);
            }
        }
        gram.eigenvalues()
            .into_iter()
            .map(|ev| ev.max(T::zero()).sqrt())
            .sum()
    }
}

/// A gradient field together with its declared class membership.
#[derive(Clone)]
pub struct GradientField<T> {
    eval: Evaluator<T>,
    class: FunctionClass<T>,
    input_dim: usize,
    output_dim: usize,
    affine: Option<AffineMap<T>>,
}

impl<T: fmt::Debug> fmt::Debug for GradientField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GradientField")
            .field("class", &self.class)
            .field("input_dim", &self.input_dim)
            .field("output_dim", &self.output_dim)
            .field("affine", &self.affine.is_some())
            .finish()
    }
}

/// Outcome of a finite membership check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Membership {
    Verified,
    Violated,
    /// The finite check cannot decide (e.g. non-affine field declared `Aff`).
    Inconclusive,
}

impl<T: Real> GradientField<T> {
    pub fn from_fn<F>(class: FunctionClass<T>, input_dim: usize, output_dim: usize, f: F) -> Self
    where
        F: Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            class,
            input_dim,
            output_dim,
            affine: None,
        }
    }

    pub fn constant(value: Vec<T>, input_dim: usize) -> Self {
        let d = value.len();
        let map = AffineMap {
            matrix: vec![vec![T::zero(); input_dim]; d],
            offset: value.clone(),
        };
        Self {
            eval: Arc::new(move |_| value.clone()),
            class: FunctionClass::bnd(T::zero()),
            input_dim,
            output_dim: d,
            affine: Some(map),
        }
    }

    /// `xi -> A xi + b`, declared `Aff` with bound equal to the nuclear norm of `A`.
    pub fn affine(matrix: Vec<Vec<T>>, offset: Vec<T>) -> Result<Self> {
        check_dim(matrix.len(), offset.len())?;
        let input_dim = matrix.first().map_or(0, Vec::len);
        for r in &matrix {
            check_dim(input_dim, r.len())?;
        }
        let map = AffineMap { matrix, offset };
        let class = FunctionClass::aff(map.nuclear_norm());
        let output_dim = map.offset.len();
        let shared = map.clone();
        Ok(Self {
            eval: Arc::new(move |xi| shared.apply(xi)),
            class,
            input_dim,
            output_dim,
            affine: Some(map),
        })
    }

    /// `xi -> scale * xi`, a `|scale|`-Lipschitz field.
    pub fn scaled_identity(dim: usize, scale: T) -> Self {
        let matrix = (0..dim)
            .map(|i| linalg::scale(&linalg::basis(dim, i), scale))
            .collect();
        let map = AffineMap {
            matrix,
            offset: vec![T::zero(); dim],
        };
        Self {
            eval: Arc::new(move |xi| linalg::scale(xi, scale)),
            class: FunctionClass::lip(scale.abs()),
            input_dim: dim,
            output_dim: dim,
            affine: Some(map),
        }
    }

    /// `+B e_1` where `predicate` holds and `-B e_1` elsewhere.
    pub fn sign_split<P>(bound: T, input_dim: usize, output_dim: usize, predicate: P) -> Self
    where
        P: Fn(&[T]) -> bool + Send + Sync + 'static,
    {
        assert!(output_dim >= 1, "output dimension must be positive");
        Self::from_fn(
            FunctionClass::bnd(bound),
            input_dim,
            output_dim,
            move |xi| {
                let mut v = vec![T::zero(); output_dim];
                v[0] = if predicate(xi) { bound } else { -bound };
                v
            },
        )
    }

    /// `+B e_1` on the listed atoms of `support`, `-B e_1` everywhere else.
    pub fn atom_split(
        bound: T,
        support: &DiscreteDistribution<T>,
        positive: &[usize],
        output_dim: usize,
    ) -> Result<Self> {
        if let Some(&bad) = positive.iter().find(|&&i| i >= support.len()) {
            return Err(Error::invalid(format!("atom index {bad} out of range")));
        }
        let marked: Vec<Vec<T>> = positive
            .iter()
            .map(|&i| support.atoms()[i].clone())
            .collect();
        Ok(Self::sign_split(
            bound,
            support.dim(),
            output_dim,
            move |xi| marked.iter().any(|a| a.as_slice() == xi),
        ))
    }

    pub fn class(&self) -> FunctionClass<T> {
        self.class
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn affine_map(&self) -> Option<&AffineMap<T>> {
        self.affine.as_ref()
    }

    #[inline]
    pub fn eval(&self, xi: &[T]) -> Vec<T> {
        (self.eval)(xi)
    }

    pub fn try_eval(&self, xi: &[T]) -> Result<Vec<T>> {
        check_dim(self.input_dim, xi.len())?;
        Ok(self.eval(xi))
    }

    /// `g + c`. All three classes are closed under constant shifts.
    pub fn translated(&self, c: &[T]) -> Result<Self> {
        check_dim(self.output_dim, c.len())?;
        let inner = self.eval.clone();
        let shift = c.to_vec();
        let affine = self.affine.as_ref().map(|m| AffineMap {
            matrix: m.matrix.clone(),
            offset: linalg::add(&m.offset, c),
        });
        Ok(Self {
            eval: Arc::new(move |xi| linalg::add(&inner(xi), &shift)),
            class: self.class,
            input_dim: self.input_dim,
            output_dim: self.output_dim,
            affine,
        })
    }

    pub fn negated(&self) -> Self {
        let inner = self.eval.clone();
        let affine = self.affine.as_ref().map(|m| AffineMap {
            matrix: m
                .matrix
                .iter()
                .map(|r| linalg::scale(r, -T::one()))
                .collect(),
            offset: linalg::scale(&m.offset, -T::one()),
        });
        Self {
            eval: Arc::new(move |xi| linalg::scale(&inner(xi), -T::one())),
            class: self.class,
            input_dim: self.input_dim,
            output_dim: self.output_dim,
            affine,
        }
    }

    /// `E_D[g(xi)]`: exact on discrete laws, and on Gaussians for affine fields.
    pub fn expectation(&self, dist: &DataDistribution<T>) -> Result<Vec<T>> {
        check_dim(self.input_dim, dist.dim())?;
        match dist {
            DataDistribution::Discrete(d) => Ok(d.expectation(|a| self.eval(a))),
            DataDistribution::Gaussian(g) => match &self.affine {
                Some(map) => Ok(map.apply(g.mean())),
                None => Err(Error::Unsupported(
                    "exact expectation of a non-affine field under a Gaussian".into(),
                )),
            },
        }
    }

    /// `E ||g(xi) - E g(xi)||^2` over a discrete support.
    pub fn variance_on(&self, support: &DiscreteDistribution<T>) -> T {
        let m = support.expectation(|a| self.eval(a));
        support.expectation_scalar(|a| linalg::dist_sq(&self.eval(a), &m))
    }

    /// Checks the declared class on every atom (pair) of a finite support.
    pub fn check_membership(&self, support: &DiscreteDistribution<T>) -> Membership {
        let tol = T::lit(1e-9) * (T::one() + self.class.bound);
        let values: Vec<Vec<T>> = support.atoms().iter().map(|a| self.eval(a)).collect();
        match self.class.kind {
            ClassKind::Bnd => {
                let b = self.class.bound;
                // Necessary: every value within 2B of the (unweighted) mean value.
                let avg = linalg::mean_rows(&values).unwrap_or_default();
                if values
                    .iter()
                    .any(|v| linalg::dist(v, &avg) > T::lit(2.0) * b + tol)
                {
                    return Membership::Violated;
                }
                let center: Vec<T> = (0..self.output_dim)
                    .map(|k| {
                        let (lo, hi) = values
                            .iter()
                            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| {
                                (lo.min(v[k]), hi.max(v[k]))
                            });
                        (lo + hi) / T::lit(2.0)
                    })
                    .collect();
                let radius = values
                    .iter()
                    .fold(T::zero(), |r, v| r.max(linalg::dist(v, &center)));
                if radius <= b + tol {
                    Membership::Verified
                } else if self.output_dim == 1 {
                    // The midpoint is the exact Chebyshev centre in one dimension.
                    Membership::Violated
                } else {
                    Membership::Inconclusive
                }
            }
            ClassKind::Lip => {
                let atoms = support.atoms();
                for i in 0..atoms.len() {
                    for j in (i + 1)..atoms.len() {
                        let lhs = linalg::dist(&values[i], &values[j]);
                        let rhs = self.class.bound * linalg::dist(&atoms[i], &atoms[j]);
                        if lhs > rhs + tol {
                            return Membership::Violated;
                        }
                    }
                }
                Membership::Verified
            }
            ClassKind::Aff => match &self.affine {
                Some(map) if map.nuclear_norm() <= self.class.bound + tol => Membership::Verified,
                Some(_) => Membership::Violated,
                None => Membership::Inconclusive,
            },
        }
    }
}
