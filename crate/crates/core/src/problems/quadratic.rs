//! The quadratic hard-instance family `l(x, xi) = mu/2 ||x||^2 + <x, g(xi)>`.

use super::distribution::{DataDistribution, DiscreteDistribution};
use super::field::{ClassKind, FunctionClass, GradientField};
use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// A smooth objective with known minimum, as seen by the optimisers.
pub trait Objective<T: Real> {
    fn dim(&self) -> usize;
    fn value(&self, x: &[T]) -> T;
    fn gradient(&self, x: &[T]) -> Vec<T>;
    fn min_value(&self) -> T;
    /// Strong-convexity (or PL) constant `mu`.
    fn mu(&self) -> T;
    /// Smoothness constant `L` used for the step size `1/L`.
    fn smoothness(&self) -> T;

    fn kappa(&self) -> T {
        self.smoothness() / self.mu()
    }

    fn excess(&self, x: &[T]) -> T {
        self.value(x) - self.min_value()
    }
}

/// `l^g` with strong convexity `mu` and declared smoothness `L >= mu`.
///
/// The Hessian is `mu I`, so the instance belongs to every class
/// `F(G, D, mu, L)` with `L >= mu`; the optimisers step with `1/L`.
#[derive(Debug, Clone)]
pub struct QuadraticInstance<T> {
    field: GradientField<T>,
    mu: T,
    smoothness: T,
}

impl<T: Real> QuadraticInstance<T> {
    pub fn new(field: GradientField<T>, mu: T, smoothness: T) -> Result<Self> {
        if !(mu > T::zero()) {
            return Err(Error::invalid(format!("mu must be positive, got {mu}")));
        }
        if !(smoothness >= mu) {
            return Err(Error::invalid(format!(
                "L = {smoothness} must be >= mu = {mu}"
            )));
        }
        Ok(Self {
            field,
            mu,
            smoothness,
        })
    }

    pub fn with_smoothness(mut self, smoothness: T) -> Result<Self> {
        if !(smoothness >= self.mu) {
            return Err(Error::invalid(format!(
                "L = {smoothness} must be >= mu = {}",
                self.mu
            )));
        }
        self.smoothness = smoothness;
        Ok(self)
    }

    pub fn field(&self) -> &GradientField<T> {
        &self.field
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn smoothness(&self) -> T {
        self.smoothness
    }

    pub fn kappa(&self) -> T {
        self.smoothness / self.mu
    }

    pub fn dim(&self) -> usize {
        self.field.output_dim()
    }

    /// `l(x, xi)`.
    pub fn loss(&self, x: &[T], xi: &[T]) -> T {
        self.mu / T::lit(2.0) * linalg::norm_sq(x) + linalg::dot(x, &self.field.eval(xi))
    }

    /// `grad_x l(x, xi) = mu x + g(xi)`.
    pub fn point_gradient(&self, x: &[T], xi: &[T]) -> Vec<T> {
        let mut g = self.field.eval(xi);
        linalg::axpy(self.mu, x, &mut g);
        g
    }

    /// Binds the instance to a data law, precomputing `E_D g`.
    pub fn population(&self, dist: &DataDistribution<T>) -> Result<PopulationObjective<T>> {
        let mean_gradient = self.field.expectation(dist)?;
        Ok(PopulationObjective {
            mu: self.mu,
            smoothness: self.smoothness,
            mean_gradient,
        })
    }

    pub fn population_loss(&self, x: &[T], dist: &DataDistribution<T>) -> Result<T> {
        check_dim(self.dim(), x.len())?;
        Ok(self.population(dist)?.value(x))
    }

    pub fn population_grad(&self, x: &[T], dist: &DataDistribution<T>) -> Result<Vec<T>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.population(dist)?.gradient(x))
    }
}

/// `L(x) = mu/2 ||x||^2 + <x, E_D g>` with `L* = -||E_D g||^2 / (2 mu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationObjective<T> {
    mu: T,
    smoothness: T,
    mean_gradient: Vec<T>,
}

impl<T: Real> PopulationObjective<T> {
    pub fn mean_gradient(&self) -> &[T] {
        &self.mean_gradient
    }

    pub fn minimizer(&self) -> Vec<T> {
        linalg::scale(&self.mean_gradient, -T::one() / self.mu)
    }
}

impl<T: Real> Objective<T> for PopulationObjective<T> {
    fn dim(&self) -> usize {
        self.mean_gradient.len()
    }

    fn value(&self, x: &[T]) -> T {
        self.mu / T::lit(2.0) * linalg::norm_sq(x) + linalg::dot(x, &self.mean_gradient)
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        let mut g = self.mean_gradient.clone();
        linalg::axpy(self.mu, x, &mut g);
        g
    }

    fn min_value(&self) -> T {
        -linalg::norm_sq(&self.mean_gradient) / (T::lit(2.0) * self.mu)
    }

    fn mu(&self) -> T {
        self.mu
    }

    fn smoothness(&self) -> T {
        self.smoothness
    }

    /// `||mu x + E g||^2 / (2 mu)`, free of the cancellation in `L(x) - L*`.
    fn excess(&self, x: &[T]) -> T {
        linalg::norm_sq(&self.gradient(x)) / (T::lit(2.0) * self.mu)
    }
}

/// Closed-form upper value of `SV_D(G) = sup_g var(g(xi))`:
/// `B^2 var(xi)` for `Aff` and `Lip`, `B^2` for `Bnd`.
pub fn sup_variance<T: Real>(class: &FunctionClass<T>, dist: &DataDistribution<T>) -> T {
    let b2 = class.bound * class.bound;
    match class.kind {
        ClassKind::Aff | ClassKind::Lip => b2 * dist.variance(),
        ClassKind::Bnd => b2,
    }
}

/// The `+-B e_1` hard instance: `+B e_1` on the atoms listed in `split`.
///
/// When `P_D(split) = 1/2` the field attains `var(g) = B^2`.
pub fn hard_instance_bnd<T: Real>(
    bound: T,
    mu: T,
    dist: &DiscreteDistribution<T>,
    split: &[usize],
    dim: usize,
) -> Result<QuadraticInstance<T>> {
    if dist.is_empty() {
        return Err(Error::Empty("hard instance needs a nonempty support"));
    }
    if dim == 0 {
        return Err(Error::invalid("output dimension must be positive"));
    }
    let field = GradientField::atom_split(bound, dist, split, dim)?;
    QuadraticInstance::new(field, mu, mu)
}

/// Subset of atoms whose mass is closest to one half.
///
/// Exhaustive for up to 20 atoms, greedy by decreasing mass beyond that.
pub fn half_mass_split<T: Real>(dist: &DiscreteDistribution<T>) -> (Vec<usize>, T) {
    let half = T::lit(0.5);
    let w = dist.weights();
    let n = w.len();
    if n <= 20 {
        let mut best = (0u32, T::infinity());
        for mask in 0u32..(1u32 << n) {
            let m: T = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| w[i]).sum();
            let gap = (m - half).abs();
            if gap < best.1 {
                best = (mask, gap);
            }
        }
        let idx: Vec<usize> = (0..n).filter(|i| best.0 >> i & 1 == 1).collect();
        let mass = idx.iter().map(|&i| w[i]).sum();
        (idx, mass)
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap_or(std::cmp::Ordering::Equal));
        let mut idx = Vec::new();
        let mut mass = T::zero();
        for i in order {
            if (mass + w[i] - half).abs() < (mass - half).abs() {
                mass = mass + w[i];
                idx.push(i);
            }
        }
        idx.sort_unstable();
        (idx, mass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_atoms() -> DataDistribution<f64> {
        DiscreteDistribution::uniform(vec![vec![0.0], vec![1.0]])
            .unwrap()
            .into()
    }

    #[test]
    fn population_loss_examples() {
        let d = two_atoms();
        let c =
            QuadraticInstance::new(GradientField::constant(vec![1.0, 0.0], 1), 1.0, 1.0).unwrap();
        assert_eq!(c.population_loss(&[0.0, 0.0], &d).unwrap(), 0.0);
        assert_eq!(c.population_loss(&[-1.0, 0.0], &d).unwrap(), -0.5);
        assert!(c.population_loss(&[0.0], &d).is_err());

        // mu = 2, g = (2,0) on one atom and (-2,0) on the other, x = (1,0).
        let dd = d.as_discrete().unwrap();
        let h = hard_instance_bnd(2.0, 2.0, dd, &[0], 2).unwrap();
        assert_eq!(h.population_loss(&[1.0, 0.0], &d).unwrap(), 1.0);
    }

    #[test]
    fn population_grad_examples() {
        let d = two_atoms();
        let c =
            QuadraticInstance::new(GradientField::constant(vec![3.0, 4.0], 1), 1.0, 1.0).unwrap();
        assert_eq!(c.population_grad(&[0.0, 0.0], &d).unwrap(), vec![3.0, 4.0]);
        let pop = c.population(&d).unwrap();
        assert_eq!(pop.gradient(&pop.minimizer()), vec![0.0, 0.0]);
        assert_eq!(pop.min_value(), -12.5);
    }

    #[test]
    fn sup_variance_values() {
        let d = two_atoms();
        assert_eq!(sup_variance(&FunctionClass::bnd(2.0), &d), 4.0);
        assert_eq!(sup_variance(&FunctionClass::bnd(0.0), &d), 0.0);
        let g: DataDistribution<f64> =
            crate::problems::GaussianDistribution::isotropic(vec![0.0; 3]).into();
        assert_eq!(sup_variance(&FunctionClass::lip(1.0), &g), 3.0);
    }

    #[test]
    fn hard_instance_variances() {
        let d = DiscreteDistribution::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        let h = hard_instance_bnd(1.0, 1.0, &d, &[0], 1).unwrap();
        assert_eq!(h.field().variance_on(&d), 1.0);
        let all = hard_instance_bnd(1.0, 1.0, &d, &[0, 1], 1).unwrap();
        assert_eq!(all.field().variance_on(&d), 0.0);
        let quarter =
            DiscreteDistribution::uniform((0..4).map(|i| vec![i as f64]).collect()).unwrap();
        let h = hard_instance_bnd(2.0, 1.0, &quarter, &[3], 1).unwrap();
        assert!((h.field().variance_on(&quarter) - 3.0).abs() < 1e-12);
        assert!(hard_instance_bnd(1.0, 1.0, &d, &[0], 0).is_err());
    }

    #[test]
    fn rejects_bad_constants() {
        let g = GradientField::<f64>::constant(vec![0.0], 1);
        assert!(QuadraticInstance::new(g.clone(), 0.0, 1.0).is_err());
        assert!(QuadraticInstance::new(g, 2.0, 1.0).is_err());
    }

    #[test]
    fn half_mass_split_finds_exact_half() {
        let d = DiscreteDistribution::new(
            (0..4).map(|i| vec![i as f64]).collect(),
            vec![0.1, 0.4, 0.3, 0.2],
        )
        .unwrap();
        let (idx, mass) = half_mass_split(&d);
        assert!((mass - 0.5).abs() < 1e-12, "{idx:?} {mass}");
    }
}
