//! Estimators for a fixed, known design `xi'_1, ..., xi'_n`.

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::oracles::{Observation, OracleSample, Seed};
use crate::problems::{
    mass_tolerance, DataDistribution, DiscreteDistribution, FunctionClass, GradientField,
};
use crate::scalar::Real;

/// Draws used to estimate Voronoi masses under a continuous law.
pub const VORONOI_DRAWS: usize = 1_000_000;

/// `sum_i P({xi'_i}) g_i + (1 - sum_i P({xi'_i})) (1/n) sum_i g_i`.
pub fn fd_bnd_estimator<T: Real>(obs: &Observation<T>, masses: &[T]) -> Result<Vec<T>> {
    if obs.is_empty() {
        return Err(Error::Empty("fixed-design observation"));
    }
    check_dim(obs.len(), masses.len())?;
    if masses.iter().any(|&m| !(m >= T::zero())) {
        return Err(Error::invalid("design masses must be nonnegative"));
    }
    let total: T = masses.iter().copied().sum();
    if total > T::one() + mass_tolerance::<T>(masses.len()) {
        return Err(Error::invalid(format!("design masses sum to {total} > 1")));
    }
    let rest = (T::one() - total).max(T::zero());
    let mean = linalg::mean_rows(&obs.values).expect("nonempty");
    let mut out = linalg::scale(&mean, rest);
    for (v, &m) in obs.values.iter().zip(masses) {
        linalg::axpy(m, v, &mut out);
    }
    Ok(out)
}

/// `sum_i P(nearest design point is i) g_i`.
pub fn fd_lip_estimator<T: Real>(obs: &Observation<T>, voronoi: &[T]) -> Result<Vec<T>> {
    if obs.is_empty() {
        return Err(Error::Empty("fixed-design observation"));
    }
    check_dim(obs.len(), voronoi.len())?;
    if voronoi.iter().any(|&m| !(m >= T::zero())) {
        return Err(Error::invalid("Voronoi masses must be nonnegative"));
    }
    let total: T = voronoi.iter().copied().sum();
    if (total - T::one()).abs() > mass_tolerance::<T>(voronoi.len()) {
        return Err(Error::invalid(format!(
            "Voronoi masses sum to {total}, not 1"
        )));
    }
    let mut out = vec![T::zero(); obs.dim()];
    for (v, &m) in obs.values.iter().zip(voronoi) {
        linalg::axpy(m, v, &mut out);
    }
    Ok(out)
}

/// Index of the nearest design point; ties go to the lowest index.
pub fn nearest_index<T: Real>(design: &[Vec<T>], xi: &[T]) -> usize {
    let mut best = (0usize, T::infinity());
    for (i, p) in design.iter().enumerate() {
        let d = linalg::dist_sq(p, xi);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// `P_D({xi'_i})` for every design point.
pub fn design_masses<T: Real>(
    dist: &DataDistribution<T>,
    design: &OracleSample<T>,
) -> Result<Vec<T>> {
    check_dim(dist.dim(), design.dim())?;
    Ok(match dist {
        DataDistribution::Discrete(d) => design.points().iter().map(|p| d.mass_of(p)).collect(),
        DataDistribution::Gaussian(_) => vec![T::zero(); design.len()],
    })
}

/// Mass of each design point's Voronoi cell: exact on discrete laws, Monte
/// Carlo with [`VORONOI_DRAWS`] draws otherwise.
pub fn voronoi_masses<T: Real>(
    dist: &DataDistribution<T>,
    design: &OracleSample<T>,
    seed: Seed,
) -> Result<Vec<T>> {
    check_dim(dist.dim(), design.dim())?;
    let pts = design.points();
    let mut masses = vec![T::zero(); pts.len()];
    match dist {
        DataDistribution::Discrete(d) => {
            for (a, &w) in d.atoms().iter().zip(d.weights()) {
                let i = nearest_index(pts, a);
                masses[i] = masses[i] + w;
            }
        }
        DataDistribution::Gaussian(g) => {
            let mut counts = vec![0usize; pts.len()];
            let mut rng = seed.rng();
            for _ in 0..VORONOI_DRAWS {
                counts[nearest_index(pts, &g.sample(&mut rng))] += 1;
            }
            let n = T::count(VORONOI_DRAWS);
            for (m, c) in masses.iter_mut().zip(counts) {
                *m = T::count(c) / n;
            }
        }
    }
    Ok(masses)
}

/// `E_D[min_i ||xi - xi'_i||]` on a discrete law.
pub fn mean_min_distance<T: Real>(
    dist: &DiscreteDistribution<T>,
    design: &OracleSample<T>,
) -> Result<T> {
    check_dim(dist.dim(), design.dim())?;
    let pts = design.points();
    Ok(dist.expectation_scalar(|a| linalg::dist(a, &pts[nearest_index(pts, a)])))
}

/// `2B 1{xi not in design} e_1`: a `Bnd` field invisible to the oracle on the design.
pub fn fd_bnd_worst_field<T: Real>(
    bound: T,
    design: &OracleSample<T>,
    output_dim: usize,
) -> GradientField<T> {
    let pts = design.points().to_vec();
    GradientField::from_fn(
        FunctionClass::bnd(bound),
        design.dim(),
        output_dim,
        move |xi| {
            let mut v = vec![T::zero(); output_dim];
            if !pts.iter().any(|p| p.as_slice() == xi) {
                v[0] = T::lit(2.0) * bound;
            }
            v
        },
    )
}

/// `B min_i ||xi - xi'_i|| e_1`: a `Lip` field vanishing on the design.
pub fn fd_lip_worst_field<T: Real>(
    bound: T,
    design: &OracleSample<T>,
    output_dim: usize,
) -> GradientField<T> {
    let pts = design.points().to_vec();
    GradientField::from_fn(
        FunctionClass::lip(bound),
        design.dim(),
        output_dim,
        move |xi| {
            let mut v = vec![T::zero(); output_dim];
            v[0] = bound * linalg::dist(xi, &pts[nearest_index(&pts, xi)]);
            v
        },
    )
}
