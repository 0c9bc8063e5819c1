//! Two-point (Le Cam) lower bounds and the Beta-prior Bayes risk.

use super::divergence::{aligned_masses, lecam_distance};
use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::oracles::{observe, OracleSample};
use crate::problems::{DataDistribution, DiscreteDistribution, GradientField};
use crate::scalar::Real;

/// Bayes risk of estimating `E g = (2P - 1) B e_1` from `n` two-point
/// observations under `P ~ Beta(a, b)`:
/// `4 B^2 a b / ((a + b)(1 + a + b)(n + a + b))`.
pub fn bayes_risk_closed_form<T: Real>(a: T, b: T, n: usize, bound: T) -> Result<T> {
    if !(a > T::zero() && b > T::zero()) {
        return Err(Error::invalid(format!(
            "prior parameters must be positive, got ({a}, {b})"
        )));
    }
    let s = a + b;
    Ok(T::lit(4.0) * bound * bound * a * b / (s * (T::one() + s) * (T::count(n) + s)))
}

/// `(1 - d_LC(P_g, P_g')) / 4 * ||E_D g - E_D g'||^2`.
///
/// `law_g` and `law_gprime` are the laws of the full oracle output under `g`
/// and `g'`, each observation flattened into a single vector.
pub fn two_point_lower<T: Real>(
    g: &GradientField<T>,
    gprime: &GradientField<T>,
    law_g: &DiscreteDistribution<T>,
    law_gprime: &DiscreteDistribution<T>,
    dist: &DataDistribution<T>,
) -> Result<T> {
    check_dim(g.output_dim(), gprime.output_dim())?;
    check_dim(law_g.dim(), law_gprime.dim())?;
    let (_, pm, qm) = aligned_masses(law_g, law_gprime);
    let lc = lecam_distance(&pm, &qm);
    let gap = linalg::dist_sq(&g.expectation(dist)?, &gprime.expectation(dist)?);
    Ok((T::one() - lc) / T::lit(4.0) * gap)
}

const MAX_OUTCOMES: usize = 1_000_000;

/// Exact law of `(g(xi_1), ..., g(xi_n))` for `xi_i` iid from a discrete `dist`.
///
/// Outcomes with equal flattened values are merged. Errors when more than
/// `10^6` index tuples would have to be enumerated.
pub fn iid_observation_law<T: Real>(
    g: &GradientField<T>,
    dist: &DiscreteDistribution<T>,
    n: usize,
) -> Result<DiscreteDistribution<T>> {
    check_dim(g.input_dim(), dist.dim())?;
    let k = dist.len();
    let tuples = (0..n).try_fold(1usize, |acc, _| {
        acc.checked_mul(k).filter(|&v| v <= MAX_OUTCOMES)
    });
    if tuples.is_none() {
        return Err(Error::Unsupported(format!(
            "observation law with {k}^{n} outcomes is too large to enumerate"
        )));
    }
    if n == 0 {
        return Ok(DiscreteDistribution::point_mass(Vec::new()));
    }
    let values: Vec<Vec<T>> = dist.atoms().iter().map(|a| g.eval(a)).collect();
    let mut outcomes: Vec<Vec<T>> = Vec::new();
    let mut masses: Vec<T> = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let mass = idx.iter().fold(T::one(), |m, &i| m * dist.weights()[i]);
        if mass > T::zero() {
            let flat: Vec<T> = idx
                .iter()
                .flat_map(|&i| values[i].iter().copied())
                .collect();
            match outcomes.iter().position(|o| *o == flat) {
                Some(p) => masses[p] = masses[p] + mass,
                None => {
                    outcomes.push(flat);
                    masses.push(mass);
                }
            }
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return normalised(outcomes, masses);
            }
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Law of the oracle output on a fixed design: a point mass.
pub fn fixed_observation_law<T: Real>(
    g: &GradientField<T>,
    design: &OracleSample<T>,
) -> Result<DiscreteDistribution<T>> {
    let obs = observe(g, design)?;
    Ok(DiscreteDistribution::point_mass(obs.values.concat()))
}

fn normalised<T: Real>(outcomes: Vec<Vec<T>>, masses: Vec<T>) -> Result<DiscreteDistribution<T>> {
    let total: T = masses.iter().copied().sum();
    DiscreteDistribution::new(outcomes, masses.into_iter().map(|m| m / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::fixed_data;

    #[test]
    fn bayes_risk_at_root_n_prior() {
        let n = 4usize;
        let a = (n as f64).sqrt() / 2.0;
        let r = bayes_risk_closed_form(a, a, n, 1.0).unwrap();
        assert!((r - 1.0 / 9.0).abs() < 1e-15);
        assert!(bayes_risk_closed_form(0.0, 1.0, 3, 1.0).is_err());
    }

    #[test]
    fn identical_fields_give_zero() {
        let d = DiscreteDistribution::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        let g = GradientField::atom_split(1.0, &d, &[0], 1).unwrap();
        let law = iid_observation_law(&g, &d, 3).unwrap();
        let v = two_point_lower(&g, &g, &law, &law, &d.clone().into()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn iid_law_merges_equal_outcomes() {
        let d =
            DiscreteDistribution::<f64>::uniform(vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let g = GradientField::atom_split(1.0, &d, &[0], 1).unwrap();
        let law = iid_observation_law(&g, &d, 2).unwrap();
        assert_eq!(law.len(), 4);
        assert!((law.mass_of(&[-1.0, -1.0]) - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn invisible_fields_on_a_design() {
        // g and -g both vanish on the design, so the oracle cannot tell them apart.
        let d = DiscreteDistribution::uniform(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]])
            .unwrap();
        let design = fixed_data(vec![vec![0.0], vec![1.0]]).unwrap();
        let g = GradientField::from_fn(
            crate::problems::FunctionClass::bnd(1.0),
            1,
            1,
            |x: &[f64]| vec![if x[0] >= 2.0 { 1.0 } else { 0.0 }],
        );
        let h = g.negated();
        let lg = fixed_observation_law(&g, &design).unwrap();
        let lh = fixed_observation_law(&h, &design).unwrap();
        let v = two_point_lower(&g, &h, &lg, &lh, &d.into()).unwrap();
        // ||E g - E(-g)||^2 / 4 = (2 * 1/2)^2 / 4
        assert!((v - 0.25).abs() < 1e-15);
    }
}
