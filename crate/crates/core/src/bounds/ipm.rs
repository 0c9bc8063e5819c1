//! Integral probability metrics `d_G(P, Q) = sup_g ||E_P g - E_Q g||`.

use super::divergence::{aligned_masses, total_variation};
use super::transport::solve_transport;
use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::problems::{mass_tolerance, ClassKind, DiscreteDistribution, FunctionClass};
use crate::scalar::Real;

/// `d_G(P, Q)`: `2B tv` for `Bnd`, `B W_1` for `Lip`, `B ||E_P xi - E_Q xi||` for `Aff`.
pub fn ipm<T: Real>(
    class: &FunctionClass<T>,
    p: &DiscreteDistribution<T>,
    q: &DiscreteDistribution<T>,
) -> Result<T> {
    check_dim(p.dim(), q.dim())?;
    let (atoms, pm, qm) = aligned_masses(p, q);
    match class.kind {
        ClassKind::Bnd => Ok(T::lit(2.0) * class.bound * total_variation(&pm, &qm)),
        _ => {
            let nu: Vec<T> = pm.iter().zip(&qm).map(|(&a, &b)| a - b).collect();
            signed_ipm(class, &atoms, &nu)
        }
    }
}

/// `sup_g ||sum_a nu_a g(a)||` for a finite signed measure `nu`.
///
/// Every class is closed under constant shifts, so the value is `+inf` unless
/// `nu` has zero total mass.
pub fn signed_ipm<T: Real>(class: &FunctionClass<T>, atoms: &[Vec<T>], nu: &[T]) -> Result<T> {
    if atoms.len() != nu.len() {
        return Err(Error::invalid("one signed mass per atom is required"));
    }
    let total: T = nu.iter().copied().sum();
    let scale = nu.iter().fold(T::one(), |s, v| s.max(v.abs()));
    if total.abs() > mass_tolerance::<T>(nu.len()) * scale {
        return Ok(if class.bound == T::zero() {
            T::zero()
        } else {
            T::infinity()
        });
    }
    let b = class.bound;
    Ok(match class.kind {
        // sup over g with ||g - c|| <= B of ||sum nu_a g(a)||: put +B e on the
        // positive part and -B e on the negative part.
        ClassKind::Bnd => b * nu.iter().map(|v| v.abs()).sum::<T>(),
        ClassKind::Lip => {
            let pos: Vec<T> = nu.iter().map(|&v| v.max(T::zero())).collect();
            let neg: Vec<T> = nu.iter().map(|&v| (-v).max(T::zero())).collect();
            let plan = solve_transport(&pos, &neg, |i, j| linalg::dist(&atoms[i], &atoms[j]))?;
            b * plan.cost
        }
        ClassKind::Aff => {
            let dim = atoms.first().map_or(0, Vec::len);
            let mut m = vec![T::zero(); dim];
            for (a, &v) in atoms.iter().zip(nu) {
                linalg::axpy(v, a, &mut m);
            }
            b * linalg::norm(&m)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(x: Vec<f64>) -> DiscreteDistribution<f64> {
        DiscreteDistribution::point_mass(x)
    }

    #[test]
    fn equal_laws_have_zero_ipm() {
        let p = DiscreteDistribution::<f64>::uniform(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        for class in [
            FunctionClass::bnd(1.0),
            FunctionClass::lip(1.0),
            FunctionClass::aff(1.0),
        ] {
            assert!(ipm(&class, &p, &p).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn affine_is_mean_gap() {
        let d = ipm(
            &FunctionClass::aff(1.0),
            &pm(vec![0.0, 0.0]),
            &pm(vec![3.0, 4.0]),
        )
        .unwrap();
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_point_masses() {
        let d = ipm(&FunctionClass::lip(1.0), &pm(vec![0.0]), &pm(vec![2.0])).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bounded_is_twice_tv() {
        let p =
            DiscreteDistribution::<f64>::new(vec![vec![0.0], vec![1.0]], vec![0.2, 0.8]).unwrap();
        let q = DiscreteDistribution::new(vec![vec![0.0], vec![1.0]], vec![0.5, 0.5]).unwrap();
        let d = ipm(&FunctionClass::bnd(1.5), &p, &q).unwrap();
        assert!((d - 2.0 * 1.5 * 0.3).abs() < 1e-12);
    }

    #[test]
    fn unbalanced_signed_measure_is_infinite() {
        let atoms = vec![vec![0.0f64], vec![1.0]];
        let v = signed_ipm(&FunctionClass::bnd(1.0), &atoms, &[0.5, 0.0]).unwrap();
        assert!(v.is_infinite());
        let z = signed_ipm(&FunctionClass::bnd(0.0), &atoms, &[0.5, 0.0]).unwrap();
        assert_eq!(z, 0.0);
    }
}
