//! Total variation, Kullback-Leibler and Le Cam's distance between finite laws.

use serde::{Deserialize, Serialize};

use crate::problems::DiscreteDistribution;
use crate::scalar::{Field, Real};

/// Masses of `p` and `q` on the union of their supports (atoms of `p` first).
pub fn aligned_masses<T: Real>(
    p: &DiscreteDistribution<T>,
    q: &DiscreteDistribution<T>,
) -> (Vec<Vec<T>>, Vec<T>, Vec<T>) {
    let mut atoms: Vec<Vec<T>> = p.atoms().to_vec();
    let mut pm: Vec<T> = p.weights().to_vec();
    let mut qm = vec![T::zero(); atoms.len()];
    for (a, &w) in q.atoms().iter().zip(q.weights()) {
        match p.index_of(a) {
            Some(i) => qm[i] = w,
            None => {
                atoms.push(a.clone());
                pm.push(T::zero());
                qm.push(w);
            }
        }
    }
    (atoms, pm, qm)
}

fn half<F: Field>(x: F) -> F {
    x / (F::one() + F::one())
}

/// `1/2 sum |p_i - q_i|` over aligned mass vectors.
pub fn total_variation<F: Field>(p: &[F], q: &[F]) -> F {
    assert_eq!(p.len(), q.len(), "mass vectors must be aligned");
    half(
        p.iter()
            .zip(q)
            .fold(F::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs()),
    )
}

/// `1/2 sum (p_i - q_i)^2 / (p_i + q_i)`, with `0/0 = 0`.
pub fn lecam_distance<F: Field>(p: &[F], q: &[F]) -> F {
    assert_eq!(p.len(), q.len(), "mass vectors must be aligned");
    half(p.iter().zip(q).fold(F::zero(), |acc, (a, b)| {
        let s = a.clone() + b.clone();
        if s.is_zero() {
            acc
        } else {
            let d = a.clone() - b.clone();
            acc + d.clone() * d / s
        }
    }))
}

/// `sum p_i ln(p_i / q_i)`, with `0 ln 0 = 0` and `+inf` when `p_i > 0 = q_i`.
pub fn kl_divergence<T: Real>(p: &[T], q: &[T]) -> T {
    assert_eq!(p.len(), q.len(), "mass vectors must be aligned");
    let mut acc = T::zero();
    for (&a, &b) in p.iter().zip(q) {
        if a == T::zero() {
            continue;
        }
        if b == T::zero() {
            return T::infinity();
        }
        acc = acc + a * (a / b).ln();
    }
    // Rounding can leave a tiny negative sum for near-identical laws.
    acc.max(T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergences<T> {
    pub tv: T,
    /// May be `+inf`; serialised as `null` in JSON.
    pub kl: T,
    pub lecam: T,
}

pub fn divergences<T: Real>(
    p: &DiscreteDistribution<T>,
    q: &DiscreteDistribution<T>,
) -> Divergences<T> {
    let (_, pm, qm) = aligned_masses(p, q);
    Divergences {
        tv: total_variation(&pm, &qm),
        kl: kl_divergence(&pm, &qm),
        lecam: lecam_distance(&pm, &qm),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_laws_are_at_distance_zero() {
        let p = DiscreteDistribution::new(vec![vec![0.0], vec![1.0]], vec![0.3, 0.7]).unwrap();
        let d = divergences(&p, &p);
        assert_eq!((d.tv, d.kl, d.lecam), (0.0, 0.0, 0.0));
    }

    #[test]
    fn disjoint_supports() {
        let p = DiscreteDistribution::<f64>::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        let q = DiscreteDistribution::uniform(vec![vec![2.0], vec![3.0]]).unwrap();
        let d = divergences(&p, &q);
        assert_eq!(d.tv, 1.0);
        assert_eq!(d.lecam, 1.0);
        assert!(d.kl.is_infinite());
    }

    #[test]
    fn hand_computed_pair() {
        // p = (1/2, 1/2), q = (1/4, 3/4)
        let p = [0.5f64, 0.5];
        let q = [0.25, 0.75];
        assert!((total_variation(&p, &q) - 0.25).abs() < 1e-15);
        // 1/2 * (1/16 / (3/4) + 1/16 / (5/4)) = 1/2 * (1/12 + 1/20) = 1/15
        assert!((lecam_distance(&p, &q) - 1.0 / 15.0).abs() < 1e-15);
        let kl = 0.5 * (2.0f64).ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!((kl_divergence(&p, &q) - kl).abs() < 1e-15);
    }

    #[test]
    fn aligned_masses_merge_common_atoms() {
        let p = DiscreteDistribution::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        let q = DiscreteDistribution::uniform(vec![vec![1.0], vec![2.0]]).unwrap();
        let (atoms, pm, qm) = aligned_masses(&p, &q);
        assert_eq!(atoms, vec![vec![0.0], vec![1.0], vec![2.0]]);
        assert_eq!(pm, vec![0.5, 0.5, 0.0]);
        assert_eq!(qm, vec![0.0, 0.5, 0.5]);
    }
}
