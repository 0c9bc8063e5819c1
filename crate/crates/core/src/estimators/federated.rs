//! Choice of federated aggregation weights `q`.

use crate::bounds::signed_ipm;
use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::problems::{
    sup_variance, DataDistribution, DiscreteDistribution, FunctionClass, GradientField,
};
use crate::scalar::Real;

const GRID_POINTS: usize = 21;
const GRID_LO: f64 = -1.0;
const GRID_HI: f64 = 2.0;
const REFINE_TOL: f64 = 1e-6;
const MAX_GRID_EVALS: usize = 200_000;

/// Value of `d_G(D, D_q)^2 + sum_i q_i^2 SV(D_i) / n_i` and its two parts.
#[derive(Debug, Clone, PartialEq)]
pub struct FlObjective<T> {
    pub bias_sq: T,
    pub variance: T,
    pub total: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlWeights<T> {
    pub q: Vec<T>,
    pub objective: FlObjective<T>,
}

/// Union support of the target and local laws with each law's masses on it.
fn union_masses<T: Real>(
    target: &DiscreteDistribution<T>,
    locals: &[(DiscreteDistribution<T>, usize)],
) -> (Vec<Vec<T>>, Vec<T>, Vec<Vec<T>>) {
    let mut atoms: Vec<Vec<T>> = target.atoms().to_vec();
    for (d, _) in locals {
        for a in d.atoms() {
            if !atoms.contains(a) {
                atoms.push(a.clone());
            }
        }
    }
    let on = |d: &DiscreteDistribution<T>| atoms.iter().map(|a| d.mass_of(a)).collect::<Vec<T>>();
    let p = on(target);
    let ps = locals.iter().map(|(d, _)| on(d)).collect();
    (atoms, p, ps)
}

/// Federated objective at weights `q`.
pub fn fl_objective<T: Real>(
    class: &FunctionClass<T>,
    target: &DiscreteDistribution<T>,
    locals: &[(DiscreteDistribution<T>, usize)],
    q: &[T],
) -> Result<FlObjective<T>> {
    check_dim(locals.len(), q.len())?;
    let (atoms, p, ps) = union_masses(target, locals);
    objective_on(class, &atoms, &p, &ps, &local_sv(class, locals), locals, q)
}

fn local_sv<T: Real>(
    class: &FunctionClass<T>,
    locals: &[(DiscreteDistribution<T>, usize)],
) -> Vec<T> {
    locals
        .iter()
        .map(|(d, _)| sup_variance(class, &DataDistribution::Discrete(d.clone())))
        .collect()
}

fn objective_on<T: Real>(
    class: &FunctionClass<T>,
    atoms: &[Vec<T>],
    p: &[T],
    ps: &[Vec<T>],
    sv: &[T],
    locals: &[(DiscreteDistribution<T>, usize)],
    q: &[T],
) -> Result<FlObjective<T>> {
    let mut nu = p.to_vec();
    for (pi, &qi) in ps.iter().zip(q) {
        for (v, &m) in nu.iter_mut().zip(pi) {
            *v = *v - qi * m;
        }
    }
    let d = signed_ipm(class, atoms, &nu)?;
    let mut variance = T::zero();
    for ((&qi, &s), (_, n)) in q.iter().zip(sv).zip(locals) {
        if qi == T::zero() {
            continue;
        }
        variance = variance
            + if *n == 0 {
                T::infinity()
            } else {
                qi * qi * s / T::count(*n)
            };
    }
    let bias_sq = d * d;
    Ok(FlObjective {
        bias_sq,
        variance,
        total: bias_sq + variance,
    })
}

/// Minimises the federated objective over `q`.
///
/// Every class here is shift-invariant, so `d_G(D, D_q)` is finite only when
/// `sum_i q_i = 1`; the search runs on that hyperplane. Agents with no samples
/// are pinned to `q_i = 0`. A grid of 21 points per free coordinate on
/// `[-1, 2]` is followed by coordinate descent down to a step of `1e-6`,
/// started from the best of the grid and the natural candidates (unit
/// vectors, uniform and budget-proportional weights).
pub fn optimal_fl_weights<T: Real>(
    class: &FunctionClass<T>,
    target: &DiscreteDistribution<T>,
    locals: &[(DiscreteDistribution<T>, usize)],
) -> Result<FlWeights<T>> {
    if locals.is_empty() {
        return Err(Error::Empty("federated setup needs at least one agent"));
    }
    for (d, _) in locals {
        check_dim(target.dim(), d.dim())?;
    }
    let active: Vec<usize> = (0..locals.len()).filter(|&i| locals[i].1 > 0).collect();
    if active.is_empty() {
        return Err(Error::invalid("at least one agent needs a positive budget"));
    }
    let (atoms, p, ps) = union_masses(target, locals);
    let sv = local_sv(class, locals);
    let m = active.len();
    // Free coordinates are the first m - 1 active agents.
    let expand = |free: &[T]| -> Vec<T> {
        let mut q = vec![T::zero(); locals.len()];
        let mut rest = T::one();
        for (k, &i) in active[..m - 1].iter().enumerate() {
            q[i] = free[k];
            rest = rest - free[k];
        }
        q[active[m - 1]] = rest;
        q
    };
    let eval = |free: &[T]| -> Result<T> {
        Ok(objective_on(class, &atoms, &p, &ps, &sv, locals, &expand(free))?.total)
    };

    let mut candidates: Vec<Vec<T>> = Vec::new();
    for k in 0..m {
        let mut e = vec![T::zero(); m - 1];
        if k < m - 1 {
            e[k] = T::one();
        }
        candidates.push(e);
    }
    candidates.push(vec![T::one() / T::count(m); m - 1]);
    let budget: usize = active.iter().map(|&i| locals[i].1).sum();
    candidates.push(
        active[..m - 1]
            .iter()
            .map(|&i| T::count(locals[i].1) / T::count(budget))
            .collect(),
    );
    let grid_evals = GRID_POINTS
        .checked_pow((m - 1) as u32)
        .filter(|&g| g <= MAX_GRID_EVALS);
    if let Some(total) = grid_evals {
        let step = T::lit((GRID_HI - GRID_LO) / (GRID_POINTS - 1) as f64);
        for mut idx in 0..total {
            let mut free = Vec::with_capacity(m - 1);
            for _ in 0..m - 1 {
                free.push(T::lit(GRID_LO) + T::count(idx % GRID_POINTS) * step);
                idx /= GRID_POINTS;
            }
            candidates.push(free);
        }
    }
    let mut best = (candidates[0].clone(), eval(&candidates[0])?);
    for c in &candidates[1..] {
        let v = eval(c)?;
        if v < best.1 {
            best = (c.clone(), v);
        }
    }

    let (mut x, mut fx) = best;
    let mut h = T::lit((GRID_HI - GRID_LO) / (GRID_POINTS - 1) as f64 / 2.0);
    while h >= T::lit(REFINE_TOL) && m > 1 {
        let mut improved = false;
        for k in 0..m - 1 {
            for dir in [T::one(), -T::one()] {
                let mut y = x.clone();
                y[k] = y[k] + dir * h;
                let fy = eval(&y)?;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            h = h / T::lit(2.0);
        }
    }
    let q = expand(&x);
    let objective = objective_on(class, &atoms, &p, &ps, &sv, locals, &q)?;
    Ok(FlWeights { q, objective })
}

/// Exact mean squared error of the weighted mean for one field:
/// `||E_D g - sum_i q_i E_{D_i} g||^2 + sum_i q_i^2 var_{D_i}(g) / n_i`.
pub fn fl_field_risk<T: Real>(
    g: &GradientField<T>,
    target: &DiscreteDistribution<T>,
    locals: &[(DiscreteDistribution<T>, usize)],
    q: &[T],
) -> Result<T> {
    check_dim(locals.len(), q.len())?;
    let mut bias = target.expectation(|a| g.eval(a));
    let mut variance = T::zero();
    for ((d, n), &qi) in locals.iter().zip(q) {
        if qi == T::zero() {
            continue;
        }
        if *n == 0 {
            return Ok(T::infinity());
        }
        let m = d.expectation(|a| g.eval(a));
        linalg::axpy(-qi, &m, &mut bias);
        variance = variance + qi * qi * g.variance_on(d) / T::count(*n);
    }
    Ok(linalg::norm_sq(&bias) + variance)
}

/// The `+-B e_1` sign-pattern field on the union support with the largest
/// [`fl_field_risk`], found by enumeration (at most 20 atoms).
pub fn fl_worst_sign_field<T: Real>(
    bound: T,
    target: &DiscreteDistribution<T>,
    locals: &[(DiscreteDistribution<T>, usize)],
    q: &[T],
    output_dim: usize,
) -> Result<(GradientField<T>, T)> {
    let (atoms, _, _) = union_masses(target, locals);
    if atoms.len() > 20 {
        return Err(Error::Unsupported(format!(
            "sign-pattern search over {} atoms",
            atoms.len()
        )));
    }
    let support = DiscreteDistribution::uniform(atoms.clone())?;
    let k = atoms.len();
    let mut best: Option<(GradientField<T>, T)> = None;
    // Pattern and its negation give the same risk; fix the sign of atom 0.
    for mask in 0u32..(1u32 << (k - 1)) {
        let positive: Vec<usize> = std::iter::once(0)
            .chain((1..k).filter(|i| mask >> (i - 1) & 1 == 1))
            .collect();
        let g = GradientField::atom_split(bound, &support, &positive, output_dim)?;
        let r = fl_field_risk(&g, target, locals, q)?;
        if best.as_ref().is_none_or(|(_, b)| r > *b) {
            best = Some((g, r));
        }
    }
    Ok(best.expect("at least one pattern"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1() -> DiscreteDistribution<f64> {
        DiscreteDistribution::uniform((0..4).map(|i| vec![i as f64]).collect()).unwrap()
    }

    fn d2() -> DiscreteDistribution<f64> {
        DiscreteDistribution::uniform((2..6).map(|i| vec![i as f64]).collect()).unwrap()
    }

    #[test]
    fn single_agent_on_target_gets_weight_one() {
        let class = FunctionClass::bnd(1.0);
        let w = optimal_fl_weights(&class, &d1(), &[(d1(), 10)]).unwrap();
        assert!((w.q[0] - 1.0).abs() < 1e-3);
        assert!((w.objective.total - 0.1).abs() < 1e-9);
    }

    #[test]
    fn identical_agents_split_evenly() {
        let class = FunctionClass::bnd(1.0);
        let w = optimal_fl_weights(&class, &d1(), &[(d1(), 50), (d1(), 50)]).unwrap();
        assert!(
            (w.q[0] - 0.5).abs() < 1e-3 && (w.q[1] - 0.5).abs() < 1e-3,
            "{:?}",
            w.q
        );
    }

    #[test]
    fn shifted_agent_closed_form() {
        // bias = q_2^2, variance = q_1^2/10 + q_2^2/1000
        let class = FunctionClass::bnd(1.0);
        let locals = [(d1(), 10), (d2(), 1000)];
        let w = optimal_fl_weights(&class, &d1(), &locals).unwrap();
        let q2 = 0.1 / (1.0 + 0.001 + 0.1);
        assert!((w.q[1] - q2).abs() < 1e-5, "{:?}", w.q);
        let at = |q: [f64; 2]| fl_objective(&class, &d1(), &locals, &q).unwrap().total;
        assert!(w.objective.total <= at([1.0, 0.0]));
        assert!(w.objective.total <= at([0.0, 1.0]));
        assert!(w.objective.total <= at([0.5, 0.5]));
    }

    #[test]
    fn worst_sign_field_does_not_exceed_objective() {
        let class = FunctionClass::bnd(1.0);
        let locals = [(d1(), 10), (d2(), 1000)];
        let w = optimal_fl_weights(&class, &d1(), &locals).unwrap();
        let (_, r) = fl_worst_sign_field(1.0, &d1(), &locals, &w.q, 1).unwrap();
        assert!(r <= w.objective.total + 1e-12);
        assert!(r >= 0.9 * w.objective.total);
    }

    #[test]
    fn unpinned_empty_agent_is_skipped() {
        let class = FunctionClass::bnd(1.0);
        let w = optimal_fl_weights(&class, &d1(), &[(d1(), 10), (d2(), 0)]).unwrap();
        assert_eq!(w.q, vec![1.0, 0.0]);
    }
}
