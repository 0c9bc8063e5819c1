use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::schedule::{batch_schedule, fixed_batch, warmup_length};
use crate::error::{check_dim, Error, Result};
use crate::estimators::Estimator;
use crate::linalg;
use crate::oracles::{observe_gradient_range, OracleSample};
use crate::problems::{
    sup_variance, ClassKind, DataDistribution, FunctionClass, Objective, QuadraticInstance,
};
use crate::scalar::Real;

/// How the sample budget is spent after the warmup phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum Schedule {
    /// Geometrically growing fresh batches.
    Exponential,
    /// A constant fresh batch, see [`fixed_batch`].
    FixedBatch { a: f64 },
    /// `steps` full-sample estimator steps, no warmup.
    SingleOracle { steps: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig<T> {
    pub schedule: Schedule,
    /// Warmup target precision.
    pub epsilon: T,
    /// A-priori bound on the single-observation estimation error, see [`noise_constant`].
    pub noise_sq: T,
    /// Budget `n`; the whole sample when `None`.
    pub budget: Option<usize>,
}

impl<T: Real> OptimizerConfig<T> {
    pub fn new(schedule: Schedule, noise_sq: T) -> Self {
        Self {
            schedule,
            epsilon: T::lit(1e-8),
            noise_sq,
            budget: None,
        }
    }
}

/// Class constant bounding `E ||g(xi) - E g||^2` for one observation:
/// `4B^2` for `Bnd`, `SV_D(G)` otherwise.
pub fn noise_constant<T: Real>(class: &FunctionClass<T>, dist: &DataDistribution<T>) -> T {
    match class.kind {
        ClassKind::Bnd => T::lit(4.0) * class.bound * class.bound,
        _ => sup_variance(class, dist),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    /// `x_0, ..., x_T`.
    pub iterates: Vec<Vec<T>>,
    /// Excess risk of each iterate.
    pub excess: Vec<T>,
    pub samples_used: usize,
    pub warmup_steps: usize,
    /// Sample index range read by each step (warmup steps included).
    pub batches: Vec<Range<usize>>,
}

impl<T: Real> Trajectory<T> {
    pub fn final_iterate(&self) -> &[T] {
        self.iterates.last().expect("trajectory holds x_0")
    }

    pub fn final_excess(&self) -> T {
        *self.excess.last().expect("trajectory holds x_0")
    }

    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }
}

/// `x_{t+1} = x_t - estimate(t, x_t) / L` for `steps` steps.
pub fn gradient_descent<T, O, F>(
    objective: &O,
    x0: Vec<T>,
    steps: usize,
    mut estimate: F,
) -> Result<Trajectory<T>>
where
    T: Real,
    O: Objective<T> + ?Sized,
    F: FnMut(usize, &[T]) -> Result<Vec<T>>,
{
    check_dim(objective.dim(), x0.len())?;
    let step = T::one() / objective.smoothness();
    let mut excess = vec![objective.excess(&x0)];
    let mut iterates = vec![x0];
    for t in 0..steps {
        let x = iterates.last().expect("nonempty");
        let g = estimate(t, x)?;
        check_dim(x.len(), g.len())?;
        let mut next = x.clone();
        linalg::axpy(-step, &g, &mut next);
        excess.push(objective.excess(&next));
        iterates.push(next);
    }
    Ok(Trajectory {
        iterates,
        excess,
        samples_used: 0,
        warmup_steps: 0,
        batches: Vec::new(),
    })
}

fn check_estimator<T: Real>(phi: &Estimator<T>, sample: &OracleSample<T>) -> Result<()> {
    if phi.supports(sample.scenario()) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "estimator {} does not apply to {} samples",
            phi.name(),
            sample.scenario()
        )))
    }
}

/// Estimator-GD from `x_0 = 0`: every step observes the whole frozen sample.
pub fn estimator_gd<T: Real>(
    inst: &QuadraticInstance<T>,
    dist: &DataDistribution<T>,
    sample: &OracleSample<T>,
    phi: &Estimator<T>,
    steps: usize,
) -> Result<Trajectory<T>> {
    estimator_gd_from(inst, dist, sample, phi, steps, vec![T::zero(); inst.dim()])
}

/// As [`estimator_gd`] from a given starting point.
pub fn estimator_gd_from<T: Real>(
    inst: &QuadraticInstance<T>,
    dist: &DataDistribution<T>,
    sample: &OracleSample<T>,
    phi: &Estimator<T>,
    steps: usize,
    x0: Vec<T>,
) -> Result<Trajectory<T>> {
    check_estimator(phi, sample)?;
    let pop = inst.population(dist)?;
    let all = 0..sample.len();
    let mut traj = gradient_descent(&pop, x0, steps, |_, x| {
        phi.estimate(&observe_gradient_range(inst, x, sample, all.clone())?)
    })?;
    traj.samples_used = sample.len();
    traj.batches = vec![all; steps];
    Ok(traj)
}

/// Minibatch GD with warmup.
///
/// Warmup runs `warmup_length` steps on the first point only. The main phase
/// then walks the schedule, each step reading a fresh, disjoint index range
/// that starts after the warmup point when warmup ran.
pub fn minibatch_gd_warmup<T: Real>(
    inst: &QuadraticInstance<T>,
    dist: &DataDistribution<T>,
    sample: &OracleSample<T>,
    phi: &Estimator<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<Trajectory<T>> {
    if let Schedule::SingleOracle { steps } = cfg.schedule {
        return estimator_gd(inst, dist, sample, phi, steps);
    }
    check_estimator(phi, sample)?;
    let n = cfg.budget.unwrap_or(sample.len());
    if sample.len() < n {
        return Err(Error::invalid(format!(
            "sample of {} points is below the budget {n}",
            sample.len()
        )));
    }
    let kappa = inst.kappa();
    let sizes = match cfg.schedule {
        Schedule::Exponential => batch_schedule(n, kappa.as_f64())?,
        Schedule::FixedBatch { a } => {
            let (b, t) = fixed_batch(n, kappa.as_f64(), a)?;
            vec![b; t]
        }
        Schedule::SingleOracle { .. } => unreachable!("handled above"),
    };
    let pop = inst.population(dist)?;
    let x0 = vec![T::zero(); inst.dim()];
    let first = phi.estimate(&observe_gradient_range(inst, &x0, sample, 0..1)?)?;
    let warmup = warmup_length(&first, cfg.noise_sq, cfg.epsilon, kappa, inst.mu())?;
    let offset = usize::from(warmup > 0);
    let mut ranges: Vec<Range<usize>> = vec![0..1; warmup];
    let mut start = offset;
    for &b in &sizes {
        ranges.push(start..start + b);
        start += b;
    }
    assert!(start <= n, "schedule exceeds the sample budget");
    let mut traj = gradient_descent(&pop, x0, ranges.len(), |t, x| {
        phi.estimate(&observe_gradient_range(inst, x, sample, ranges[t].clone())?)
    })?;
    traj.samples_used = start.max(offset);
    traj.warmup_steps = warmup;
    traj.batches = ranges;
    Ok(traj)
}
