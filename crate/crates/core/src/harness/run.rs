//! Seeded Monte Carlo replication of one configured scenario.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{EstimatorSpec, ExperimentConfig};
use super::rate::{fit_rate, RateFit};
use crate::bounds::{divergences, table1_bounds, BoundInputs, BoundReport};
use crate::error::{Error, Result};
use crate::estimators::{
    design_masses, fd_bnd_worst_field, fd_lip_worst_field, fl_objective, fl_worst_sign_field,
    mean_min_distance, optimal_fl_weights, voronoi_masses, Estimator,
};
use crate::optimizer::{minibatch_gd_warmup, noise_constant, OptimizerConfig};
use crate::oracles::{
    draw_fl, draw_rl, draw_sl, draw_tl, OracleSample, Scenario, Seed, ORACLE_STREAM,
};
use crate::problems::{
    half_mass_split, ClassKind, DataDistribution, DiscreteDistribution, FunctionClass,
    GradientField, QuadraticInstance,
};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "MMRISK_THREADS";

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub scenario: Scenario,
    pub n: usize,
    pub rep: usize,
    pub excess_risk: f64,
    pub samples_used: usize,
    pub warmup_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub n: usize,
    pub replications: usize,
    pub mean: f64,
    /// Standard error of `mean`; zero for a single replication.
    pub std_err: f64,
    pub bounds: Option<BoundReport<f64>>,
    /// `mean + 2 SE <= upper`, when an upper bound is known.
    pub upper_ok: Option<bool>,
    /// `mean - 2 SE >= lower`, when a lower bound is known.
    pub lower_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub scenario: Scenario,
    pub class: ClassKind,
    pub estimator: String,
    pub seed: u64,
    #[serde(skip)]
    pub records: Vec<RepRecord>,
    pub points: Vec<PointSummary>,
    /// Present when at least four grid points have positive means.
    pub rate: Option<RateFit>,
    pub passed: bool,
}

impl ExperimentResult {
    pub fn means(&self) -> Vec<(usize, f64)> {
        self.points.iter().map(|p| (p.n, p.mean)).collect()
    }
}

/// Worker count from [`THREADS_ENV`]; `None` leaves the choice to rayon.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&k| k > 0)
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        b = b.num_threads(k);
    }
    b.build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))
}

/// Everything derived from the configuration before the grid loop.
struct Prepared {
    class: FunctionClass<f64>,
    target: DataDistribution<f64>,
    source: Option<DataDistribution<f64>>,
    outliers: Option<DataDistribution<f64>>,
    eta: f64,
    agents: Vec<(DiscreteDistribution<f64>, f64)>,
    design: Option<OracleSample<f64>>,
}

/// What one grid point runs.
struct Setup {
    inst: QuadraticInstance<f64>,
    phi: Estimator<f64>,
    opt: OptimizerConfig<f64>,
    budgets: Vec<usize>,
    bounds: Option<BoundReport<f64>>,
}

fn discrete<'a>(
    d: &'a DataDistribution<f64>,
    field: &str,
) -> Result<&'a DiscreteDistribution<f64>> {
    d.as_discrete()
        .ok_or_else(|| Error::config(field, "a discrete distribution is required here"))
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let class = cfg.class.build()?;
    let target: DataDistribution<f64> = cfg.target.build()?;
    let build = |spec: &Option<crate::problems::DistributionSpec>,
                 field: &str|
     -> Result<Option<DataDistribution<f64>>> {
        spec.as_ref()
            .map(|s| {
                let d: DataDistribution<f64> = s.build()?;
                if d.dim() != target.dim() {
                    return Err(Error::config(field, "dimension differs from the target"));
                }
                Ok(d)
            })
            .transpose()
    };
    let source = build(&cfg.source, "source")?;
    let outliers = build(&cfg.outliers, "outliers")?;
    let mut agents = Vec::new();
    for a in cfg.agents.iter().flatten() {
        let d: DataDistribution<f64> = a.distribution.build()?;
        let d = discrete(&d, "agents.distribution")?.clone();
        if d.dim() != target.dim() {
            return Err(Error::config(
                "agents.distribution",
                "dimension differs from the target",
            ));
        }
        agents.push((d, a.share));
    }
    if cfg.scenario == Scenario::FL {
        discrete(&target, "target")?;
        if !matches!(
            cfg.optimizer.schedule,
            crate::optimizer::Schedule::SingleOracle { .. }
        ) {
            return Err(Error::config(
                "optimizer.schedule",
                "federated samples are grouped by agent; use SingleOracle",
            ));
        }
    }
    let design = cfg.design.as_ref().map(|d| d.build::<f64>()).transpose()?;
    if let Some(d) = &design {
        if d.dim() != target.dim() {
            return Err(Error::config("design", "dimension differs from the target"));
        }
    }
    if class.kind != ClassKind::Bnd
        && cfg.scenario != Scenario::FD
        && cfg.instance.dim != target.dim()
    {
        return Err(Error::config(
            "instance.dim",
            "Lip and Aff runs use the scaled identity field; dim must equal the data dimension",
        ));
    }
    Ok(Prepared {
        class,
        target,
        source,
        outliers,
        eta: cfg.eta.unwrap_or(0.0),
        agents,
        design,
    })
}

/// Largest-remainder split of `n` by relative shares.
pub fn split_budget(n: usize, shares: &[f64]) -> Vec<usize> {
    let total: f64 = shares.iter().sum();
    let exact: Vec<f64> = shares.iter().map(|s| n as f64 * s / total).collect();
    let mut out: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut left = n - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    for i in order {
        if left == 0 {
            break;
        }
        if shares[i] > 0.0 {
            out[i] += 1;
            left -= 1;
        }
    }
    out
}

/// Masses of `laws` on the union of their supports (first law's atoms first).
fn union_support(laws: &[(&DiscreteDistribution<f64>, f64)]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut atoms: Vec<Vec<f64>> = Vec::new();
    for (d, _) in laws {
        for a in d.atoms() {
            if !atoms.contains(a) {
                atoms.push(a.clone());
            }
        }
    }
    let masses = laws
        .iter()
        .map(|(d, _)| atoms.iter().map(|a| d.mass_of(a)).collect())
        .collect();
    (atoms, masses)
}

/// The `+-B e_1` sign pattern maximising `bias^2 + var / n` of the plain mean,
/// where the data come from `oracle` (a mixture of discrete laws) and the
/// target is `target`. Falls back to the target's half-mass split beyond 20 atoms.
fn worst_sign_field(
    bound: f64,
    target: &DiscreteDistribution<f64>,
    oracle: &[(&DiscreteDistribution<f64>, f64)],
    n: usize,
    dim: usize,
) -> Result<GradientField<f64>> {
    let mut laws = vec![(target, 1.0)];
    laws.extend_from_slice(oracle);
    let (atoms, masses) = union_support(&laws);
    let support = DiscreteDistribution::uniform(atoms.clone())?;
    let k = atoms.len();
    if k > 20 {
        let (split, _) = half_mass_split(target);
        let marked: Vec<usize> = split
            .iter()
            .filter_map(|&i| support.index_of(&target.atoms()[i]))
            .collect();
        return GradientField::atom_split(bound, &support, &marked, dim);
    }
    let p = &masses[0];
    let q: Vec<f64> = (0..k)
        .map(|j| {
            oracle
                .iter()
                .zip(&masses[1..])
                .map(|((_, w), m)| w * m[j])
                .sum()
        })
        .collect();
    let b2 = bound * bound;
    let mut best = (0u32, f64::NEG_INFINITY);
    for mask in 0u32..(1u32 << (k - 1)) {
        let inside = |j: usize| j == 0 || mask >> (j - 1) & 1 == 1;
        let pa: f64 = (0..k).filter(|&j| inside(j)).map(|j| p[j]).sum();
        let qa: f64 = (0..k).filter(|&j| inside(j)).map(|j| q[j]).sum();
        let risk = 4.0 * b2 * (pa - qa).powi(2) + 4.0 * b2 * qa * (1.0 - qa) / n as f64;
        if risk > best.1 {
            best = (mask, risk);
        }
    }
    let positive: Vec<usize> = (0..k)
        .filter(|&j| j == 0 || best.0 >> (j - 1) & 1 == 1)
        .collect();
    GradientField::atom_split(bound, &support, &positive, dim)
}

fn build_estimator(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    locals: &[(DiscreteDistribution<f64>, usize)],
) -> Result<(Estimator<f64>, Option<Vec<f64>>)> {
    Ok(match &cfg.estimator {
        EstimatorSpec::SampleMean => (Estimator::SampleMean, None),
        EstimatorSpec::TLMean => (Estimator::TLMean, None),
        EstimatorSpec::FLWeightedMean { weights } => {
            let q = match weights {
                Some(w) => w.clone(),
                None => {
                    optimal_fl_weights(&prep.class, discrete(&prep.target, "target")?, locals)?.q
                }
            };
            (Estimator::FLWeightedMean { weights: q.clone() }, Some(q))
        }
        EstimatorSpec::RobustFilterMean { filter } => (
            Estimator::RobustFilterMean {
                eta: prep.eta,
                config: *filter,
            },
            None,
        ),
        EstimatorSpec::FDBnd => {
            let design = prep.design.as_ref().expect("validated");
            (
                Estimator::FDBnd {
                    masses: design_masses(&prep.target, design)?,
                },
                None,
            )
        }
        EstimatorSpec::FDLip => {
            let design = prep.design.as_ref().expect("validated");
            (
                Estimator::FDLip {
                    voronoi: voronoi_masses(&prep.target, design, Seed::algorithm(cfg.seed))?,
                },
                None,
            )
        }
    })
}

fn worst_field(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    n: usize,
    locals: &[(DiscreteDistribution<f64>, usize)],
    q: Option<&[f64]>,
) -> Result<GradientField<f64>> {
    let b = prep.class.bound;
    let dim = cfg.instance.dim;
    let data_dim = prep.target.dim();
    if cfg.scenario == Scenario::FD {
        let design = prep.design.as_ref().expect("validated");
        return Ok(match prep.class.kind {
            ClassKind::Bnd => fd_bnd_worst_field(b, design, dim),
            _ => fd_lip_worst_field(b, design, dim),
        });
    }
    if prep.class.kind != ClassKind::Bnd {
        return Ok(GradientField::scaled_identity(data_dim, b));
    }
    if cfg.scenario == Scenario::FL {
        let target = discrete(&prep.target, "target")?;
        let q = q.map(<[f64]>::to_vec).unwrap_or_else(|| {
            let total = n as f64;
            locals.iter().map(|(_, k)| *k as f64 / total).collect()
        });
        return Ok(fl_worst_sign_field(b, target, locals, &q, dim)?.0);
    }
    let Some(target) = prep.target.as_discrete() else {
        let m0 = prep.target.mean()[0];
        return Ok(GradientField::sign_split(b, data_dim, dim, move |xi| {
            xi[0] >= m0
        }));
    };
    let oracle: Vec<(&DiscreteDistribution<f64>, f64)> = match cfg.scenario {
        Scenario::SL => vec![(target, 1.0)],
        Scenario::TL => vec![(
            discrete(prep.source.as_ref().expect("validated"), "source")?,
            1.0,
        )],
        Scenario::RL => vec![
            (target, 1.0 - prep.eta),
            (
                discrete(prep.outliers.as_ref().expect("validated"), "outliers")?,
                prep.eta,
            ),
        ],
        Scenario::FL | Scenario::FD => unreachable!("handled above"),
    };
    worst_sign_field(b, target, &oracle, n, dim)
}

fn attach_bounds(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    n: usize,
    kappa: f64,
    locals: &[(DiscreteDistribution<f64>, usize)],
    q: Option<&[f64]>,
) -> Option<BoundReport<f64>> {
    let mut inp = BoundInputs::new(prep.class.bound, cfg.instance.mu, kappa);
    inp.n = Some(n);
    match cfg.scenario {
        Scenario::TL => {
            let (p, s) = (
                prep.target.as_discrete()?,
                prep.source.as_ref()?.as_discrete()?,
            );
            inp.tv = Some(divergences(p, s).tv);
        }
        Scenario::RL => {
            inp.eta = Some(prep.eta);
            inp.var_xi = Some(prep.target.variance());
        }
        Scenario::FL => {
            let obj = fl_objective(&prep.class, prep.target.as_discrete()?, locals, q?).ok()?;
            inp.fl_bias_sq = Some(obj.bias_sq);
            inp.fl_variance = Some(obj.variance);
        }
        Scenario::FD => {
            let design = prep.design.as_ref()?;
            inp.design_mass = design_masses(&prep.target, design)
                .ok()
                .map(|m| m.iter().sum());
            inp.mean_min_dist = prep
                .target
                .as_discrete()
                .and_then(|d| mean_min_distance(d, design).ok());
        }
        Scenario::SL => {}
    }
    table1_bounds(cfg.scenario, &prep.class, &inp).ok()
}

fn setup(cfg: &ExperimentConfig, prep: &Prepared, n: usize) -> Result<Setup> {
    let shares: Vec<f64> = prep.agents.iter().map(|(_, s)| *s).collect();
    let budgets = if cfg.scenario == Scenario::FL {
        split_budget(n, &shares)
    } else {
        Vec::new()
    };
    let locals: Vec<(DiscreteDistribution<f64>, usize)> = prep
        .agents
        .iter()
        .zip(&budgets)
        .map(|((d, _), &k)| (d.clone(), k))
        .collect();
    let (phi, q) = build_estimator(cfg, prep, &locals)?;
    let field = worst_field(cfg, prep, n, &locals, q.as_deref())?;
    let inst = QuadraticInstance::new(field, cfg.instance.mu, cfg.instance.smoothness)?;
    let noise = cfg
        .optimizer
        .noise_sq
        .unwrap_or_else(|| noise_constant(&prep.class, &prep.target));
    let mut opt = OptimizerConfig::new(cfg.optimizer.schedule, noise);
    opt.epsilon = cfg.optimizer.epsilon;
    opt.budget = Some(n);
    let bounds = attach_bounds(cfg, prep, n, inst.kappa(), &locals, q.as_deref());
    Ok(Setup {
        inst,
        phi,
        opt,
        budgets,
        bounds,
    })
}

fn draw(
    cfg: &ExperimentConfig,
    prep: &Prepared,
    s: &Setup,
    n: usize,
    seed: Seed,
) -> Result<OracleSample<f64>> {
    match cfg.scenario {
        Scenario::SL => draw_sl(&prep.target, n, seed),
        Scenario::TL => draw_tl(prep.source.as_ref().expect("validated"), n, seed),
        Scenario::RL => draw_rl(
            &prep.target,
            prep.outliers.as_ref().expect("validated"),
            prep.eta,
            n,
            seed,
        ),
        Scenario::FL => {
            let locals: Vec<(DataDistribution<f64>, usize)> = prep
                .agents
                .iter()
                .zip(&s.budgets)
                .map(|((d, _), &k)| (d.clone().into(), k))
                .collect();
            draw_fl(&locals, seed)
        }
        Scenario::FD => Ok(prep.design.clone().expect("validated")),
    }
}

/// Oracle seed of replication `rep` at budget `n`.
pub fn replication_seed(master: u64, n: usize, rep: usize) -> Seed {
    Seed::for_replication(master, rep as u64, ORACLE_STREAM).child(n as u64)
}

fn summarise(n: usize, risks: &[f64], bounds: Option<BoundReport<f64>>) -> PointSummary {
    let r = risks.len();
    let mean = risks.iter().sum::<f64>() / r as f64;
    let std_err = if r > 1 {
        let var = risks.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
        (var / r as f64).sqrt()
    } else {
        0.0
    };
    let upper_ok = bounds
        .as_ref()
        .and_then(|b| b.upper)
        .map(|u| mean + 2.0 * std_err <= u);
    let lower_ok = bounds
        .as_ref()
        .and_then(|b| b.lower)
        .map(|l| mean - 2.0 * std_err >= l);
    PointSummary {
        n,
        replications: r,
        mean,
        std_err,
        bounds,
        upper_ok,
        lower_ok,
    }
}

/// Runs every `(n, replication)` pair of the configuration.
///
/// Replications run in parallel on at most [`THREADS_ENV`] threads; each one
/// derives its own seed, and results are merged in replication order, so the
/// output does not depend on the thread count.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_scenario_with_threads(cfg, thread_cap())
}

/// As [`run_scenario`] with an explicit worker count.
pub fn run_scenario_with_threads(
    cfg: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let prep = prepare(cfg)?;
    let grid = if cfg.scenario == Scenario::FD {
        vec![prep.design.as_ref().expect("validated").len()]
    } else {
        cfg.n_grid.clone()
    };
    let pool = pool(threads)?;
    let mut records = Vec::new();
    let mut points = Vec::new();
    let mut estimator = String::new();
    for &n in &grid {
        let s = setup(cfg, &prep, n)?;
        estimator = s.phi.name().to_string();
        let reps: Vec<RepRecord> = pool.install(|| {
            (0..cfg.replications)
                .into_par_iter()
                .map(|rep| {
                    let sample = draw(cfg, &prep, &s, n, replication_seed(cfg.seed, n, rep))?;
                    let t = minibatch_gd_warmup(&s.inst, &prep.target, &sample, &s.phi, &s.opt)?;
                    Ok(RepRecord {
                        scenario: cfg.scenario,
                        n,
                        rep,
                        excess_risk: t.final_excess(),
                        samples_used: t.samples_used,
                        warmup_steps: t.warmup_steps,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let risks: Vec<f64> = reps.iter().map(|r| r.excess_risk).collect();
        points.push(summarise(n, &risks, s.bounds));
        records.extend(reps);
    }
    let means: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.mean)).collect();
    let rate = fit_rate(&means).ok();
    let passed = points
        .iter()
        .all(|p| p.upper_ok.unwrap_or(true) && p.lower_ok.unwrap_or(true));
    Ok(ExperimentResult {
        scenario: cfg.scenario,
        class: prep.class.kind,
        estimator,
        seed: cfg.seed,
        records,
        points,
        rate,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_split_sums_to_n() {
        assert_eq!(split_budget(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(split_budget(7, &[0.0, 1.0]), vec![0, 7]);
        assert_eq!(split_budget(1010, &[10.0, 1000.0]), vec![10, 1000]);
    }

    #[test]
    fn seeds_differ_across_grid_and_reps() {
        let a = replication_seed(1, 16, 0);
        assert_ne!(a, replication_seed(1, 32, 0));
        assert_ne!(a, replication_seed(1, 16, 1));
        assert_eq!(a, replication_seed(1, 16, 0));
    }

    #[test]
    fn sign_search_recovers_half_split_without_shift() {
        let d = DiscreteDistribution::uniform(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]])
            .unwrap();
        let g = worst_sign_field(1.0, &d, &[(&d, 1.0)], 10, 1).unwrap();
        let dd: DataDistribution<f64> = d.into();
        assert!(g.expectation(&dd).unwrap()[0].abs() < 1e-15);
    }
}
