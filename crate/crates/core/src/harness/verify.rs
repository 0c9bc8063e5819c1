//! Named property and acceptance suites with machine-readable reports.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::config::{
    ClassSpec, EstimatorSpec, ExperimentConfig, InstanceSpec, OptimizerSpec, SCHEMA_VERSION,
};
use super::run::run_scenario;
use crate::bounds::{bayes_risk_closed_form, divergences};
use crate::error::{Error, Result};
use crate::estimators::{
    design_masses, fd_bnd_worst_field, fd_lip_worst_field, fl_objective, fl_weighted_mean,
    fl_worst_sign_field, mean_min_distance, optimal_fl_weights, robust_filter_mean, sample_mean,
    voronoi_masses, BetaPrior, Estimator, FilterConfig,
};
use crate::linalg;
use crate::optimizer::{batch_schedule, estimator_gd, gradient_descent, Schedule};
use crate::oracles::{draw_fl, draw_rl, draw_sl, fixed_data, observe, Observation, Scenario, Seed};
use crate::problems::{
    pl_example, ClassKind, DataDistribution, DiscreteDistribution, DiscreteSpec, DistributionSpec,
    GaussianDistribution, GradientField, Objective, QuadraticInstance,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Divergences,
    Schedules,
    Estimators,
    SandwichSl,
    SandwichTl,
    Robust,
    FixedData,
    Pl,
    Federated,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Divergences,
        Suite::Schedules,
        Suite::Estimators,
        Suite::SandwichSl,
        Suite::SandwichTl,
        Suite::Robust,
        Suite::FixedData,
        Suite::Pl,
        Suite::Federated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Divergences => "divergences",
            Suite::Schedules => "schedules",
            Suite::Estimators => "estimators",
            Suite::SandwichSl => "sandwich-sl",
            Suite::SandwichTl => "sandwich-tl",
            Suite::Robust => "robust",
            Suite::FixedData => "fixed-data",
            Suite::Pl => "pl",
            Suite::Federated => "federated",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One measured value against its threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            relation: Relation::AtMost,
            threshold,
            passed: measured <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            relation: Relation::AtLeast,
            threshold,
            passed: measured >= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Runs a suite by name; unknown names are an error.
pub fn verify_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    run_suite(name.parse()?, seed)
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Divergences => divergence_checks(seed)?,
        Suite::Schedules => schedule_checks()?,
        Suite::Estimators => estimator_checks(seed)?,
        Suite::SandwichSl => sandwich_sl_checks(seed)?,
        Suite::SandwichTl => sandwich_tl_checks(seed)?,
        Suite::Robust => robust_checks(seed)?,
        Suite::FixedData => fixed_data_checks()?,
        Suite::Pl => pl_checks()?,
        Suite::Federated => federated_checks(seed)?,
    };
    Ok(SuiteReport {
        suite,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn discrete_spec(atoms: &[f64], weights: &[f64]) -> DistributionSpec {
    DistributionSpec::Discrete(DiscreteSpec {
        atoms: atoms.iter().map(|&a| vec![a]).collect(),
        weights: weights.to_vec(),
    })
}

fn random_law<R: Rng>(rng: &mut R, atoms: usize) -> DiscreteDistribution<f64> {
    let mut w: Vec<f64> = (0..atoms)
        .map(|_| {
            if rng.random::<f64>() < 0.2 {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    DiscreteDistribution::new(
        (0..atoms).map(|i| vec![i as f64]).collect(),
        w.iter().map(|x| x / total).collect(),
    )
    .expect("normalised weights")
}

fn divergence_checks(seed: u64) -> Result<Vec<Check>> {
    let mut rng = Seed::algorithm(seed).rng();
    let (mut tv_gap, mut kl_gap, mut asym) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0f64);
    for _ in 0..1000 {
        let (kp, kq) = (rng.random_range(1..=16), rng.random_range(1..=16));
        let p = random_law(&mut rng, kp);
        let q = random_law(&mut rng, kq);
        let d = divergences(&p, &q);
        tv_gap = tv_gap.max(d.lecam - d.tv);
        kl_gap = kl_gap.max(d.lecam - d.kl);
        asym = asym.max((d.lecam - divergences(&q, &p).lecam).abs());
    }
    Ok(vec![
        Check::at_most("max lecam - tv", tv_gap, 1e-12),
        Check::at_most("max lecam - kl", kl_gap, 1e-12),
        Check::at_most("max |lecam(p,q) - lecam(q,p)|", asym, 0.0),
    ])
}

fn schedule_checks() -> Result<Vec<Check>> {
    let mut worst = i64::MIN;
    let mut below_one = 0usize;
    for kappa in [1.0, 1.5, 2.0, 4.0, 16.0] {
        for n in 3..=2048usize {
            let s = batch_schedule(n, kappa)?;
            worst = worst.max(s.iter().sum::<usize>() as i64 - (n as i64 - 1));
            below_one += s.iter().filter(|&&b| b == 0).count();
        }
    }
    Ok(vec![
        Check::at_most("max sum n_t - (n - 1)", worst as f64, 0.0),
        Check::at_most("zero-size batches", below_one as f64, 0.0),
    ])
}

/// Monte Carlo risk of the Bayes two-point estimator under its own prior.
pub fn bayes_mc_risk(a: f64, b: f64, n: usize, bound: f64, reps: usize, seed: Seed) -> Result<f64> {
    let prior = BetaPrior::new(a, b)?;
    let beta = Beta::new(a, b).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = seed.rng();
    let mut total = 0.0;
    for _ in 0..reps {
        let p: f64 = beta.sample(&mut rng);
        let k = Binomial::new(n as u64, p)
            .map_err(|e| Error::invalid(e.to_string()))?
            .sample(&mut rng) as usize;
        let values = (0..n)
            .map(|i| vec![if i < k { bound } else { -bound }])
            .collect();
        let est = Estimator::BayesTwoPoint { prior, bound }.estimate(&Observation::new(values))?;
        total += (est[0] - (2.0 * p - 1.0) * bound).powi(2);
    }
    Ok(total / reps as f64)
}

fn bayes_checks(seed: u64, triples: &[(f64, f64, usize)]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (i, &(a, b, n)) in triples.iter().enumerate() {
        let mc = bayes_mc_risk(a, b, n, 1.0, 100_000, Seed::new(seed, 100 + i as u64))?;
        let cf = bayes_risk_closed_form(a, b, n, 1.0)?;
        out.push(Check::at_most(
            format!("bayes mc relative error (a={a:.4}, b={b:.4}, n={n})"),
            (mc - cf).abs() / cf,
            0.03,
        ));
    }
    Ok(out)
}

fn estimator_checks(seed: u64) -> Result<Vec<Check>> {
    let r64 = 64f64.sqrt() / 2.0;
    let mut out = bayes_checks(seed, &[(1.0, 1.0, 4), (2.0, 0.5, 16), (r64, r64, 64)])?;
    let mut id_gap = 0.0f64;
    for n in [1usize, 4, 16, 64, 256, 1024] {
        let a = (n as f64).sqrt() / 2.0;
        let cf = bayes_risk_closed_form(a, a, n, 1.0)?;
        id_gap = id_gap.max((cf - 1.0 / (1.0 + (n as f64).sqrt()).powi(2)).abs());
    }
    out.push(Check::at_most(
        "|closed form - B^2/(1+sqrt n)^2|",
        id_gap,
        1e-12,
    ));

    let coin: DataDistribution<f64> =
        DiscreteDistribution::uniform(vec![vec![0.0], vec![1.0]])?.into();
    let g = GradientField::scaled_identity(1, 1.0);
    let reps = 20_000;
    let mse: f64 = (0..reps)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let s = draw_sl(&coin, 10, Seed::new(seed, 1000 + r as u64))?;
            let m = sample_mean(&observe(&g, &s)?)?;
            Ok((m[0] - 0.5).powi(2))
        })
        .collect::<Result<Vec<_>>>()?
        .iter()
        .sum::<f64>()
        / reps as f64;
    out.push(Check::at_most(
        "sample mean mse vs var/n relative error",
        (mse - 0.025).abs() / 0.025,
        0.05,
    ));

    let mut rng = Seed::algorithm(seed).rng();
    let values: Vec<Vec<f64>> = (0..200)
        .map(|i| {
            let mut v: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            if i % 10 == 0 {
                v[1] += 50.0;
            }
            v
        })
        .collect();
    let obs = Observation::new(values);
    let shift = [3.0, -7.0, 0.5];
    let cfg = FilterConfig::default();
    let a = robust_filter_mean(&obs, 0.1, &cfg)?.value;
    let b = robust_filter_mean(&obs.shifted(&shift), 0.1, &cfg)?.value;
    out.push(Check::at_most(
        "robust filter translation gap",
        linalg::dist(&linalg::add(&a, &shift), &b),
        1e-9,
    ));
    Ok(out)
}

/// The supervised hard-instance experiment: `B = 1`, `mu = 1`, `L = 4`,
/// two equally likely atoms.
pub fn sandwich_sl_config(seed: u64, replications: usize) -> ExperimentConfig {
    ExperimentConfig {
        schema: SCHEMA_VERSION,
        scenario: Scenario::SL,
        class: ClassSpec {
            kind: ClassKind::Bnd,
            bound: 1.0,
        },
        instance: InstanceSpec {
            mu: 1.0,
            smoothness: 4.0,
            dim: 1,
        },
        target: discrete_spec(&[0.0, 1.0], &[0.5, 0.5]),
        source: None,
        outliers: None,
        eta: None,
        agents: None,
        design: None,
        n_grid: vec![16, 32, 64, 128, 256, 512, 1024],
        replications,
        estimator: EstimatorSpec::SampleMean,
        optimizer: OptimizerSpec {
            schedule: Schedule::Exponential,
            epsilon: 1e-8,
            noise_sq: None,
        },
        seed,
        output: None,
    }
}

/// Transfer experiment with `d_TV(D, D') = 0.3`.
pub fn sandwich_tl_config(seed: u64, replications: usize) -> ExperimentConfig {
    let mut cfg = sandwich_sl_config(seed, replications);
    cfg.scenario = Scenario::TL;
    cfg.target = discrete_spec(&[0.0, 1.0, 2.0, 3.0], &[0.4, 0.1, 0.25, 0.25]);
    cfg.source = Some(discrete_spec(
        &[0.0, 1.0, 2.0, 3.0],
        &[0.1, 0.4, 0.25, 0.25],
    ));
    cfg.n_grid = vec![64, 256, 1024];
    cfg
}

fn sandwich_sl_checks(seed: u64) -> Result<Vec<Check>> {
    let res = run_scenario(&sandwich_sl_config(seed, 2000))?;
    let mut out = Vec::new();
    for p in &res.points {
        let upper = p.bounds.as_ref().and_then(|b| b.upper).unwrap_or(f64::NAN);
        out.push(Check::at_most(
            format!("n={} mean + 2SE vs upper", p.n),
            p.mean + 2.0 * p.std_err,
            upper,
        ));
    }
    let rate = res.rate.ok_or_else(|| Error::invalid("no rate fit"))?;
    out.push(Check::at_least("slope", rate.slope, -1.15));
    out.push(Check::at_most("slope", rate.slope, -0.85));
    out.push(Check::at_least("r^2", rate.r_squared, 0.98));
    let a = 64f64.sqrt() / 2.0;
    out.extend(bayes_checks(seed, &[(a, a, 64)])?);
    Ok(out)
}

fn sandwich_tl_checks(seed: u64) -> Result<Vec<Check>> {
    let cfg = sandwich_tl_config(seed, 500);
    let res = run_scenario(&cfg)?;
    let tv = 0.3;
    let (b, mu, kappa) = (1.0f64, 1.0f64, 4.0f64);
    let lower = (2.0 - 3f64.ln()) / 32.0 * tv * tv * b * b / mu * 0.9;
    let mut out = Vec::new();
    for p in &res.points {
        let n = p.n as f64;
        let upper = (4.0 * b * b * tv * tv / (2.0 * mu)
            + 6.0 * kappa * b * b / (mu * n)
            + 2.0 * b * b / mu * (-n / (6.0 * kappa)).exp())
            * 1.05;
        out.push(Check::at_least(
            format!("n={} mean vs lower", p.n),
            p.mean,
            lower,
        ));
        out.push(Check::at_most(
            format!("n={} mean vs upper", p.n),
            p.mean,
            upper,
        ));
    }
    let m = |n: usize| {
        res.points
            .iter()
            .find(|p| p.n == n)
            .map_or(f64::NAN, |p| p.mean)
    };
    let ratio = m(1024) / m(256);
    out.push(Check::at_least("mean(1024) / mean(256)", ratio, 0.7));
    out.push(Check::at_most("mean(1024) / mean(256)", ratio, 1.3));
    Ok(out)
}

fn robust_checks(seed: u64) -> Result<Vec<Check>> {
    let dim = 5;
    let clean: DataDistribution<f64> = GaussianDistribution::isotropic(vec![0.0; dim]).into();
    let mut far = vec![0.0; dim];
    far[0] = 100.0;
    let outliers: DataDistribution<f64> = DiscreteDistribution::point_mass(far).into();
    let var_xi = clean.variance();
    let (n, reps) = (500usize, 200usize);
    let g = GradientField::scaled_identity(dim, 1.0);
    let cfg = FilterConfig::default();
    let mut out = Vec::new();
    for (k, eta) in [0.05, 0.1, 0.2].into_iter().enumerate() {
        let errs: Vec<(f64, f64)> = (0..reps)
            .into_par_iter()
            .map(|r| -> Result<(f64, f64)> {
                let s = draw_rl(
                    &clean,
                    &outliers,
                    eta,
                    n,
                    Seed::for_replication(seed, r as u64, 0).child(k as u64),
                )?;
                let o = observe(&g, &s)?;
                let robust = robust_filter_mean(&o, eta, &cfg)?.value;
                Ok((linalg::norm_sq(&robust), linalg::norm_sq(&sample_mean(&o)?)))
            })
            .collect::<Result<_>>()?;
        let robust = errs.iter().map(|e| e.0).sum::<f64>() / reps as f64;
        let naive = errs.iter().map(|e| e.1).sum::<f64>() / reps as f64;
        let envelope = 3200.0 * var_xi * (eta + 1.0 / n as f64) / 4.0;
        out.push(Check::at_most(
            format!("eta={eta} robust mse vs envelope"),
            robust,
            envelope,
        ));
        if eta == 0.2 {
            out.push(Check::at_most(
                "eta=0.2 robust mse vs naive mse / 10",
                robust,
                naive / 10.0,
            ));
        }
    }
    Ok(out)
}

/// Five atoms in the plane with a three-point design.
pub fn fixed_data_example() -> (DiscreteDistribution<f64>, Vec<Vec<f64>>) {
    let d = DiscreteDistribution::new(
        vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![2.0, 2.0],
        ],
        vec![0.1, 0.2, 0.3, 0.15, 0.25],
    )
    .expect("valid law");
    (d, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.5, 1.5]])
}

fn fixed_data_checks() -> Result<Vec<Check>> {
    let (d, points) = fixed_data_example();
    let dd: DataDistribution<f64> = d.clone().into();
    let design = fixed_data(points)?;
    let (b, mu) = (1.5, 2.0);
    let mut out = Vec::new();

    let masses = design_masses(&dd, &design)?;
    let p: f64 = masses.iter().sum();
    let bnd_closed = 2.0 * b * b * (1.0 - p).powi(2) / mu;
    let inst = QuadraticInstance::new(fd_bnd_worst_field(b, &design, 1), mu, mu)?;
    let t = estimator_gd(&inst, &dd, &design, &Estimator::FDBnd { masses }, 1)?;
    out.push(Check::at_most(
        "FD-Bnd |risk - closed form|",
        (t.final_excess() - bnd_closed).abs(),
        1e-9,
    ));

    let voronoi = voronoi_masses(&dd, &design, Seed::new(0, 0))?;
    let e = mean_min_distance(&d, &design)?;
    let lip_closed = b * b * e * e / (2.0 * mu);
    let inst = QuadraticInstance::new(fd_lip_worst_field(b, &design, 1), mu, mu)?;
    let t = estimator_gd(&inst, &dd, &design, &Estimator::FDLip { voronoi }, 1)?;
    out.push(Check::at_most(
        "FD-Lip |risk - closed form|",
        (t.final_excess() - lip_closed).abs(),
        1e-9,
    ));
    Ok(out)
}

fn pl_checks() -> Result<Vec<Check>> {
    let f = pl_example::<f64>();
    let grid = f.check_grid(-20.0, 20.0, 1e-3);
    let x0 = 3.0;
    let delta = f.excess(&[x0]);
    let target = 1e-6;
    let steps = (f.kappa() * (delta / target).ln()).ceil() as usize;
    let t = gradient_descent(&f, vec![x0], steps, |_, x| Ok(f.gradient(x)))?;
    Ok(vec![
        Check::at_most("PL grid worst gap", grid.worst_gap, 0.0),
        Check::at_most(
            format!("f - inf f after {steps} steps"),
            t.final_excess(),
            target,
        ),
    ])
}

/// `D = D_1` uniform on `{0, 1, 2, 3}` and `D_2` the same law shifted by 2.
pub fn federated_example() -> (
    DiscreteDistribution<f64>,
    Vec<(DiscreteDistribution<f64>, usize)>,
) {
    let d1 =
        DiscreteDistribution::uniform((0..4).map(|i| vec![i as f64]).collect()).expect("valid law");
    let d2 =
        DiscreteDistribution::uniform((2..6).map(|i| vec![i as f64]).collect()).expect("valid law");
    (d1.clone(), vec![(d1, 10), (d2, 1000)])
}

fn federated_checks(seed: u64) -> Result<Vec<Check>> {
    let class = crate::problems::FunctionClass::bnd(1.0);
    let (target, locals) = federated_example();
    let w = optimal_fl_weights(&class, &target, &locals)?;
    let at = |q: [f64; 2]| fl_objective(&class, &target, &locals, &q).map(|o| o.total);
    let best_simple = at([1.0, 0.0])?.min(at([0.0, 1.0])?).min(at([0.5, 0.5])?);
    let (g, _) = fl_worst_sign_field(1.0, &target, &locals, &w.q, 1)?;
    let truth = g.expectation(&target.clone().into())?;
    let dists: Vec<(DataDistribution<f64>, usize)> =
        locals.iter().map(|(d, k)| (d.clone().into(), *k)).collect();
    let reps = 4000;
    let mc = (0..reps)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let s = draw_fl(&dists, Seed::for_replication(seed, r as u64, 0))?;
            let est = fl_weighted_mean(&observe(&g, &s)?, &w.q)?;
            Ok(linalg::dist_sq(&est, &truth))
        })
        .collect::<Result<Vec<_>>>()?
        .iter()
        .sum::<f64>()
        / reps as f64;
    Ok(vec![
        Check::at_most(
            "optimal objective vs best of simple weights",
            w.objective.total,
            best_simple,
        ),
        Check::at_most(
            "|mc risk - objective| / objective",
            (mc - w.objective.total).abs() / w.objective.total,
            0.10,
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(verify_suite("nope", 1).is_err());
    }

    #[test]
    fn fast_suites_pass() {
        for s in [Suite::Divergences, Suite::FixedData, Suite::Pl] {
            let r = run_suite(s, 7).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }
}
