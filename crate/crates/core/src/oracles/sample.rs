//! Frozen oracle samples `z` and the pointwise observation map.

use std::fmt;
use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::seed::Seed;
use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::problems::{DataDistribution, GradientField, QuadraticInstance};
use crate::scalar::Real;

/// Learning scenario an oracle sample was drawn for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Supervised: iid from the target law.
    SL,
    /// Transfer: iid from a source law.
    TL,
    /// Federated: per-agent iid draws.
    FL,
    /// Robust: iid from a contaminated mixture.
    RL,
    /// Fixed, predetermined design points.
    FD,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::SL => "SL",
            Scenario::TL => "TL",
            Scenario::FL => "FL",
            Scenario::RL => "RL",
            Scenario::FD => "FD",
        })
    }
}

/// The realised oracle seed: data points drawn once and reused by every query.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSample<T> {
    points: Vec<Vec<T>>,
    scenario: Scenario,
    agents: Option<Vec<usize>>,
    outliers: Option<Vec<bool>>,
}

impl<T: Real> OracleSample<T> {
    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    /// Zero-based agent index of every point (federated samples only).
    pub fn agents(&self) -> Option<&[usize]> {
        self.agents.as_deref()
    }

    /// Whether each point came from the outlier law (robust samples only).
    pub fn outliers(&self) -> Option<&[bool]> {
        self.outliers.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Points `range`, keeping the per-point tags aligned.
    pub fn slice(&self, range: Range<usize>) -> Self {
        Self {
            points: self.points[range.clone()].to_vec(),
            scenario: self.scenario,
            agents: self.agents.as_ref().map(|a| a[range.clone()].to_vec()),
            outliers: self.outliers.as_ref().map(|o| o[range].to_vec()),
        }
    }
}

fn iid<T: Real, R: Rng>(dist: &DataDistribution<T>, n: usize, rng: &mut R) -> Vec<Vec<T>> {
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// Supervised learning: `n` iid points from `dist`.
pub fn draw_sl<T: Real>(
    dist: &DataDistribution<T>,
    n: usize,
    seed: Seed,
) -> Result<OracleSample<T>> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let mut rng = seed.rng();
    Ok(OracleSample {
        points: iid(dist, n, &mut rng),
        scenario: Scenario::SL,
        agents: None,
        outliers: None,
    })
}

/// Transfer learning: `n` iid points from the source law.
pub fn draw_tl<T: Real>(
    source: &DataDistribution<T>,
    n: usize,
    seed: Seed,
) -> Result<OracleSample<T>> {
    let mut s = draw_sl(source, n, seed)?;
    s.scenario = Scenario::TL;
    Ok(s)
}

/// Federated learning: `n_i` iid points from each local law, tagged by agent.
pub fn draw_fl<T: Real>(
    locals: &[(DataDistribution<T>, usize)],
    seed: Seed,
) -> Result<OracleSample<T>> {
    if locals.iter().all(|(_, n)| *n == 0) {
        return Err(Error::invalid("at least one agent needs a positive budget"));
    }
    let mut rng = seed.rng();
    let mut points = Vec::new();
    let mut agents = Vec::new();
    for (i, (dist, n)) in locals.iter().enumerate() {
        points.extend(iid(dist, *n, &mut rng));
        agents.extend(std::iter::repeat_n(i, *n));
    }
    Ok(OracleSample {
        points,
        scenario: Scenario::FL,
        agents: Some(agents),
        outliers: None,
    })
}

/// Robust learning: each point is an outlier with probability `eta`.
pub fn draw_rl<T: Real>(
    clean: &DataDistribution<T>,
    outliers: &DataDistribution<T>,
    eta: T,
    n: usize,
    seed: Seed,
) -> Result<OracleSample<T>> {
    if !(eta >= T::zero() && eta <= T::one()) {
        return Err(Error::invalid(format!("eta must lie in [0, 1], got {eta}")));
    }
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    check_dim(clean.dim(), outliers.dim())?;
    let eta = eta.as_f64();
    let mut rng = seed.rng();
    let mut points = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for _ in 0..n {
        let is_out = rng.random::<f64>() < eta;
        points.push(if is_out {
            outliers.sample(&mut rng)
        } else {
            clean.sample(&mut rng)
        });
        flags.push(is_out);
    }
    Ok(OracleSample {
        points,
        scenario: Scenario::RL,
        agents: None,
        outliers: Some(flags),
    })
}

/// Fixed design. Duplicate points are dropped, keeping first occurrences.
pub fn fixed_data<T: Real>(points: Vec<Vec<T>>) -> Result<OracleSample<T>> {
    if points.is_empty() {
        return Err(Error::Empty("fixed design needs at least one point"));
    }
    let dim = points[0].len();
    let mut unique: Vec<Vec<T>> = Vec::with_capacity(points.len());
    for p in points {
        check_dim(dim, p.len())?;
        if !unique.contains(&p) {
            unique.push(p);
        }
    }
    Ok(OracleSample {
        points: unique,
        scenario: Scenario::FD,
        agents: None,
        outliers: None,
    })
}

/// JSON form of a fixed design: `{"points": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    pub points: Vec<Vec<f64>>,
}

impl DesignSpec {
    pub fn build<T: Real>(&self) -> Result<OracleSample<T>> {
        fixed_data(
            self.points
                .iter()
                .map(|p| crate::problems::cast_vec(p))
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Oracle output: one gradient vector per queried point.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T> {
    pub values: Vec<Vec<T>>,
    /// Agent tags carried over from a federated sample.
    pub agents: Option<Vec<usize>>,
}

impl<T: Real> Observation<T> {
    pub fn new(values: Vec<Vec<T>>) -> Self {
        Self {
            values,
            agents: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Adds `c` to every value, the translation map of the oracle.
    pub fn shifted(&self, c: &[T]) -> Self {
        Self {
            values: self.values.iter().map(|v| linalg::add(v, c)).collect(),
            agents: self.agents.clone(),
        }
    }
}

/// `O(g, z) = (g(xi_1), ..., g(xi_n))`.
pub fn observe<T: Real>(g: &GradientField<T>, sample: &OracleSample<T>) -> Result<Observation<T>> {
    check_dim(g.input_dim(), sample.dim())?;
    Ok(Observation {
        values: sample.points.iter().map(|p| g.eval(p)).collect(),
        agents: sample.agents.clone(),
    })
}

/// `O(grad l_x, z)` for the quadratic instance: `mu x + g(xi_i)` at every point.
pub fn observe_gradient<T: Real>(
    inst: &QuadraticInstance<T>,
    x: &[T],
    sample: &OracleSample<T>,
) -> Result<Observation<T>> {
    observe_gradient_range(inst, x, sample, 0..sample.len())
}

/// As [`observe_gradient`] restricted to the points in `range`.
pub fn observe_gradient_range<T: Real>(
    inst: &QuadraticInstance<T>,
    x: &[T],
    sample: &OracleSample<T>,
    range: Range<usize>,
) -> Result<Observation<T>> {
    check_dim(inst.field().input_dim(), sample.dim())?;
    check_dim(inst.dim(), x.len())?;
    if range.end > sample.len() {
        return Err(Error::invalid(format!(
            "range {range:?} exceeds sample of length {}",
            sample.len()
        )));
    }
    Ok(Observation {
        values: sample.points[range.clone()]
            .iter()
            .map(|p| inst.point_gradient(x, p))
            .collect(),
        agents: sample.agents.as_ref().map(|a| a[range].to_vec()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::DiscreteDistribution;

    fn coin() -> DataDistribution<f64> {
        DiscreteDistribution::uniform(vec![vec![0.0], vec![1.0]])
            .unwrap()
            .into()
    }

    #[test]
    fn point_mass_draws() {
        let d: DataDistribution<f64> = DiscreteDistribution::point_mass(vec![2.5, -1.0]).into();
        let s = draw_sl(&d, 3, Seed::oracle(1)).unwrap();
        assert_eq!(
            s.points(),
            &[vec![2.5, -1.0], vec![2.5, -1.0], vec![2.5, -1.0]]
        );
        assert!(draw_sl(&d, 0, Seed::oracle(1)).is_err());
    }

    #[test]
    fn same_seed_same_sample() {
        let a = draw_tl(&coin(), 50, Seed::oracle(9)).unwrap();
        let b = draw_tl(&coin(), 50, Seed::oracle(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.scenario(), Scenario::TL);
        let c = draw_tl(&coin(), 50, Seed::oracle(10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn federated_tags() {
        let s = draw_fl(&[(coin(), 2), (coin(), 3)], Seed::oracle(0)).unwrap();
        assert_eq!(s.agents().unwrap(), &[0, 0, 1, 1, 1]);
        assert!(draw_fl(&[(coin(), 0)], Seed::oracle(0)).is_err());
    }

    #[test]
    fn single_agent_federated_matches_supervised_points() {
        let f = draw_fl(&[(coin(), 20)], Seed::oracle(4)).unwrap();
        let s = draw_sl(&coin(), 20, Seed::oracle(4)).unwrap();
        assert_eq!(f.points(), s.points());
    }

    #[test]
    fn robust_extremes() {
        let out: DataDistribution<f64> = DiscreteDistribution::point_mass(vec![100.0]).into();
        let none = draw_rl(&coin(), &out, 0.0, 100, Seed::oracle(2)).unwrap();
        assert!(none.outliers().unwrap().iter().all(|&o| !o));
        let all = draw_rl(&coin(), &out, 1.0, 100, Seed::oracle(2)).unwrap();
        assert!(all.points().iter().all(|p| p == &vec![100.0]));
        assert!(draw_rl(&coin(), &out, 1.5, 10, Seed::oracle(2)).is_err());
        assert!(draw_rl(&coin(), &out, -0.1, 10, Seed::oracle(2)).is_err());
    }

    #[test]
    fn fixed_data_dedups() {
        let s = fixed_data(vec![vec![0.0], vec![1.0], vec![0.0], vec![2.0], vec![3.0]]).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.points(), &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        assert_eq!(fixed_data(vec![vec![5.0]]).unwrap().len(), 1);
        assert!(fixed_data::<f64>(vec![]).is_err());
    }

    #[test]
    fn observe_examples() {
        let s = fixed_data(vec![vec![1.0, 2.0], vec![-3.0, 0.5]]).unwrap();
        let c = GradientField::constant(vec![7.0], 2);
        assert!(observe(&c, &s)
            .unwrap()
            .values
            .iter()
            .all(|v| v == &vec![7.0]));
        let id = GradientField::<f64>::scaled_identity(2, 1.0);
        assert_eq!(observe(&id, &s).unwrap().values, s.points().to_vec());
        let bad = GradientField::<f64>::scaled_identity(3, 1.0);
        assert!(observe(&bad, &s).is_err());
    }
}
