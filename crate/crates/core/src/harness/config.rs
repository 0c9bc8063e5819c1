//! Versioned JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::FilterConfig;
use crate::optimizer::Schedule;
use crate::oracles::{DesignSpec, Scenario};
use crate::problems::{ClassKind, DistributionSpec, FunctionClass};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub kind: ClassKind,
    pub bound: f64,
}

impl ClassSpec {
    pub fn build(&self) -> Result<FunctionClass<f64>> {
        FunctionClass::new(self.kind, self.bound)
            .map_err(|e| Error::config("class.bound", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub mu: f64,
    #[serde(rename = "L")]
    pub smoothness: f64,
    /// Output dimension of the gradient field.
    #[serde(default = "one")]
    pub dim: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub distribution: DistributionSpec,
    /// Relative share of each budget `n` given to this agent.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum EstimatorSpec {
    SampleMean,
    TLMean,
    /// Optimal weights are computed when `weights` is absent.
    FLWeightedMean {
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    RobustFilterMean {
        #[serde(default)]
        filter: FilterConfig,
    },
    FDBnd,
    FDLip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    pub schedule: Schedule,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Overrides the class constant used by the warmup rule.
    #[serde(default)]
    pub noise_sq: Option<f64>,
}

fn default_epsilon() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub scenario: Scenario,
    pub class: ClassSpec,
    pub instance: InstanceSpec,
    /// The law `D` whose risk is measured.
    pub target: DistributionSpec,
    /// `D'` for transfer learning.
    #[serde(default)]
    pub source: Option<DistributionSpec>,
    /// `D_o` for robust learning.
    #[serde(default)]
    pub outliers: Option<DistributionSpec>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub agents: Option<Vec<AgentSpec>>,
    #[serde(default)]
    pub design: Option<DesignSpec>,
    /// Sample budgets; must be empty for fixed designs.
    #[serde(default)]
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub estimator: EstimatorSpec,
    pub optimizer: OptimizerSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn require<T>(v: &Option<T>, field: &str, scenario: Scenario) -> Result<()> {
    if v.is_none() {
        return Err(Error::config(
            field,
            format!("required for scenario {scenario}"),
        ));
    }
    Ok(())
}

fn forbid<T>(v: &Option<T>, field: &str, scenario: Scenario) -> Result<()> {
    if v.is_some() {
        return Err(Error::config(
            field,
            format!("not used by scenario {scenario}"),
        ));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        use Scenario::*;
        let s = self.scenario;
        if self.schema != SCHEMA_VERSION {
            return Err(Error::config(
                "schema",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema
                ),
            ));
        }
        self.class.build()?;
        let i = &self.instance;
        if !(i.mu > 0.0) || !i.mu.is_finite() {
            return Err(Error::config("instance.mu", "must be positive"));
        }
        if !(i.smoothness >= i.mu) || !i.smoothness.is_finite() {
            return Err(Error::config("instance.L", "must be finite and >= mu"));
        }
        if i.dim == 0 {
            return Err(Error::config("instance.dim", "must be positive"));
        }
        if self.replications == 0 {
            return Err(Error::config("replications", "must be at least 1"));
        }
        if s == FD {
            if !self.n_grid.is_empty() {
                return Err(Error::config(
                    "n_grid",
                    "a fixed design fixes n; leave the grid empty",
                ));
            }
        } else {
            if self.n_grid.is_empty() {
                return Err(Error::config("n_grid", "must not be empty"));
            }
            if self.n_grid.iter().any(|&n| n < 3) {
                return Err(Error::config("n_grid", "every budget must be at least 3"));
            }
            if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config("n_grid", "must be strictly increasing"));
            }
        }
        match s {
            TL => require(&self.source, "source", s)?,
            _ => forbid(&self.source, "source", s)?,
        }
        if s == RL {
            require(&self.outliers, "outliers", s)?;
            require(&self.eta, "eta", s)?;
            let eta = self.eta.unwrap_or_default();
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::config("eta", "must lie in [0, 1]"));
            }
        } else {
            forbid(&self.outliers, "outliers", s)?;
            forbid(&self.eta, "eta", s)?;
        }
        if s == FL {
            require(&self.agents, "agents", s)?;
            let agents = self.agents.as_deref().unwrap_or_default();
            if agents.is_empty() {
                return Err(Error::config("agents", "at least one agent is required"));
            }
            if agents
                .iter()
                .any(|a| !(a.share >= 0.0) || !a.share.is_finite())
            {
                return Err(Error::config(
                    "agents.share",
                    "must be finite and nonnegative",
                ));
            }
            if !(agents.iter().map(|a| a.share).sum::<f64>() > 0.0) {
                return Err(Error::config(
                    "agents.share",
                    "at least one share must be positive",
                ));
            }
        } else {
            forbid(&self.agents, "agents", s)?;
        }
        match s {
            FD => require(&self.design, "design", s)?,
            _ => forbid(&self.design, "design", s)?,
        }
        let est_ok = match (&self.estimator, s) {
            (EstimatorSpec::SampleMean, _) => true,
            (EstimatorSpec::TLMean, TL) => true,
            (EstimatorSpec::FLWeightedMean { weights }, FL) => match weights {
                Some(w) => w.len() == self.agents.as_ref().map_or(0, Vec::len),
                None => true,
            },
            (EstimatorSpec::RobustFilterMean { filter }, RL | SL) => filter.validate().is_ok(),
            (EstimatorSpec::FDBnd | EstimatorSpec::FDLip, FD) => true,
            _ => false,
        };
        if !est_ok {
            return Err(Error::config(
                "estimator",
                format!("invalid estimator for scenario {s}"),
            ));
        }
        let o = &self.optimizer;
        if !(o.epsilon > 0.0) {
            return Err(Error::config("optimizer.epsilon", "must be positive"));
        }
        if let Some(v) = o.noise_sq {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config(
                    "optimizer.noise_sq",
                    "must be finite and nonnegative",
                ));
            }
        }
        if let Schedule::FixedBatch { a } = o.schedule {
            if !(a > 0.0) {
                return Err(Error::config("optimizer.schedule.a", "must be positive"));
            }
        }
        if s == FD && !matches!(o.schedule, Schedule::SingleOracle { .. }) {
            return Err(Error::config(
                "optimizer.schedule",
                "a fixed design is reused every step; use SingleOracle",
            ));
        }
        Ok(())
    }
}
