//! Gradient estimators `phi`: maps from oracle output to an estimate of `E_D[g]`.

mod bayes;
mod federated;
mod fixed;
mod mean;
mod robust;

pub use bayes::{bayes_two_point, BetaPrior};
pub use federated::{
    fl_field_risk, fl_objective, fl_worst_sign_field, optimal_fl_weights, FlObjective, FlWeights,
};
pub use fixed::{
    design_masses, fd_bnd_estimator, fd_bnd_worst_field, fd_lip_estimator, fd_lip_worst_field,
    mean_min_distance, nearest_index, voronoi_masses, VORONOI_DRAWS,
};
pub use mean::{agent_means, fl_weighted_mean, sample_mean};
pub use robust::{robust_filter_mean, FilterConfig, RobustMean};

use crate::error::Result;
use crate::oracles::{Observation, Scenario};
use crate::scalar::Real;

/// A configured estimator.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator<T> {
    SampleMean,
    /// Sample mean of source-law observations.
    TLMean,
    FLWeightedMean {
        weights: Vec<T>,
    },
    RobustFilterMean {
        eta: T,
        config: FilterConfig,
    },
    /// `masses[i] = P_D({xi'_i})`.
    FDBnd {
        masses: Vec<T>,
    },
    /// `voronoi[i]` = mass of the Voronoi cell of `xi'_i`.
    FDLip {
        voronoi: Vec<T>,
    },
    BayesTwoPoint {
        prior: BetaPrior<T>,
        bound: T,
    },
}

impl<T: Real> Estimator<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::SampleMean => "SampleMean",
            Estimator::TLMean => "TLMean",
            Estimator::FLWeightedMean { .. } => "FLWeightedMean",
            Estimator::RobustFilterMean { .. } => "RobustFilterMean",
            Estimator::FDBnd { .. } => "FDBnd",
            Estimator::FDLip { .. } => "FDLip",
            Estimator::BayesTwoPoint { .. } => "BayesTwoPoint",
        }
    }

    /// Whether the estimator can consume samples of this scenario.
    pub fn supports(&self, scenario: Scenario) -> bool {
        match self {
            Estimator::SampleMean => true,
            Estimator::TLMean => scenario == Scenario::TL,
            Estimator::FLWeightedMean { .. } => scenario == Scenario::FL,
            Estimator::RobustFilterMean { .. } => matches!(scenario, Scenario::RL | Scenario::SL),
            Estimator::FDBnd { .. } | Estimator::FDLip { .. } => scenario == Scenario::FD,
            Estimator::BayesTwoPoint { .. } => scenario == Scenario::SL,
        }
    }

    pub fn estimate(&self, obs: &Observation<T>) -> Result<Vec<T>> {
        match self {
            Estimator::SampleMean | Estimator::TLMean => sample_mean(obs),
            Estimator::FLWeightedMean { weights } => fl_weighted_mean(obs, weights),
            Estimator::RobustFilterMean { eta, config } => {
                Ok(robust_filter_mean(obs, *eta, config)?.value)
            }
            Estimator::FDBnd { masses } => fd_bnd_estimator(obs, masses),
            Estimator::FDLip { voronoi } => fd_lip_estimator(obs, voronoi),
            Estimator::BayesTwoPoint { prior, bound } => bayes_two_point(obs, prior, *bound),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translation_equivariance_of_linear_estimators() {
        let values = vec![vec![1.0, 2.0], vec![-3.0, 0.5], vec![0.25, 4.0]];
        let obs = Observation {
            values: values.clone(),
            agents: Some(vec![0, 1, 1]),
        };
        let c = [10.0, -7.0];
        let shifted = obs.shifted(&c);
        let ests: Vec<Estimator<f64>> = vec![
            Estimator::SampleMean,
            Estimator::FLWeightedMean {
                weights: vec![0.3, 0.7],
            },
            Estimator::FDBnd {
                masses: vec![0.1, 0.2, 0.3],
            },
            Estimator::FDLip {
                voronoi: vec![0.5, 0.25, 0.25],
            },
        ];
        for e in ests {
            let a = e.estimate(&obs).unwrap();
            let b = e.estimate(&shifted).unwrap();
            for k in 0..2 {
                assert!((b[k] - a[k] - c[k]).abs() < 1e-12, "{}", e.name());
            }
        }
    }

    #[test]
    fn scenario_support() {
        assert!(Estimator::<f64>::SampleMean.supports(Scenario::FD));
        assert!(!Estimator::<f64>::FDBnd { masses: vec![] }.supports(Scenario::SL));
        assert!(!Estimator::<f64>::TLMean.supports(Scenario::SL));
    }
}
