//! Minimax excess risk of first-order methods with data-dependent oracles.
//!
//! The numeric core is generic over [`scalar::Real`]; the aliases below fix
//! it to `f64`, which is what the harness and CLI use.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod optimizer;
pub mod oracles;
pub mod problems;
pub mod scalar;

pub use error::{Error, Result};
pub use oracles::{Scenario, Seed};
pub use problems::{ClassKind, Objective};
pub use scalar::{Field, Real};

/// Default scalar.
pub type Scalar = f64;

pub type DataDistribution = problems::DataDistribution<Scalar>;
pub type DiscreteDistribution = problems::DiscreteDistribution<Scalar>;
pub type GaussianDistribution = problems::GaussianDistribution<Scalar>;
pub type FunctionClass = problems::FunctionClass<Scalar>;
pub type GradientField = problems::GradientField<Scalar>;
pub type QuadraticInstance = problems::QuadraticInstance<Scalar>;
pub type PLInstance = problems::PLInstance<Scalar>;
pub type OracleSample = oracles::OracleSample<Scalar>;
pub type Observation = oracles::Observation<Scalar>;
pub type Estimator = estimators::Estimator<Scalar>;
pub type OptimizerConfig = optimizer::OptimizerConfig<Scalar>;
pub type Trajectory = optimizer::Trajectory<Scalar>;
pub type Divergences = bounds::Divergences<Scalar>;
pub type BoundInputs = bounds::BoundInputs<Scalar>;
pub type BoundReport = bounds::BoundReport<Scalar>;
