//! Data laws, gradient-field classes and the objective families under study.

mod distribution;
mod field;
mod pl;
mod quadratic;

pub(crate) use distribution::{cast_vec, mass_tolerance};
pub use distribution::{
    DataDistribution, DiscreteDistribution, DiscreteSpec, DistributionSpec, GaussianDistribution,
    GaussianSpec, GaussianWrapper,
};
pub use field::{AffineMap, ClassKind, FunctionClass, GradientField, Membership};
pub use pl::{pl_example, PLInstance, PlGridCheck};
pub use quadratic::{
    half_mass_split, hard_instance_bnd, sup_variance, Objective, PopulationObjective,
    QuadraticInstance,
};
