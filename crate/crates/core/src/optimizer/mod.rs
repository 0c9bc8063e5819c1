//! First-order methods driven by estimated gradients.

mod gd;
mod schedule;

pub use gd::{
    estimator_gd, estimator_gd_from, gradient_descent, minibatch_gd_warmup, noise_constant,
    OptimizerConfig, Schedule, Trajectory,
};
pub use schedule::{batch_schedule, fixed_batch, warmup_length};
