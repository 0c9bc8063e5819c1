//! Divergences, IPMs, two-point lower bounds and explicit minimax-risk bounds.

mod divergence;
mod ipm;
mod lower;
mod table;
mod transport;

pub use divergence::{
    aligned_masses, divergences, kl_divergence, lecam_distance, total_variation, Divergences,
};
pub use ipm::{ipm, signed_ipm};
pub use lower::{
    bayes_risk_closed_form, fixed_observation_law, iid_observation_law, two_point_lower,
};
pub use table::{table1_bounds, BoundInputs, BoundReport};
pub use transport::{solve_transport, wasserstein1, TransportPlan};
