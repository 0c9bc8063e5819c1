//! Data-dependent oracles: the seed `z` is drawn once per replication and
//! every gradient query is evaluated on that same realisation.

mod sample;
mod seed;

pub use sample::{
    draw_fl, draw_rl, draw_sl, draw_tl, fixed_data, observe, observe_gradient,
    observe_gradient_range, DesignSpec, Observation, OracleSample, Scenario,
};
pub use seed::{splitmix64, Seed, ALGORITHM_STREAM, ORACLE_STREAM};
