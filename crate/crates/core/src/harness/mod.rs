//! Experiment runner: configuration, replication, rate fitting, suites and output.

mod config;
mod output;
mod rate;
mod run;
mod verify;

pub use config::{
    AgentSpec, ClassSpec, EstimatorSpec, ExperimentConfig, InstanceSpec, OptimizerSpec,
    SCHEMA_VERSION,
};
pub use output::{write_outputs, RESULTS_CSV, SUMMARY_JSON};
pub use rate::{fit_rate, fit_rate_csv, means_from_csv, RateFit};
pub use run::{
    replication_seed, run_scenario, run_scenario_with_threads, split_budget, thread_cap,
    ExperimentResult, PointSummary, RepRecord, THREADS_ENV,
};
pub use verify::{
    bayes_mc_risk, federated_example, fixed_data_example, run_suite, sandwich_sl_config,
    sandwich_tl_config, verify_suite, Check, Relation, Suite, SuiteReport,
};
