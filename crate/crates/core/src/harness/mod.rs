//! Batch experiments: build networks, draw samples, run every solver and score
//! the chosen seed sets by Monte Carlo influence.

mod config;
mod experiment;

pub use config::{ExperimentConfig, NetworkKind};
pub use experiment::{
    build_trial_network, evaluate_solution, make_default_q, run_experiment, write_rows, ResultRow,
    TrialNetwork, CSV_HEADER,
};
