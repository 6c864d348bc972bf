//! Influence maximization from samples.
//!
//! The crate covers the whole pipeline: community-structured random networks
//! ([`graph`]), independent cascade diffusion ([`cascade`]), seed-set samples
//! drawn from a product distribution ([`sampling`]), first- and second-order
//! marginal contribution estimates ([`estimators`]), the COPS community-pruning
//! solver with its MargI/Greedy/Random baselines ([`solver`]) and the batch
//! experiment harness ([`harness`]).

pub mod cascade;
pub mod error;
pub mod estimators;
pub mod graph;
pub mod harness;
pub mod rng;
pub mod sampling;
pub mod solver;
pub mod union_find;

pub use cascade::{
    influence_exact, influence_mc, influenced_count, realize, CascadeRealization, InfluenceEstimate,
};
pub use error::{Error, Result};
pub use estimators::{first_order, second_order, MarginalTable, NodeEstimate, PairEstimate};
pub use graph::{
    classify_regimes, generate_er, generate_pa, generate_sbm, load_edge_list, Community,
    CommunityLayout, Edge, LoadedGraph, Regime, RegimeLabel, WeightedGraph,
};
pub use harness::{evaluate_solution, make_default_q, run_experiment, ExperimentConfig, ResultRow};
pub use sampling::{
    draw_samples, empirical_nonubiquity, uniform_expected_k, Network, ProductDistribution, Sample,
    SampleMode, SampleSet,
};
pub use solver::{
    overlap, run_cops, run_greedy, run_margi, run_random, OracleBudget, SolverConfig, SolverResult,
};

/// Node identifier: a dense index in `0..n`.
pub type NodeId = usize;
