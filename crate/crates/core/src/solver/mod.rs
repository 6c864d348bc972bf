//! Seed selection: COPS and MargI from samples, Greedy and Random baselines.

mod baselines;
mod cops;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use baselines::{
    greedy_with_oracle, run_greedy, run_random, ExactOracle, MonteCarloOracle, OracleBudget,
    ValueOracle,
};
pub use cops::{overlap, overlap_rule, prune_ordering, rank_nodes, run_cops, run_cops_on, run_margi, run_margi_on, Pruning};

/// Orderings longer than this are truncated in JSON exports.
pub const JSON_ORDERING_LIMIT: usize = 5000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub k: usize,
    /// Acceptable overlap in `[0, 1]`; 1 disables pruning.
    pub alpha: f64,
    pub min_count: usize,
    /// Restricts selection to these nodes when set.
    pub candidates: Option<Vec<usize>>,
}

impl SolverConfig {
    pub fn new(k: usize, alpha: f64) -> Self {
        SolverConfig {
            k,
            alpha,
            min_count: crate::estimators::DEFAULT_MIN_COUNT,
            candidates: None,
        }
    }

    pub fn with_min_count(mut self, min_count: usize) -> Self {
        self.min_count = min_count;
        self
    }

    pub fn with_candidates(mut self, candidates: Vec<usize>) -> Self {
        self.candidates = Some(candidates);
        self
    }

    /// Validates against an `n`-node ground set and returns the sorted candidates.
    pub fn resolve_candidates(&self, n: usize) -> Result<Vec<usize>> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Solver(format!("alpha = {} outside [0, 1]", self.alpha)));
        }
        let candidates = resolve_candidates(self.candidates.as_deref(), n)?;
        if self.k == 0 || self.k > candidates.len() {
            return Err(Error::Solver(format!(
                "k = {} must be in 1..={} (candidate count)",
                self.k,
                candidates.len()
            )));
        }
        Ok(candidates)
    }
}

pub(crate) fn resolve_candidates(candidates: Option<&[usize]>, n: usize) -> Result<Vec<usize>> {
    let mut out = match candidates {
        Some(c) => c.to_vec(),
        None => (0..n).collect(),
    };
    out.sort_unstable();
    out.dedup();
    if let Some(&node) = out.iter().find(|&&c| c >= n) {
        return Err(Error::NodeOutOfRange { node, n });
    }
    if out.is_empty() {
        return Err(Error::Solver("empty candidate set".into()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedNode {
    pub node: usize,
    /// Score the node was ranked by (first-order estimate, or greedy gain).
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrunedNode {
    pub node: usize,
    /// Earlier survivor whose contribution overlaps this node's.
    pub blocker: usize,
    /// `v~_blocker(node)`; absent when the node was pruned for a non-positive
    /// first-order estimate.
    pub second_order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub algorithm: String,
    pub chosen: Vec<usize>,
    pub ordering: Vec<RankedNode>,
    pub pruned: Vec<PrunedNode>,
    /// Pruned nodes re-added, in ranking order, because fewer than k survived.
    pub backfilled: Vec<usize>,
    /// `(a, b)` pairs whose second-order estimate lacked data and were treated as non-overlapping.
    pub unresolved_pairs: Vec<(usize, usize)>,
    pub config: SolverConfig,
}

impl SolverResult {
    /// JSON export; the ordering is truncated to the top [`JSON_ORDERING_LIMIT`].
    pub fn write_json(&self, w: impl Write) -> Result<()> {
        let mut view = self.clone();
        view.ordering.truncate(JSON_ORDERING_LIMIT);
        serde_json::to_writer_pretty(w, &view)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<SolverResult> {
        Ok(serde_json::from_str(text)?)
    }
}
