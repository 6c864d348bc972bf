//! Value-query Greedy (upper benchmark) and Random (lower benchmark).

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{resolve_candidates, RankedNode, SolverConfig, SolverResult};
use crate::cascade::influence_exact;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng;
use crate::sampling::{Network, SampleMode};
use crate::union_find::UnionFind;

/// Monte Carlo budget of the Greedy value oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub realizations_per_eval: usize,
    /// The round winner and runner-up are re-evaluated on
    /// `recheck_factor * realizations_per_eval` fresh realizations; 0 disables.
    pub recheck_factor: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            realizations_per_eval: 200,
            recheck_factor: 4,
        }
    }
}

/// Value-query access to the influence function.
pub trait ValueOracle: Sync {
    fn n(&self) -> usize;

    /// Marginal gains `f(S + a) - f(S)` of each candidate for greedy round `round`.
    fn gains(&self, current: &[usize], candidates: &[usize], round: u64) -> Result<Vec<f64>>;

    /// Higher-budget re-evaluation of the leading contenders, if the oracle is noisy.
    fn recheck(&self, _current: &[usize], _contenders: &[usize], _round: u64) -> Result<Option<Vec<f64>>> {
        Ok(None)
    }
}

/// Exact influence by live-edge enumeration (graphs of at most 25 edges).
pub struct ExactOracle<'g> {
    graph: &'g WeightedGraph,
}

impl<'g> ExactOracle<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Self {
        ExactOracle { graph }
    }
}

impl ValueOracle for ExactOracle<'_> {
    fn n(&self) -> usize {
        self.graph.n()
    }

    fn gains(&self, current: &[usize], candidates: &[usize], _round: u64) -> Result<Vec<f64>> {
        let base = influence_exact(self.graph, current)?;
        candidates
            .iter()
            .map(|&a| {
                let mut with = current.to_vec();
                with.push(a);
                Ok(influence_exact(self.graph, &with)? - base)
            })
            .collect()
    }
}

/// Monte Carlo oracle using common random realizations: within a round every
/// candidate is scored on the same set of live-edge subgraphs.
pub struct MonteCarloOracle<'a> {
    network: Network<'a>,
    budget: OracleBudget,
    seed: u64,
}

impl<'a> MonteCarloOracle<'a> {
    pub fn new(network: Network<'a>, mode: SampleMode, budget: OracleBudget, seed: u64) -> Result<Self> {
        network.check_mode(mode)?;
        if budget.realizations_per_eval == 0 {
            return Err(Error::Invalid("realizations_per_eval must be at least 1".into()));
        }
        Ok(MonteCarloOracle { network, budget, seed })
    }

    fn mean_gains(&self, current: &[usize], candidates: &[usize], realizations: usize, seed: u64) -> Vec<f64> {
        let n = self.network.n();
        let base = rng::seeded(seed);
        let sums = (0..realizations as u64)
            .into_par_iter()
            .fold(
                || (UnionFind::new(n), vec![false; n], vec![0u64; candidates.len()]),
                |(mut uf, mut covered, mut acc), i| {
                    let mut rng = rng::stream_from(&base, i);
                    self.network.draw_live(&mut rng, &mut uf);
                    for &s in current {
                        let r = uf.find(s);
                        covered[r] = true;
                    }
                    for (slot, &a) in acc.iter_mut().zip(candidates) {
                        let r = uf.find(a);
                        if !covered[r] {
                            *slot += uf.set_size(r) as u64;
                        }
                    }
                    for &s in current {
                        let r = uf.find(s);
                        covered[r] = false;
                    }
                    (uf, covered, acc)
                },
            )
            .map(|(_, _, acc)| acc)
            .reduce(
                || vec![0u64; candidates.len()],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        sums.into_iter().map(|s| s as f64 / realizations as f64).collect()
    }
}

impl ValueOracle for MonteCarloOracle<'_> {
    fn n(&self) -> usize {
        self.network.n()
    }

    fn gains(&self, current: &[usize], candidates: &[usize], round: u64) -> Result<Vec<f64>> {
        let seed = rng::derive(self.seed, round);
        Ok(self.mean_gains(current, candidates, self.budget.realizations_per_eval, seed))
    }

    fn recheck(&self, current: &[usize], contenders: &[usize], round: u64) -> Result<Option<Vec<f64>>> {
        if self.budget.recheck_factor == 0 {
            return Ok(None);
        }
        let seed = rng::derive_named(rng::derive(self.seed, round), "recheck");
        let r = self.budget.realizations_per_eval * self.budget.recheck_factor;
        Ok(Some(self.mean_gains(current, contenders, r, seed)))
    }
}

/// Greedy: `k` rounds, each adding the candidate of largest estimated gain
/// (ties to the smaller id). With a noisy oracle the winner and runner-up
/// are re-evaluated at a larger budget and swapped if the order reverses.
pub fn greedy_with_oracle<O: ValueOracle + ?Sized>(
    oracle: &O,
    k: usize,
    candidates: Option<&[usize]>,
) -> Result<SolverResult> {
    let mut remaining = resolve_candidates(candidates, oracle.n())?;
    if k == 0 || k > remaining.len() {
        return Err(Error::Solver(format!(
            "k = {k} must be in 1..={} (candidate count)",
            remaining.len()
        )));
    }
    let mut chosen = Vec::with_capacity(k);
    let mut ordering = Vec::with_capacity(k);
    for round in 0..k as u64 {
        let gains = oracle.gains(&chosen, &remaining, round)?;
        let mut best = 0;
        let mut second: Option<usize> = None;
        for i in 1..remaining.len() {
            if gains[i] > gains[best] {
                second = Some(best);
                best = i;
            } else if second.is_none_or(|s| gains[i] > gains[s]) {
                second = Some(i);
            }
        }
        let mut pick = best;
        let mut gain = gains[best];
        if let Some(s) = second {
            if let Some(re) = oracle.recheck(&chosen, &[remaining[best], remaining[s]], round)? {
                gain = re[0];
                if re[1] > re[0] {
                    pick = s;
                    gain = re[1];
                }
            }
        }
        let node = remaining.remove(pick);
        chosen.push(node);
        ordering.push(RankedNode { node, value: Some(gain) });
    }
    Ok(SolverResult {
        algorithm: "greedy".into(),
        chosen,
        ordering,
        pruned: Vec::new(),
        backfilled: Vec::new(),
        unresolved_pairs: Vec::new(),
        config: SolverConfig {
            k,
            alpha: 0.0,
            min_count: 0,
            candidates: candidates.map(<[usize]>::to_vec),
        },
    })
}

/// Greedy with a Monte Carlo oracle on `network`.
pub fn run_greedy(
    network: Network<'_>,
    mode: SampleMode,
    k: usize,
    budget: OracleBudget,
    rng_seed: u64,
    candidates: Option<&[usize]>,
) -> Result<SolverResult> {
    let oracle = MonteCarloOracle::new(network, mode, budget, rng_seed)?;
    greedy_with_oracle(&oracle, k, candidates)
}

/// Uniform random `k`-subset of the candidates (all nodes `0..n` if `None`).
pub fn run_random(n: usize, candidates: Option<&[usize]>, k: usize, rng_seed: u64) -> Result<SolverResult> {
    let pool = resolve_candidates(candidates, n)?;
    if k == 0 || k > pool.len() {
        return Err(Error::Solver(format!("k = {k} must be in 1..={} (candidate count)", pool.len())));
    }
    let mut rng = rng::seeded(rng_seed);
    let chosen: Vec<usize> = index::sample(&mut rng, pool.len(), k).into_iter().map(|i| pool[i]).collect();
    Ok(SolverResult {
        algorithm: "random".into(),
        ordering: chosen.iter().map(|&node| RankedNode { node, value: None }).collect(),
        chosen,
        pruned: Vec::new(),
        backfilled: Vec::new(),
        unresolved_pairs: Vec::new(),
        config: SolverConfig {
            k,
            alpha: 0.0,
            min_count: 0,
            candidates: candidates.map(<[usize]>::to_vec),
        },
    })
}
