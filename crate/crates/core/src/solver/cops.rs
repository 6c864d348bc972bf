//! COPS: order nodes by first-order marginal contribution, then prune every
//! node whose contribution overlaps that of an earlier survivor.

use std::cmp::Ordering;
use std::collections::HashMap;

use super::{PrunedNode, RankedNode, SolverConfig, SolverResult};
use crate::error::{Error, Result};
use crate::estimators::{first_order, MarginalTable};
use crate::sampling::SampleSet;

/// The overlap test on raw estimates.
///
/// `alpha >= 1` never overlaps. A missing or non-positive `v_a` always
/// overlaps. A missing second-order estimate never does. Otherwise `a`
/// overlaps iff `v_b_a < (1 - alpha) * v_a`.
pub fn overlap_rule(v_a: Option<f64>, v_b_a: Option<f64>, alpha: f64) -> bool {
    if alpha >= 1.0 {
        return false;
    }
    match (v_a, v_b_a) {
        (None, _) => true,
        (Some(v), _) if v <= 0.0 => true,
        (Some(_), None) => false,
        (Some(v), Some(vb)) => vb < (1.0 - alpha) * v,
    }
}

/// Whether `a`'s marginal contribution overlaps `b`'s by at least `alpha`.
pub fn overlap(table: &MarginalTable<'_>, a: usize, b: usize, alpha: f64) -> Result<bool> {
    let v_a = table.first(a).estimate;
    if alpha >= 1.0 || v_a.is_none_or(|v| v <= 0.0) {
        if a == b {
            return Err(Error::Invalid(format!("overlap needs a != b (got {a})")));
        }
        return Ok(overlap_rule(v_a, None, alpha));
    }
    let second = table.second(a, b)?;
    Ok(overlap_rule(v_a, second.estimate, alpha))
}

fn rank_class(v: Option<f64>) -> u8 {
    match v {
        Some(x) if x > 0.0 => 0,
        Some(_) => 1,
        None => 2,
    }
}

/// Candidates by first-order estimate descending, ties by node id. Nodes with
/// non-positive estimates follow, then nodes with insufficient data.
pub fn rank_nodes(table: &MarginalTable<'_>, candidates: &[usize]) -> Vec<RankedNode> {
    let mut ranked: Vec<RankedNode> = candidates
        .iter()
        .map(|&node| RankedNode {
            node,
            value: table.first(node).estimate,
        })
        .collect();
    ranked.sort_by(|x, y| {
        rank_class(x.value)
            .cmp(&rank_class(y.value))
            .then_with(|| match (x.value, y.value) {
                (Some(a), Some(b)) => b.partial_cmp(&a).unwrap_or(Ordering::Equal),
                _ => Ordering::Equal,
            })
            .then_with(|| x.node.cmp(&y.node))
    });
    ranked
}

/// Outcome of the pruning scan.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Pruning {
    pub survivors: Vec<usize>,
    pub pruned: Vec<PrunedNode>,
    pub unresolved_pairs: Vec<(usize, usize)>,
}

/// Scans `ordering`, pruning each node that overlaps an earlier survivor.
/// Stops once `limit` survivors are found (`None` scans everything).
pub fn prune_ordering(
    table: &MarginalTable<'_>,
    ordering: &[RankedNode],
    alpha: f64,
    limit: Option<usize>,
) -> Result<Pruning> {
    let mut out = Pruning::default();
    for r in ordering {
        if limit.is_some_and(|l| out.survivors.len() >= l) {
            break;
        }
        let a = r.node;
        let mut blocker = None;
        if alpha < 1.0 {
            for &b in &out.survivors {
                if r.value.is_none_or(|v| v <= 0.0) {
                    blocker = Some((b, None));
                    break;
                }
                let second = table.second(a, b)?;
                if second.estimate.is_none() {
                    out.unresolved_pairs.push((a, b));
                }
                if overlap_rule(r.value, second.estimate, alpha) {
                    blocker = Some((b, second.estimate));
                    break;
                }
            }
        }
        match blocker {
            Some((b, second_order)) => out.pruned.push(PrunedNode {
                node: a,
                blocker: b,
                second_order,
            }),
            None => out.survivors.push(a),
        }
    }
    Ok(out)
}

fn check_table(table: &MarginalTable<'_>, candidates: &[usize]) -> Result<()> {
    if candidates.iter().all(|&c| table.first(c).insufficient()) {
        return Err(Error::Solver(format!(
            "every candidate lacks data for a first-order estimate (min_count = {}, m = {})",
            table.min_count(),
            table.sample_set().len()
        )));
    }
    Ok(())
}

/// COPS on a prebuilt table (its `min_count` takes precedence over the config's).
pub fn run_cops_on(table: &MarginalTable<'_>, config: &SolverConfig) -> Result<SolverResult> {
    let candidates = config.resolve_candidates(table.n())?;
    check_table(table, &candidates)?;
    let ordering = rank_nodes(table, &candidates);
    let pruning = prune_ordering(table, &ordering, config.alpha, Some(config.k))?;
    let mut chosen = pruning.survivors;
    let mut backfilled = Vec::new();
    for p in &pruning.pruned {
        if chosen.len() >= config.k {
            break;
        }
        chosen.push(p.node);
        backfilled.push(p.node);
    }
    if !backfilled.is_empty() {
        let rank: HashMap<usize, usize> = ordering.iter().enumerate().map(|(i, r)| (r.node, i)).collect();
        chosen.sort_by_key(|a| rank[a]);
    }
    Ok(SolverResult {
        algorithm: "cops".into(),
        chosen,
        ordering,
        pruned: pruning.pruned,
        backfilled,
        unresolved_pairs: pruning.unresolved_pairs,
        config: config.clone(),
    })
}

pub fn run_cops(set: &SampleSet, config: &SolverConfig) -> Result<SolverResult> {
    run_cops_on(&first_order(set, config.min_count), config)
}

/// MargI: the k highest first-order estimates, no pruning.
pub fn run_margi_on(table: &MarginalTable<'_>, config: &SolverConfig) -> Result<SolverResult> {
    let candidates = config.resolve_candidates(table.n())?;
    check_table(table, &candidates)?;
    let ordering = rank_nodes(table, &candidates);
    let chosen = ordering.iter().take(config.k).map(|r| r.node).collect();
    Ok(SolverResult {
        algorithm: "margi".into(),
        chosen,
        ordering,
        pruned: Vec::new(),
        backfilled: Vec::new(),
        unresolved_pairs: Vec::new(),
        config: config.clone(),
    })
}

pub fn run_margi(set: &SampleSet, config: &SolverConfig) -> Result<SolverResult> {
    run_margi_on(&first_order(set, config.min_count), config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Community, CommunityLayout, Edge, WeightedGraph};
    use crate::sampling::{draw_samples, uniform_expected_k, Network, ProductDistribution, SampleMode};

    #[test]
    fn overlap_threshold_arithmetic() {
        assert!(!overlap_rule(Some(10.0), Some(6.0), 0.5));
        assert!(overlap_rule(Some(10.0), Some(6.0), 0.3));
        assert!(overlap_rule(Some(-1.0), Some(6.0), 0.3));
        assert!(overlap_rule(None, Some(6.0), 0.3));
        assert!(!overlap_rule(Some(10.0), None, 0.3));
        assert!(!overlap_rule(Some(10.0), Some(-5.0), 1.0));
        assert!(!overlap_rule(Some(-10.0), Some(-5.0), 1.0));
    }

    #[test]
    fn overlap_extreme_cases() {
        let d = ProductDistribution::uniform(2, 0.5).unwrap();
        let edge = WeightedGraph::new(2, vec![Edge::new(0, 1, 1.0)]).unwrap();
        let set = draw_samples(Network::Graph(&edge), &d, 100_000, SampleMode::FixedGraph, 1).unwrap();
        let table = first_order(&set, 30);
        assert!(overlap(&table, 0, 1, 0.5).unwrap());
        assert!(overlap(&table, 0, 0, 0.5).is_err());

        let isolated = WeightedGraph::empty(2);
        let set = draw_samples(Network::Graph(&isolated), &d, 100_000, SampleMode::FixedGraph, 1).unwrap();
        let table = first_order(&set, 30);
        for alpha in [0.1, 0.5, 0.9] {
            assert!(!overlap(&table, 0, 1, alpha).unwrap());
        }
    }

    fn four_community() -> CommunityLayout {
        CommunityLayout::new(
            [6, 4, 4, 4].iter().map(|&s| Community::new(s, 1.0, 1.0)).collect(),
            0.0,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn four_community_cops_is_diverse() {
        let layout = four_community();
        let (g, _) = crate::graph::generate_sbm(&layout, 1).unwrap();
        let d = uniform_expected_k(18, 4).unwrap();
        let set = draw_samples(Network::Graph(&g), &d, 50_000, SampleMode::FixedGraph, 2).unwrap();
        let res = run_cops(&set, &SolverConfig::new(4, 0.5)).unwrap();
        let mut comms: Vec<usize> = res.chosen.iter().map(|&a| layout.community_of(a)).collect();
        comms.sort();
        assert_eq!(comms, vec![0, 1, 2, 3]);
        assert!(res.backfilled.is_empty());
    }

    #[test]
    fn four_community_margi_stays_in_largest_community() {
        // Marginals below ~0.18 are needed for size-6 nodes to outrank size-4 ones.
        let layout = four_community();
        let (g, _) = crate::graph::generate_sbm(&layout, 1).unwrap();
        let d = ProductDistribution::uniform(18, 0.1).unwrap();
        let set = draw_samples(Network::Graph(&g), &d, 50_000, SampleMode::FixedGraph, 3).unwrap();
        let res = run_margi(&set, &SolverConfig::new(4, 0.5)).unwrap();
        assert!(res.chosen.iter().all(|&a| layout.community_of(a) == 0), "{:?}", res.chosen);
        let cops = run_cops(&set, &SolverConfig::new(4, 0.5)).unwrap();
        let mut comms: Vec<usize> = cops.chosen.iter().map(|&a| layout.community_of(a)).collect();
        comms.sort();
        assert_eq!(comms, vec![0, 1, 2, 3]);
    }

    #[test]
    fn edgeless_graph_has_no_pruning() {
        let g = WeightedGraph::empty(20);
        let d = uniform_expected_k(20, 5).unwrap();
        let set = draw_samples(Network::Graph(&g), &d, 40_000, SampleMode::FixedGraph, 4).unwrap();
        let res = run_cops(&set, &SolverConfig::new(5, 0.5)).unwrap();
        assert_eq!(res.chosen.len(), 5);
        assert!(res.pruned.is_empty());
        assert!(res.ordering.iter().all(|r| (r.value.unwrap() - 1.0).abs() < 0.1));
    }

    #[test]
    fn alpha_one_matches_margi() {
        let layout = CommunityLayout::dense(&[12, 8, 6], 3.0).unwrap();
        let d = uniform_expected_k(26, 3).unwrap();
        let set = draw_samples(Network::Layout(&layout), &d, 5_000, SampleMode::RedrawnGraph, 5).unwrap();
        let cfg = SolverConfig::new(3, 1.0).with_min_count(5);
        let cops = run_cops(&set, &cfg).unwrap();
        let margi = run_margi(&set, &cfg).unwrap();
        assert_eq!(cops.chosen, margi.chosen);
        assert_eq!(cops.ordering, margi.ordering);
        assert!(cops.pruned.is_empty());
    }

    #[test]
    fn backfill_when_too_few_survive() {
        // One clique: every node after the first is pruned.
        let layout = CommunityLayout::new(vec![Community::new(6, 1.0, 1.0)], 0.0, 0.0).unwrap();
        let (g, _) = crate::graph::generate_sbm(&layout, 1).unwrap();
        let d = uniform_expected_k(6, 1).unwrap();
        let set = draw_samples(Network::Graph(&g), &d, 20_000, SampleMode::FixedGraph, 6).unwrap();
        let res = run_cops(&set, &SolverConfig::new(3, 0.5)).unwrap();
        assert_eq!(res.chosen.len(), 3);
        assert_eq!(res.backfilled.len(), 2);
        assert_eq!(&res.chosen[1..], &res.backfilled[..]);
        let first = res.ordering[0].node;
        assert!(res.pruned.iter().all(|p| p.blocker == first));
    }

    #[test]
    fn errors() {
        let g = WeightedGraph::empty(4);
        let d = uniform_expected_k(4, 1).unwrap();
        let set = draw_samples(Network::Graph(&g), &d, 10, SampleMode::FixedGraph, 7).unwrap();
        assert!(matches!(run_cops(&set, &SolverConfig::new(2, 0.5)), Err(Error::Solver(_))));
        let cfg = SolverConfig::new(5, 0.5).with_min_count(1);
        assert!(run_cops(&set, &cfg).is_err());
        let cfg = SolverConfig::new(2, 1.5).with_min_count(1);
        assert!(run_cops(&set, &cfg).is_err());
        let cfg = SolverConfig::new(1, 0.5).with_min_count(1).with_candidates(vec![9]);
        assert!(run_margi(&set, &cfg).is_err());
    }

    #[test]
    fn candidates_restrict_choice() {
        let g = WeightedGraph::empty(10);
        let d = uniform_expected_k(10, 3).unwrap();
        let set = draw_samples(Network::Graph(&g), &d, 5_000, SampleMode::FixedGraph, 8).unwrap();
        let cfg = SolverConfig::new(2, 0.5).with_candidates(vec![7, 3, 9]);
        let res = run_cops(&set, &cfg).unwrap();
        assert!(res.chosen.iter().all(|c| [3, 7, 9].contains(c)));
        assert_eq!(res.ordering.len(), 3);
    }
}
