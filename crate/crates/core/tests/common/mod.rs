//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use cops_core::cascade::influence_exact;
use cops_core::graph::{Edge, WeightedGraph};
use rand::Rng;

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, edges: usize) -> WeightedGraph {
    let mut pairs: Vec<(usize, usize)> = (1..n).flat_map(|v| (0..v).map(move |u| (u, v))).collect();
    let mut out = Vec::new();
    for _ in 0..edges.min(pairs.len()) {
        let (u, v) = pairs.swap_remove(rng.random_range(0..pairs.len()));
        out.push(Edge::new(u, v, rng.random_range(0.05..0.95)));
    }
    WeightedGraph::new(n, out).unwrap()
}

/// Exact `v(a)` and `v_b(a)` under a product distribution, by enumerating all seed sets.
pub struct ExactContributions {
    pub first: Vec<f64>,
    pub second: Vec<Vec<f64>>,
}

pub fn exact_contributions(graph: &WeightedGraph, marginals: &[f64]) -> ExactContributions {
    let n = graph.n();
    let f: Vec<f64> = (0..1u32 << n)
        .map(|mask| {
            let seeds: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            influence_exact(graph, &seeds).unwrap()
        })
        .collect();
    // Probability of `mask` restricted to nodes outside `fixed`.
    let prob = |mask: u32, fixed: u32| -> f64 {
        (0..n)
            .filter(|&i| fixed >> i & 1 == 0)
            .map(|i| if mask >> i & 1 == 1 { marginals[i] } else { 1.0 - marginals[i] })
            .product()
    };
    let mut first = vec![0.0; n];
    let mut second = vec![vec![0.0; n]; n];
    for a in 0..n {
        let abit = 1u32 << a;
        for mask in (0..1u32 << n).filter(|m| m & abit == 0) {
            let gain = f[(mask | abit) as usize] - f[mask as usize];
            first[a] += prob(mask, abit) * gain;
            for b in (0..n).filter(|&b| b != a && mask >> b & 1 == 1) {
                second[a][b] += prob(mask, abit | 1 << b) * gain;
            }
        }
    }
    ExactContributions { first, second }
}
