//! Independent cascade diffusion on undirected graphs.
//!
//! On an undirected graph a cascade from seed set `S` reaches exactly the
//! nodes connected to `S` in the random live-edge subgraph, where each edge is
//! live independently with its probability `q`. Influence is therefore
//! component reachability.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng::{self, SimRng};
use crate::union_find::UnionFind;

/// Exact enumeration is refused above this many edges.
pub const EXACT_EDGE_LIMIT: usize = 25;

/// One random live-edge subgraph and its connected components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CascadeRealization {
    /// Indices into `graph.edges()` of the live edges.
    pub live_edges: Vec<usize>,
    pub component_of: Vec<u32>,
    pub component_size: Vec<u32>,
}

impl CascadeRealization {
    pub fn n(&self) -> usize {
        self.component_of.len()
    }

    /// Number of nodes connected to `seeds`; shared components count once.
    pub fn influenced_count(&self, seeds: &[usize]) -> Result<usize> {
        let n = self.n();
        let mut seen = vec![false; self.component_size.len()];
        let mut total = 0;
        for &s in seeds {
            if s >= n {
                return Err(Error::NodeOutOfRange { node: s, n });
            }
            let c = self.component_of[s] as usize;
            if !seen[c] {
                seen[c] = true;
                total += self.component_size[c] as usize;
            }
        }
        Ok(total)
    }
}

/// Keeps each edge live with its probability and labels the components.
pub fn realize(graph: &WeightedGraph, rng_seed: u64) -> CascadeRealization {
    realize_with(graph, &mut rng::seeded(rng_seed))
}

pub fn realize_with<R: Rng>(graph: &WeightedGraph, rng: &mut R) -> CascadeRealization {
    let mut uf = UnionFind::new(graph.n());
    let mut live_edges = Vec::new();
    for (i, e) in graph.edges().iter().enumerate() {
        if is_live(e.q, rng) {
            live_edges.push(i);
            uf.union(e.u, e.v);
        }
    }
    let (component_of, component_size) = uf.labels();
    CascadeRealization {
        live_edges,
        component_of,
        component_size,
    }
}

#[inline]
fn is_live<R: Rng>(q: f64, rng: &mut R) -> bool {
    // One draw per edge regardless of q keeps streams aligned across weightings.
    rng.random::<f64>() < q
}

/// Joins the live edges of one realization into `uf` (which is reset first).
pub(crate) fn live_components(graph: &WeightedGraph, rng: &mut SimRng, uf: &mut UnionFind) {
    uf.reset();
    for e in graph.edges() {
        if is_live(e.q, rng) {
            uf.union(e.u, e.v);
        }
    }
}

pub fn influenced_count(real: &CascadeRealization, seeds: &[usize]) -> Result<usize> {
    real.influenced_count(seeds)
}

/// Monte Carlo estimate of expected influence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceEstimate {
    pub mean: f64,
    /// Sample standard deviation (unbiased) over `sqrt(realizations)`.
    pub std_error: f64,
    pub realizations: usize,
    /// Set when a single realization makes the standard error meaningless.
    pub low_sample_warning: bool,
}

impl InfluenceEstimate {
    /// Builds the estimate from exact integer moments, so the result does not
    /// depend on summation order.
    pub(crate) fn from_moments(sum: u128, sum_sq: u128, count: usize) -> Self {
        let r = count as f64;
        let mean = sum as f64 / r;
        let std_error = if count > 1 {
            // count * sum_sq - sum^2 is exact in integers.
            let num = (count as u128 * sum_sq).saturating_sub(sum * sum) as f64;
            (num / (r * (r - 1.0))).sqrt() / r.sqrt()
        } else {
            0.0
        };
        InfluenceEstimate {
            mean,
            std_error,
            realizations: count,
            low_sample_warning: count == 1,
        }
    }
}

pub(crate) fn check_seeds(seeds: &[usize], n: usize) -> Result<()> {
    match seeds.iter().find(|&&s| s >= n) {
        Some(&node) => Err(Error::NodeOutOfRange { node, n }),
        None => Ok(()),
    }
}

/// Averages the influenced count over `realizations` independent cascades.
/// Realization `i` draws from stream `i` under `rng_seed`, so the result is
/// independent of the rayon thread count.
pub fn influence_mc(
    graph: &WeightedGraph,
    seeds: &[usize],
    realizations: usize,
    rng_seed: u64,
) -> Result<InfluenceEstimate> {
    check_seeds(seeds, graph.n())?;
    mc_moments(graph.n(), seeds, realizations, rng_seed, |rng, uf| {
        live_components(graph, rng, uf)
    })
}

/// Shared Monte Carlo driver: `draw` fills the union-find with one realization.
pub(crate) fn mc_moments<F>(
    n: usize,
    seeds: &[usize],
    realizations: usize,
    rng_seed: u64,
    draw: F,
) -> Result<InfluenceEstimate>
where
    F: Fn(&mut SimRng, &mut UnionFind) + Sync,
{
    if realizations == 0 {
        return Err(Error::Invalid("realizations must be at least 1".into()));
    }
    if seeds.is_empty() {
        return Ok(InfluenceEstimate::from_moments(0, 0, realizations));
    }
    let base = rng::seeded(rng_seed);
    let (sum, sum_sq) = (0..realizations as u64)
        .into_par_iter()
        .map_init(
            || (UnionFind::new(n), vec![false; n]),
            |(uf, mark), i| {
                let mut rng = rng::stream_from(&base, i);
                draw(&mut rng, uf);
                let c = uf.covered(seeds, mark) as u128;
                (c, c * c)
            },
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(InfluenceEstimate::from_moments(sum, sum_sq, realizations))
}

/// Exact expected influence by enumerating every live-edge subset.
///
/// Edges with `q` of exactly 0 or 1 are deterministic and not branched on,
/// but the guard applies to the total edge count.
pub fn influence_exact(graph: &WeightedGraph, seeds: &[usize]) -> Result<f64> {
    let edges = graph.edges();
    if edges.len() > EXACT_EDGE_LIMIT {
        return Err(Error::TooManyEdges {
            edges: edges.len(),
            limit: EXACT_EDGE_LIMIT,
        });
    }
    check_seeds(seeds, graph.n())?;
    if seeds.is_empty() {
        return Ok(0.0);
    }
    let n = graph.n();
    let mut fixed = UnionFind::new(n);
    let mut random = Vec::new();
    for e in edges {
        if e.q >= 1.0 {
            fixed.union(e.u, e.v);
        } else if e.q > 0.0 {
            random.push(*e);
        }
    }
    let mut uf = fixed.clone();
    let mut mark = vec![false; n];
    let mut total = 0.0;
    for mask in 0u64..(1u64 << random.len()) {
        uf.copy_from(&fixed);
        let mut prob = 1.0;
        for (i, e) in random.iter().enumerate() {
            if mask >> i & 1 == 1 {
                prob *= e.q;
                uf.union(e.u, e.v);
            } else {
                prob *= 1.0 - e.q;
            }
        }
        total += prob * uf.covered(seeds, &mut mark) as f64;
    }
    Ok(total)
}
