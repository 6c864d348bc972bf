use rand::Rng;

use super::{CommunityLayout, Edge, WeightedGraph};
use crate::error::{check_probability, Error, Result};
use crate::rng::{self, SimRng};
use crate::union_find::UnionFind;

/// Blocks up to this many nodes per side use per-pair Bernoulli draws under
/// [`EdgeSampling::Auto`]; larger ones use geometric skipping.
pub const BERNOULLI_MAX_BLOCK: usize = 10_000;

/// How independent pair indicators are realized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EdgeSampling {
    #[default]
    Auto,
    /// One uniform draw per pair.
    Bernoulli,
    /// Geometric jumps between successive edges (cost proportional to edges).
    GeometricSkip,
}

impl EdgeSampling {
    fn resolve(self, block: usize) -> EdgeSampling {
        match self {
            EdgeSampling::Auto if block <= BERNOULLI_MAX_BLOCK => EdgeSampling::Bernoulli,
            EdgeSampling::Auto => EdgeSampling::GeometricSkip,
            other => other,
        }
    }
}

fn geometric_skip<R: Rng>(rng: &mut R, log_q: f64) -> usize {
    let r: f64 = rng.random();
    // (1 - r) is in (0, 1], so the ratio is finite and non-negative.
    ((1.0 - r).ln() / log_q).floor() as usize
}

/// Emits each unordered pair `(i, j)`, `i < j < size`, independently with probability `p`.
fn within_block<R: Rng>(
    size: usize,
    p: f64,
    method: EdgeSampling,
    rng: &mut R,
    mut emit: impl FnMut(usize, usize, &mut R),
) {
    if size < 2 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for j in 1..size {
            for i in 0..j {
                emit(i, j, rng);
            }
        }
        return;
    }
    match method.resolve(size) {
        EdgeSampling::GeometricSkip => {
            let log_q = (1.0 - p).ln();
            let (mut v, mut w) = (1usize, 0usize);
            let mut first = true;
            loop {
                let skip = geometric_skip(rng, log_q);
                w = if first { skip } else { w.saturating_add(1).saturating_add(skip) };
                first = false;
                while v < size && w >= v {
                    w -= v;
                    v += 1;
                }
                if v >= size {
                    break;
                }
                emit(w, v, rng);
            }
        }
        _ => {
            for j in 1..size {
                for i in 0..j {
                    if rng.random::<f64>() < p {
                        emit(i, j, rng);
                    }
                }
            }
        }
    }
}

/// Emits each pair `(i, j)`, `i < left`, `j < right`, independently with probability `p`.
fn between_blocks<R: Rng>(
    left: usize,
    right: usize,
    p: f64,
    method: EdgeSampling,
    rng: &mut R,
    mut emit: impl FnMut(usize, usize, &mut R),
) {
    if left == 0 || right == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for i in 0..left {
            for j in 0..right {
                emit(i, j, rng);
            }
        }
        return;
    }
    match method.resolve(left.max(right)) {
        EdgeSampling::GeometricSkip => {
            let total = left * right;
            let log_q = (1.0 - p).ln();
            let mut idx = geometric_skip(rng, log_q);
            while idx < total {
                emit(idx / right, idx % right, rng);
                idx = idx.saturating_add(1).saturating_add(geometric_skip(rng, log_q));
            }
        }
        _ => {
            for i in 0..left {
                for j in 0..right {
                    if rng.random::<f64>() < p {
                        emit(i, j, rng);
                    }
                }
            }
        }
    }
}

fn ordered(a: usize, b: usize, q: f64) -> Edge {
    Edge::new(a.min(b), a.max(b), q)
}

/// Stochastic block model draw. Intra-community pairs of community `C` become
/// edges with probability `q_sb(C)` and carry cascade weight `q_ic(C)`;
/// inter-community pairs become edges with probability `q_inter` and carry
/// `q_ic_inter` (omitted entirely when that weight is zero).
pub fn generate_sbm(layout: &CommunityLayout, rng_seed: u64) -> Result<(WeightedGraph, CommunityLayout)> {
    generate_sbm_with(layout, rng_seed, EdgeSampling::Auto)
}

pub fn generate_sbm_with(
    layout: &CommunityLayout,
    rng_seed: u64,
    method: EdgeSampling,
) -> Result<(WeightedGraph, CommunityLayout)> {
    let mut rng = rng::seeded(rng_seed);
    let mut edges = Vec::new();
    sbm_edges(layout, method, &mut rng, |u, v, q, _| edges.push(ordered(u, v, q)));
    Ok((WeightedGraph::from_parts(layout.n(), edges), layout.clone()))
}

fn sbm_edges<R: Rng>(
    layout: &CommunityLayout,
    method: EdgeSampling,
    rng: &mut R,
    mut emit: impl FnMut(usize, usize, f64, &mut R),
) {
    let comms = layout.communities();
    for (c, comm) in comms.iter().enumerate() {
        let members = layout.members(c);
        within_block(members.len(), comm.q_sb, method, rng, |i, j, r| {
            emit(members[i], members[j], comm.q_ic, r)
        });
    }
    if layout.q_inter() > 0.0 && layout.q_ic_inter() > 0.0 {
        let q = layout.q_ic_inter();
        for c1 in 0..comms.len() {
            for c2 in c1 + 1..comms.len() {
                let (m1, m2) = (layout.members(c1), layout.members(c2));
                between_blocks(m1.len(), m2.len(), layout.q_inter(), method, rng, |i, j, r| {
                    emit(m1[i], m2[j], q, r)
                });
            }
        }
    }
}

/// Draws a fresh SBM graph and one cascade realization on it, leaving the
/// live-edge components in `uf` (which is reset first).
pub(crate) fn sample_live_sbm(layout: &CommunityLayout, rng: &mut SimRng, uf: &mut UnionFind) {
    uf.reset();
    sbm_edges(layout, EdgeSampling::Auto, rng, |u, v, q, r| {
        if q >= 1.0 || (q > 0.0 && r.random::<f64>() < q) {
            uf.union(u, v);
        }
    });
}

/// Erdős–Rényi `G(n, p)` with uniform cascade weight `q_ic`.
pub fn generate_er(n: usize, p: f64, q_ic: f64, rng_seed: u64) -> Result<WeightedGraph> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    check_probability("p", p)?;
    check_probability("q_ic", q_ic)?;
    let mut rng = rng::seeded(rng_seed);
    let mut edges = Vec::new();
    within_block(n, p, EdgeSampling::Auto, &mut rng, |i, j, _| edges.push(Edge::new(i, j, q_ic)));
    Ok(WeightedGraph::from_parts(n, edges))
}

/// Barabási–Albert preferential attachment.
///
/// Bootstrap: nodes `0..=edges_per_node` form a clique. Every later node `t`
/// then attaches to `edges_per_node` distinct earlier nodes, each drawn with
/// probability proportional to its current degree. The edge count is
/// therefore exactly `m(m+1)/2 + (n - m - 1) m` for `m = edges_per_node`.
pub fn generate_pa(n: usize, edges_per_node: usize, q_ic: f64, rng_seed: u64) -> Result<WeightedGraph> {
    let m = edges_per_node;
    if m == 0 || n <= m {
        return Err(Error::Invalid(format!(
            "preferential attachment needs n > edges_per_node >= 1 (n={n}, edges_per_node={m})"
        )));
    }
    check_probability("q_ic", q_ic)?;
    let mut rng = rng::seeded(rng_seed);
    let mut edges = Vec::with_capacity(m * (m + 1) / 2 + (n - m - 1) * m);
    // Each edge contributes both endpoints, so uniform picks are degree-proportional.
    let mut endpoints = Vec::with_capacity(2 * edges.capacity());
    for v in 1..=m {
        for u in 0..v {
            edges.push(Edge::new(u, v, q_ic));
            endpoints.extend([u, v]);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for t in m + 1..n {
        targets.clear();
        while targets.len() < m {
            let pick = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&pick) {
                targets.push(pick);
            }
        }
        targets.sort_unstable();
        for &u in &targets {
            edges.push(Edge::new(u, t, q_ic));
            endpoints.extend([u, t]);
        }
    }
    Ok(WeightedGraph::from_parts(n, edges))
}
