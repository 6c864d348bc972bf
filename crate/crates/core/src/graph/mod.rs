//! Weighted undirected graphs, community layouts and their generators.

mod generate;
mod io;
mod regime;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::union_find::UnionFind;

pub use generate::{
    generate_er, generate_pa, generate_sbm, generate_sbm_with, EdgeSampling,
    BERNOULLI_MAX_BLOCK,
};
pub(crate) use generate::sample_live_sbm;
pub use io::{
    load_edge_list, read_community_file, read_edge_list, save_edge_list, write_edge_list,
    LoadedGraph,
};
pub use regime::{classify_regimes, Regime, RegimeLabel};

/// An undirected edge carrying its independent-cascade activation probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub q: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, q: f64) -> Self {
        Edge { u, v, q }
    }
}

/// Undirected graph on nodes `0..n` with per-edge activation probabilities.
///
/// Edges are stored with `u < v`; there are no self-loops or duplicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Validates and normalizes `edges` (orientation is irrelevant).
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut out = Vec::with_capacity(edges.len());
        for e in edges {
            if e.u == e.v {
                return Err(Error::Invalid(format!("self-loop on node {}", e.u)));
            }
            for node in [e.u, e.v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            check_probability("edge q", e.q)?;
            let (u, v) = (e.u.min(e.v), e.u.max(e.v));
            if !seen.insert((u, v)) {
                return Err(Error::Invalid(format!("duplicate edge ({u}, {v})")));
            }
            out.push(Edge { u, v, q: e.q });
        }
        Ok(WeightedGraph { n, edges: out })
    }

    /// Caller guarantees the invariants (generators).
    pub(crate) fn from_parts(n: usize, edges: Vec<Edge>) -> Self {
        debug_assert!(edges.iter().all(|e| e.u < e.v && e.v < n));
        WeightedGraph { n, edges }
    }

    pub fn empty(n: usize) -> Self {
        WeightedGraph { n, edges: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Same structure, every edge weighted `q`.
    pub fn with_uniform_q(mut self, q: f64) -> Result<Self> {
        check_probability("q", q)?;
        for e in &mut self.edges {
            e.q = q;
        }
        Ok(self)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    /// Structural connected components (ignoring q).
    pub fn components(&self) -> UnionFind {
        let mut uf = UnionFind::new(self.n);
        for e in &self.edges {
            uf.union(e.u, e.v);
        }
        uf
    }

    pub fn largest_component_size(&self) -> usize {
        let (_, sizes) = self.components().labels();
        sizes.into_iter().max().unwrap_or(0) as usize
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.largest_component_size() == self.n
    }
}

/// Structural and cascade parameters of one community.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Community {
    pub size: usize,
    /// Probability that an intra-community pair is an edge.
    pub q_sb: f64,
    /// Cascade activation probability of intra-community edges.
    pub q_ic: f64,
}

impl Community {
    pub fn new(size: usize, q_sb: f64, q_ic: f64) -> Self {
        Community { size, q_sb, q_ic }
    }

    /// Community whose live-edge probability is `min(1, factor * ln|C| / |C|)`,
    /// split evenly as `q_sb = q_ic = sqrt(p)`.
    pub fn dense(size: usize, factor: f64) -> Self {
        let p = dense_live_probability(size, factor);
        Community::new(size, p.sqrt(), p.sqrt())
    }

    /// Live-edge probability `p_C = q_sb * q_ic`.
    pub fn p_live(&self) -> f64 {
        self.q_sb * self.q_ic
    }
}

pub(crate) fn dense_live_probability(size: usize, factor: f64) -> f64 {
    if size <= 1 {
        return 1.0;
    }
    let s = size as f64;
    (factor * s.ln() / s).min(1.0)
}

/// Partition of nodes into communities with per-community probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityLayout {
    communities: Vec<Community>,
    assignment: Vec<usize>,
    members: Vec<Vec<usize>>,
    /// Structural probability of an inter-community edge.
    q_inter: f64,
    /// Cascade probability of inter-community edges; when zero those edges are omitted.
    q_ic_inter: f64,
}

impl CommunityLayout {
    /// Contiguous layout: community 0 holds nodes `0..size_0`, and so on.
    pub fn new(communities: Vec<Community>, q_inter: f64, q_ic_inter: f64) -> Result<Self> {
        let assignment = communities
            .iter()
            .enumerate()
            .flat_map(|(c, comm)| std::iter::repeat_n(c, comm.size))
            .collect();
        Self::with_assignment(communities, assignment, q_inter, q_ic_inter)
    }

    /// Layout from an explicit node → community map; community sizes must match it.
    pub fn with_assignment(
        communities: Vec<Community>,
        assignment: Vec<usize>,
        q_inter: f64,
        q_ic_inter: f64,
    ) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::Invalid("layout has no nodes".into()));
        }
        check_probability("q_inter", q_inter)?;
        check_probability("q_ic_inter", q_ic_inter)?;
        for c in &communities {
            check_probability("q_sb", c.q_sb)?;
            check_probability("q_ic", c.q_ic)?;
        }
        let mut members = vec![Vec::new(); communities.len()];
        for (node, &c) in assignment.iter().enumerate() {
            let list = members.get_mut(c).ok_or_else(|| {
                Error::Invalid(format!("node {node} assigned to unknown community {c}"))
            })?;
            list.push(node);
        }
        for (c, (comm, list)) in communities.iter().zip(&members).enumerate() {
            if comm.size != list.len() {
                return Err(Error::Invalid(format!(
                    "community {c} declares size {} but has {} members",
                    comm.size,
                    list.len()
                )));
            }
        }
        Ok(CommunityLayout {
            communities,
            assignment,
            members,
            q_inter,
            q_ic_inter,
        })
    }

    /// Contiguous layout of dense communities with no inter-community edges.
    pub fn dense(sizes: &[usize], factor: f64) -> Result<Self> {
        let comms = sizes.iter().map(|&s| Community::dense(s, factor)).collect();
        Self::new(comms, 0.0, 0.0)
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn communities(&self) -> &[Community] {
        &self.communities
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn members(&self, community: usize) -> &[usize] {
        &self.members[community]
    }

    pub fn q_inter(&self) -> f64 {
        self.q_inter
    }

    pub fn q_ic_inter(&self) -> f64 {
        self.q_ic_inter
    }

    /// Community indices ordered by size descending, ties by index.
    pub fn by_size(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.communities.len()).collect();
        idx.sort_by_key(|&c| (std::cmp::Reverse(self.communities[c].size), c));
        idx
    }
}
