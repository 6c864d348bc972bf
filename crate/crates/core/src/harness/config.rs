use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sampling::SampleMode;

/// Network family of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    /// One large community plus many small ones of random size.
    Sbm1,
    /// A fixed number of equal-size communities.
    Sbm2,
    Er,
    Pa,
    /// SNAP edge list at `path`.
    File,
}

impl NetworkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkKind::Sbm1 => "sbm1",
            NetworkKind::Sbm2 => "sbm2",
            NetworkKind::Er => "er",
            NetworkKind::Pa => "pa",
            NetworkKind::File => "file",
        }
    }
}

fn d_name() -> String {
    "experiment".into()
}
fn d_large_fraction() -> f64 {
    0.25
}
fn d_dense_factor() -> f64 {
    3.0
}
fn d_avg_degree() -> f64 {
    10.0
}
fn d_edges_per_node() -> usize {
    5
}
fn d_degree_min() -> usize {
    10
}
fn d_candidate_degree_min() -> usize {
    50
}
fn d_k() -> usize {
    10
}
fn d_alpha() -> f64 {
    0.5
}
fn d_m() -> usize {
    20_000
}
fn d_min_count() -> usize {
    crate::estimators::DEFAULT_MIN_COUNT
}
fn d_trials() -> usize {
    10
}
fn d_eval() -> usize {
    1000
}
fn d_true() -> bool {
    true
}
fn d_greedy_realizations() -> usize {
    200
}
fn d_recheck() -> usize {
    4
}

/// Experiment description, read from TOML. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "d_name")]
    pub name: String,
    pub network: NetworkKind,
    /// Node counts to sweep; ignored for `file` networks.
    #[serde(default)]
    pub sizes: Vec<usize>,
    pub path: Option<PathBuf>,

    /// SBM 2: community count (default 10). SBM 1: number of small
    /// communities (default sized so they average n/40 nodes).
    pub communities: Option<usize>,
    /// SBM 1: fraction of nodes in the large community.
    #[serde(default = "d_large_fraction")]
    pub large_fraction: f64,
    /// Intra-community live-edge probability `factor * ln|C| / |C|`, capped at 1.
    #[serde(default = "d_dense_factor")]
    pub dense_factor: f64,
    /// Overrides the structural intra-community probability (default `sqrt(p_C)`).
    pub q_sb: Option<f64>,
    /// Cascade weight. SBM default `sqrt(p_C)`; ER/PA/file default gives
    /// expected live degree 1.
    pub q_ic: Option<f64>,
    #[serde(default)]
    pub q_inter: f64,
    #[serde(default)]
    pub q_ic_inter: f64,
    #[serde(default = "d_avg_degree")]
    pub avg_degree: f64,
    #[serde(default = "d_edges_per_node")]
    pub edges_per_node: usize,
    #[serde(default = "d_degree_min")]
    pub degree_min: usize,
    #[serde(default = "d_candidate_degree_min")]
    pub candidate_degree_min: usize,

    /// Default: redrawn for SBM families, fixed otherwise.
    pub mode: Option<SampleMode>,
    #[serde(default = "d_k")]
    pub k: usize,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    /// When set, COPS runs once per value (on the same samples) instead of at `alpha`.
    pub alphas: Option<Vec<f64>>,
    #[serde(default = "d_m")]
    pub m: usize,
    #[serde(default = "d_min_count")]
    pub min_count: usize,
    #[serde(default = "d_trials")]
    pub trials: usize,
    #[serde(default = "d_eval")]
    pub eval_realizations: usize,
    #[serde(default = "d_true")]
    pub greedy: bool,
    #[serde(default = "d_greedy_realizations")]
    pub greedy_realizations: usize,
    #[serde(default = "d_recheck")]
    pub greedy_recheck_factor: usize,
    #[serde(default)]
    pub seed: u64,
    /// Wall-clock columns break byte-for-byte reproducibility, so they are off by default.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        // Relative network paths resolve against the config file.
        if let (Some(p), Some(dir)) = (&cfg.path, path.parent()) {
            if p.is_relative() && !p.exists() {
                cfg.path = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    /// Minimal config for `network` with every other field at its default.
    pub fn new(network: NetworkKind, sizes: Vec<usize>) -> Self {
        let mut cfg = Self::from_toml(&format!("network = \"{}\"", network.as_str()))
            .expect("default config parses");
        cfg.sizes = sizes;
        cfg
    }

    pub fn mode(&self) -> SampleMode {
        self.mode.unwrap_or(match self.network {
            NetworkKind::Sbm1 | NetworkKind::Sbm2 => SampleMode::RedrawnGraph,
            _ => SampleMode::FixedGraph,
        })
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.alphas.clone().unwrap_or_else(|| vec![self.alpha])
    }

    /// `name-xxxxxxxx`, the hash covering every field.
    pub fn digest(&self) -> String {
        let text = toml::to_string(self).unwrap_or_default();
        let hash = Sha256::digest(text.as_bytes());
        let hex: String = hash.iter().take(4).map(|b| format!("{b:02x}")).collect();
        format!("{}-{hex}", self.name)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        for (name, v) in [
            ("k", self.k),
            ("m", self.m),
            ("trials", self.trials),
            ("eval_realizations", self.eval_realizations),
            ("greedy_realizations", self.greedy_realizations),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        for a in self.alphas() {
            if !(0.0..=1.0).contains(&a) {
                return bad(format!("alpha {a} outside [0, 1]"));
            }
        }
        for (name, p) in [
            ("q_inter", Some(self.q_inter)),
            ("q_ic_inter", Some(self.q_ic_inter)),
            ("q_sb", self.q_sb),
            ("q_ic", self.q_ic),
            ("large_fraction", Some(self.large_fraction)),
        ] {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("{name} = {p} outside [0, 1]"));
                }
            }
        }
        match self.network {
            NetworkKind::File => match &self.path {
                None => return bad("file networks need `path`".into()),
                Some(p) if !p.exists() => return bad(format!("network file {} does not exist", p.display())),
                Some(_) => {}
            },
            _ => {
                if self.sizes.is_empty() {
                    return bad("`sizes` must list at least one node count".into());
                }
                if let Some(&n) = self.sizes.iter().find(|&&n| n < self.k.max(2)) {
                    return bad(format!("size {n} is smaller than k = {} (or 2)", self.k));
                }
            }
        }
        if self.network == NetworkKind::Pa && self.edges_per_node == 0 {
            return bad("edges_per_node must be at least 1".into());
        }
        if self.communities == Some(0) {
            return bad("communities must be at least 1".into());
        }
        if self.mode() == SampleMode::RedrawnGraph
            && !matches!(self.network, NetworkKind::Sbm1 | NetworkKind::Sbm2)
        {
            return bad("redrawn-graph mode is only available for SBM networks".into());
        }
        Ok(())
    }
}
