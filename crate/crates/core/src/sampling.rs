//! Seed-set samples `(S_i, |cc(S_i)|)` drawn from a bounded product distribution.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cascade::live_components;
use crate::error::{check_probability, Error, Result};
use crate::graph::{sample_live_sbm, CommunityLayout, WeightedGraph};
use crate::rng;
use crate::union_find::UnionFind;

/// Independent per-node inclusion probabilities, clamped to `[n^-3, 1 - n^-3]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductDistribution {
    marginals: Vec<f64>,
}

/// Allowed marginal range for `n` nodes.
pub fn marginal_bounds(n: usize) -> (f64, f64) {
    let eps = (n as f64).powi(-3);
    (eps.min(0.5), (1.0 - eps).max(0.5))
}

impl ProductDistribution {
    /// Validates each marginal is a probability, then clamps into the bounded range.
    pub fn new(marginals: Vec<f64>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::Invalid("distribution over zero nodes".into()));
        }
        let (lo, hi) = marginal_bounds(marginals.len());
        let mut out = marginals;
        for p in &mut out {
            check_probability("marginal", *p)?;
            *p = p.clamp(lo, hi);
        }
        Ok(ProductDistribution { marginals: out })
    }

    pub fn uniform(n: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; n])
    }

    pub fn n(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[f64] {
        &self.marginals
    }

    /// Draws one seed set (sorted ascending) into `out`.
    pub fn draw_into<R: Rng>(&self, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        for (node, &p) in self.marginals.iter().enumerate() {
            if rng.random::<f64>() < p {
                out.push(node);
            }
        }
    }

    /// Short hex digest of the marginals, for provenance records.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for p in &self.marginals {
            h.update(p.to_le_bytes());
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Product distribution with every marginal `k / n`, so samples have expected size `k`.
pub fn uniform_expected_k(n: usize, k: usize) -> Result<ProductDistribution> {
    if k == 0 || k > n {
        return Err(Error::Invalid(format!("expected size k={k} must be in 1..={n}")));
    }
    ProductDistribution::uniform(n, k as f64 / n as f64)
}

/// Whether the network is fixed across samples or redrawn for each one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    FixedGraph,
    #[default]
    RedrawnGraph,
}

impl std::fmt::Display for SampleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SampleMode::FixedGraph => "fixed_graph",
            SampleMode::RedrawnGraph => "redrawn_graph",
        })
    }
}

/// What a sample or cascade is drawn on: one graph, or a layout that is
/// re-sampled per draw.
#[derive(Clone, Copy, Debug)]
pub enum Network<'a> {
    Graph(&'a WeightedGraph),
    Layout(&'a CommunityLayout),
}

impl Network<'_> {
    pub fn n(&self) -> usize {
        match self {
            Network::Graph(g) => g.n(),
            Network::Layout(l) => l.n(),
        }
    }

    /// Checks the mode/input pairing: fixed graphs for `FixedGraph`, layouts for `RedrawnGraph`.
    pub fn check_mode(&self, mode: SampleMode) -> Result<()> {
        match (self, mode) {
            (Network::Graph(_), SampleMode::FixedGraph)
            | (Network::Layout(_), SampleMode::RedrawnGraph) => Ok(()),
            (Network::Graph(_), SampleMode::RedrawnGraph) => Err(Error::Invalid(
                "redrawn-graph mode needs a community layout, not a fixed graph".into(),
            )),
            (Network::Layout(_), SampleMode::FixedGraph) => Err(Error::Invalid(
                "fixed-graph mode needs a graph, not a community layout".into(),
            )),
        }
    }

    /// Fills `uf` with the live-edge components of one fresh realization.
    pub(crate) fn draw_live(&self, rng: &mut rng::SimRng, uf: &mut UnionFind) {
        match self {
            Network::Graph(g) => live_components(g, rng, uf),
            Network::Layout(l) => sample_live_sbm(l, rng, uf),
        }
    }
}

/// One observation: a seed set and the size of a single realized cascade from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    /// Sorted, distinct node ids.
    pub seeds: Vec<usize>,
    pub value: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSource {
    pub rng_seed: Option<u64>,
    pub marginals_digest: Option<String>,
    pub marginals: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    n: usize,
    samples: Vec<Sample>,
    mode: SampleMode,
    source: SampleSource,
}

impl SampleSet {
    /// Validated set: seeds in range and distinct, `|S| <= value <= n`.
    pub fn new(n: usize, samples: Vec<Sample>, mode: SampleMode, source: SampleSource) -> Result<Self> {
        let set = Self::from_observations(n, samples, mode, source)?;
        for (i, s) in set.samples.iter().enumerate() {
            if (s.value as usize) < s.seeds.len() || s.value as usize > n {
                return Err(Error::Invalid(format!(
                    "sample {i}: value {} outside [{}, {n}]",
                    s.value,
                    s.seeds.len()
                )));
            }
        }
        Ok(set)
    }

    /// Like [`SampleSet::new`] but accepts arbitrary non-negative values, for
    /// synthetic set functions that are not influence counts.
    pub fn from_observations(
        n: usize,
        mut samples: Vec<Sample>,
        mode: SampleMode,
        source: SampleSource,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Invalid("a sample set needs at least one sample".into()));
        }
        for s in &mut samples {
            s.seeds.sort_unstable();
            s.seeds.dedup();
            if let Some(&bad) = s.seeds.iter().find(|&&x| x >= n) {
                return Err(Error::NodeOutOfRange { node: bad, n });
            }
        }
        Ok(SampleSet { n, samples, mode, source })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn mode(&self) -> SampleMode {
        self.mode
    }

    pub fn source(&self) -> &SampleSource {
        &self.source
    }

    /// Same seed sets with every value multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> SampleSet {
        let mut out = self.clone();
        for s in &mut out.samples {
            s.value *= factor;
        }
        out
    }

    fn sidecar_path(csv: &Path) -> PathBuf {
        csv.with_extension("meta.jsonl")
    }

    /// Writes `sample_id,value,seeds` CSV (seeds `;`-separated, sorted).
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["sample_id", "value", "seeds"])?;
        for (i, s) in self.samples.iter().enumerate() {
            wtr.write_record([i.to_string(), s.value.to_string(), join_ids(&s.seeds)])?;
        }
        wtr.flush().map_err(|e| Error::io("csv", e))?;
        Ok(())
    }

    pub fn write_sidecar(&self, mut w: impl Write) -> Result<()> {
        let meta = Sidecar {
            n: self.n,
            m: self.samples.len(),
            mode: self.mode,
            rng_seed: self.source.rng_seed,
            marginals_digest: self.source.marginals_digest.clone(),
            marginals: self.source.marginals.clone(),
        };
        serde_json::to_writer(&mut w, &meta)?;
        writeln!(w).map_err(|e| Error::io("sidecar", e))?;
        Ok(())
    }

    /// Writes the CSV at `path` and the JSON-lines sidecar next to it
    /// (`samples.csv` → `samples.meta.jsonl`).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(BufWriter::new(f))?;
        let side = Self::sidecar_path(path);
        let f = File::create(&side).map_err(|e| Error::io(&side, e))?;
        self.write_sidecar(BufWriter::new(f))
    }

    pub fn read(csv_reader: impl Read, sidecar: impl BufRead) -> Result<SampleSet> {
        let meta_line = sidecar
            .lines()
            .next()
            .ok_or_else(|| Error::Invalid("empty sample sidecar".into()))?
            .map_err(|e| Error::io("sidecar", e))?;
        let meta: Sidecar = serde_json::from_str(&meta_line)?;
        let mut rdr = csv::Reader::from_reader(csv_reader);
        let mut samples = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |msg: String| Error::Invalid(format!("sample row {}: {msg}", i + 1));
            if rec.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", rec.len())));
            }
            let value = rec[1].parse().map_err(|_| bad(format!("bad value {:?}", &rec[1])))?;
            let seeds = parse_ids(&rec[2]).map_err(bad)?;
            samples.push(Sample { seeds, value });
        }
        if samples.len() != meta.m {
            return Err(Error::Invalid(format!(
                "sidecar declares {} samples but the CSV holds {}",
                meta.m,
                samples.len()
            )));
        }
        let source = SampleSource {
            rng_seed: meta.rng_seed,
            marginals_digest: meta.marginals_digest,
            marginals: meta.marginals,
        };
        SampleSet::from_observations(meta.n, samples, meta.mode, source)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SampleSet> {
        let path = path.as_ref();
        let side = Self::sidecar_path(path);
        let csv = File::open(path).map_err(|e| Error::io(path, e))?;
        let meta = File::open(&side).map_err(|e| Error::io(&side, e))?;
        Self::read(BufReader::new(csv), BufReader::new(meta))
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    n: usize,
    m: usize,
    mode: SampleMode,
    rng_seed: Option<u64>,
    marginals_digest: Option<String>,
    marginals: Option<Vec<f64>>,
}

pub(crate) fn join_ids(ids: &[usize]) -> String {
    ids.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";")
}

pub(crate) fn parse_ids(text: &str) -> std::result::Result<Vec<usize>, String> {
    text.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| format!("bad node id {t:?}")))
        .collect()
}

/// Draws `m` independent samples. Each seed set is a product-distribution draw;
/// its value is the influenced count in one fresh cascade realization (on a
/// freshly drawn SBM graph in `RedrawnGraph` mode).
///
/// Sample `i` uses stream `i` under `rng_seed`; output order is by index.
pub fn draw_samples(
    network: Network<'_>,
    dist: &ProductDistribution,
    m: usize,
    mode: SampleMode,
    rng_seed: u64,
) -> Result<SampleSet> {
    network.check_mode(mode)?;
    if m == 0 {
        return Err(Error::Invalid("m must be at least 1".into()));
    }
    let n = network.n();
    if dist.n() != n {
        return Err(Error::Invalid(format!(
            "distribution covers {} nodes but the network has {n}",
            dist.n()
        )));
    }
    let base = rng::seeded(rng_seed);
    let samples = (0..m as u64)
        .into_par_iter()
        .map_init(
            || (UnionFind::new(n), vec![false; n]),
            |(uf, mark), i| {
                let mut rng = rng::stream_from(&base, i);
                let mut seeds = Vec::new();
                dist.draw_into(&mut rng, &mut seeds);
                network.draw_live(&mut rng, uf);
                let value = uf.covered(&seeds, mark) as u64;
                Sample { seeds, value }
            },
        )
        .collect();
    let source = SampleSource {
        rng_seed: Some(rng_seed),
        marginals_digest: Some(dist.digest()),
        marginals: Some(dist.marginals().to_vec()),
    };
    Ok(SampleSet { n, samples, mode, source })
}

/// Fraction of samples whose seed set misses `community` entirely.
pub fn empirical_nonubiquity(set: &SampleSet, community: &[usize]) -> Result<f64> {
    if community.is_empty() {
        return Err(Error::Invalid("community must be nonempty".into()));
    }
    let mut member = vec![false; set.n()];
    for &c in community {
        *member
            .get_mut(c)
            .ok_or(Error::NodeOutOfRange { node: c, n: set.n() })? = true;
    }
    let misses = set
        .samples()
        .iter()
        .filter(|s| !s.seeds.iter().any(|&x| member[x]))
        .count();
    Ok(misses as f64 / set.len() as f64)
}
