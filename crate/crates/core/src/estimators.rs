//! First- and second-order marginal contribution estimates.
//!
//! With `S_a` the samples containing `a` and `S_{-a}` the rest,
//!
//! ```text
//! v~(a)   = mean(f | S_a)     - mean(f | S_{-a})
//! v~_b(a) = mean(f | S_{a,b}) - mean(f | S_{-a,b})
//! ```
//!
//! Under a product distribution these are unbiased for the expected marginal
//! contribution of `a` to a random set (conditioned on containing `b` for the
//! second order). Entries whose sample cells hold fewer than `min_count`
//! samples carry no estimate.

use std::collections::HashMap;
use std::io::Write;
use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::SampleSet;

pub const DEFAULT_MIN_COUNT: usize = 30;

/// An estimate with the sizes of the two sample cells it was computed from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    /// `None` when either cell is below the minimum count.
    pub estimate: Option<f64>,
    pub count_in: usize,
    pub count_out: usize,
}

/// First-order entry: counts are `|S_a|` and `|S_{-a}|`.
pub type NodeEstimate = Estimate;
/// Second-order entry: counts are `|S_{a,b}|` and `|S_{-a,b}|`.
pub type PairEstimate = Estimate;

impl Estimate {
    fn from_cells(sum_in: u128, count_in: usize, sum_out: u128, count_out: usize, min_count: usize) -> Self {
        let floor = min_count.max(1);
        let estimate = (count_in >= floor && count_out >= floor)
            .then(|| sum_in as f64 / count_in as f64 - sum_out as f64 / count_out as f64);
        Estimate {
            estimate,
            count_in,
            count_out,
        }
    }

    pub fn insufficient(&self) -> bool {
        self.estimate.is_none()
    }
}

/// First-order estimates for every node plus a lazily filled second-order cache.
pub struct MarginalTable<'s> {
    set: &'s SampleSet,
    min_count: usize,
    /// Sorted indices of samples containing each node.
    containing: Vec<Vec<u32>>,
    /// Sum of values over `containing[a]`.
    sum_in: Vec<u128>,
    first: Vec<Estimate>,
    second: RwLock<HashMap<(usize, usize), Estimate>>,
}

/// Builds the table of first-order estimates `v~(a)` for all nodes.
pub fn first_order(set: &SampleSet, min_count: usize) -> MarginalTable<'_> {
    let n = set.n();
    let m = set.len();
    let mut containing = vec![Vec::new(); n];
    let mut total: u128 = 0;
    for (i, s) in set.samples().iter().enumerate() {
        total += s.value as u128;
        for &a in &s.seeds {
            containing[a].push(i as u32);
        }
    }
    let values: Vec<u64> = set.samples().iter().map(|s| s.value).collect();
    let sum_in: Vec<u128> = containing
        .par_iter()
        .map(|idx| idx.iter().map(|&i| values[i as usize] as u128).sum())
        .collect();
    let first = containing
        .iter()
        .zip(&sum_in)
        .map(|(idx, &s_in)| Estimate::from_cells(s_in, idx.len(), total - s_in, m - idx.len(), min_count))
        .collect();
    MarginalTable {
        set,
        min_count,
        containing,
        sum_in,
        first,
        second: RwLock::new(HashMap::new()),
    }
}

impl<'s> MarginalTable<'s> {
    pub fn sample_set(&self) -> &'s SampleSet {
        self.set
    }

    pub fn n(&self) -> usize {
        self.first.len()
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn first(&self, a: usize) -> &Estimate {
        &self.first[a]
    }

    pub fn first_all(&self) -> &[Estimate] {
        &self.first
    }

    /// `v~_b(a)`, memoized per ordered pair.
    pub fn second(&self, a: usize, b: usize) -> Result<Estimate> {
        let n = self.n();
        if a == b {
            return Err(Error::Invalid(format!("second-order estimate needs a != b (got {a})")));
        }
        for node in [a, b] {
            if node >= n {
                return Err(Error::NodeOutOfRange { node, n });
            }
        }
        if let Some(e) = self.second.read().expect("estimate cache poisoned").get(&(a, b)) {
            return Ok(*e);
        }
        let e = self.compute_second(a, b);
        self.second
            .write()
            .expect("estimate cache poisoned")
            .insert((a, b), e);
        Ok(e)
    }

    fn compute_second(&self, a: usize, b: usize) -> Estimate {
        let samples = self.set.samples();
        let (la, lb) = (&self.containing[a], &self.containing[b]);
        let (mut i, mut j) = (0, 0);
        let (mut sum_ab, mut count_ab) = (0u128, 0usize);
        while i < la.len() && j < lb.len() {
            match la[i].cmp(&lb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum_ab += samples[la[i] as usize].value as u128;
                    count_ab += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        let sum_b = self.sum_in[b];
        Estimate::from_cells(sum_ab, count_ab, sum_b - sum_ab, lb.len() - count_ab, self.min_count)
    }

    /// Number of memoized second-order entries.
    pub fn cached_pairs(&self) -> usize {
        self.second.read().expect("estimate cache poisoned").len()
    }

    /// Diagnostic CSV `node,v1,count_in,count_out,flag`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["node", "v1", "count_in", "count_out", "flag"])?;
        for (a, e) in self.first.iter().enumerate() {
            wtr.write_record([
                a.to_string(),
                e.estimate.map(|v| v.to_string()).unwrap_or_default(),
                e.count_in.to_string(),
                e.count_out.to_string(),
                if e.insufficient() { "insufficient_data" } else { "ok" }.to_string(),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("marginal table", e))?;
        Ok(())
    }
}

/// `v~_b(a)` in one pass over the samples, accumulating the `S_{a,b}` and
/// `S_{-a,b}` cells directly. Equivalent to [`MarginalTable::second`] without
/// the index or cache.
pub fn second_order(set: &SampleSet, a: usize, b: usize, min_count: usize) -> Result<Estimate> {
    let n = set.n();
    if a == b {
        return Err(Error::Invalid(format!("second-order estimate needs a != b (got {a})")));
    }
    for node in [a, b] {
        if node >= n {
            return Err(Error::NodeOutOfRange { node, n });
        }
    }
    let mut cells = [(0u128, 0usize); 2];
    for s in set.samples() {
        if s.seeds.binary_search(&b).is_ok() {
            let cell = &mut cells[usize::from(s.seeds.binary_search(&a).is_ok())];
            cell.0 += s.value as u128;
            cell.1 += 1;
        }
    }
    let [(sum_out, count_out), (sum_in, count_in)] = cells;
    Ok(Estimate::from_cells(sum_in, count_in, sum_out, count_out, min_count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, WeightedGraph};
    use crate::rng;
    use crate::sampling::{
        draw_samples, uniform_expected_k, Network, ProductDistribution, Sample, SampleMode,
        SampleSource,
    };

    fn synthetic(n: usize, m: usize, p: f64, seed: u64, value: impl Fn(&[usize]) -> u64) -> SampleSet {
        let dist = ProductDistribution::uniform(n, p).unwrap();
        let mut rng = rng::seeded(seed);
        let samples = (0..m)
            .map(|_| {
                let mut seeds = Vec::new();
                dist.draw_into(&mut rng, &mut seeds);
                let value = value(&seeds);
                Sample { seeds, value }
            })
            .collect();
        let source = SampleSource { rng_seed: Some(seed), marginals_digest: None, marginals: None };
        SampleSet::from_observations(n, samples, SampleMode::FixedGraph, source).unwrap()
    }

    #[test]
    fn linear_values_give_unit_contributions() {
        // Other nodes' frequencies differ between the two cells only by sampling
        // noise, about 0.014 here.
        let set = synthetic(6, 20_000, 0.5, 1, |s| s.len() as u64);
        let table = first_order(&set, DEFAULT_MIN_COUNT);
        for a in 0..6 {
            let v = table.first(a).estimate.unwrap();
            assert!((v - 1.0).abs() <= 0.05, "node {a}: {v}");
        }
        let v2 = table.second(3, 4).unwrap().estimate.unwrap();
        assert!((v2 - 1.0).abs() <= 0.1, "{v2}");
    }

    #[test]
    fn constant_values_give_zero() {
        let set = synthetic(10, 2000, 0.4, 2, |_| 7);
        let table = first_order(&set, DEFAULT_MIN_COUNT);
        assert!(table.first_all().iter().all(|e| e.estimate == Some(0.0)));
        assert_eq!(table.second(1, 2).unwrap().estimate, Some(0.0));
    }

    #[test]
    fn starved_cells_are_flagged() {
        let set = synthetic(10, 100, 0.01, 3, |s| s.len() as u64);
        let table = first_order(&set, DEFAULT_MIN_COUNT);
        assert!(table.first_all().iter().all(Estimate::insufficient));
        let e = table.second(0, 1).unwrap();
        assert!(e.insufficient());
        assert!(e.count_in + e.count_out <= set.len());
    }

    #[test]
    fn pair_validation() {
        let set = synthetic(5, 100, 0.5, 4, |s| s.len() as u64);
        let table = first_order(&set, 1);
        assert!(table.second(2, 2).is_err());
        assert!(table.second(2, 9).is_err());
        assert!(second_order(&set, 1, 1, 1).is_err());
    }

    #[test]
    fn cached_and_one_pass_routes_agree() {
        let set = synthetic(12, 5000, 0.35, 5, |s| (s.len() * s.len()) as u64);
        let table = first_order(&set, 10);
        for a in 0..12 {
            for b in 0..12 {
                if a != b {
                    assert_eq!(table.second(a, b).unwrap(), second_order(&set, a, b, 10).unwrap());
                }
            }
        }
        assert_eq!(table.cached_pairs(), 132);
    }

    #[test]
    fn single_live_edge_pair() {
        let g = WeightedGraph::new(2, vec![Edge::new(0, 1, 1.0)]).unwrap();
        let d = ProductDistribution::uniform(2, 0.5).unwrap();
        let set = draw_samples(Network::Graph(&g), &d, 100_000, SampleMode::FixedGraph, 6).unwrap();
        let table = first_order(&set, DEFAULT_MIN_COUNT);
        // Exact: v(a) = 2 * P(b not in S) = 1, v_b(a) = 0.
        let v = table.first(0).estimate.unwrap();
        let vb = table.second(0, 1).unwrap().estimate.unwrap();
        assert!((v - 1.0).abs() < 0.05, "{v}");
        assert_eq!(vb, 0.0);
    }

    #[test]
    fn isolated_pair_has_no_overlap() {
        let g = WeightedGraph::empty(2);
        let d = uniform_expected_k(2, 1).unwrap();
        let set = draw_samples(Network::Graph(&g), &d, 100_000, SampleMode::FixedGraph, 7).unwrap();
        let table = first_order(&set, DEFAULT_MIN_COUNT);
        // value = |S|, so both differences are 1 up to the other node's frequency noise.
        assert!((table.first(0).estimate.unwrap() - 1.0).abs() < 0.02);
        assert!((table.second(0, 1).unwrap().estimate.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_export() {
        let set = synthetic(3, 50, 0.5, 8, |s| s.len() as u64);
        let table = first_order(&set, 1000);
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("node,v1,count_in,count_out,flag"));
        assert!(lines.next().unwrap().ends_with(",insufficient_data"));
    }
}
