use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, NetworkKind};
use crate::cascade::{check_seeds, mc_moments, InfluenceEstimate};
use crate::error::{Error, Result};
use crate::estimators::first_order;
use crate::graph::{
    dense_live_probability, generate_er, generate_pa, generate_sbm, load_edge_list, Community,
    CommunityLayout, WeightedGraph,
};
use crate::rng;
use crate::sampling::{draw_samples, uniform_expected_k, Network, SampleMode};
use crate::solver::{run_cops_on, run_margi_on, run_random, MonteCarloOracle, OracleBudget, SolverConfig, SolverResult};

pub const CSV_HEADER: [&str; 11] = [
    "config",
    "algorithm",
    "trial",
    "n",
    "k",
    "alpha",
    "m",
    "influence_mean",
    "influence_stderr",
    "wall_ms",
    "chosen",
];

/// One evaluated solver run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub config: String,
    pub algorithm: String,
    pub trial: usize,
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub m: usize,
    pub influence_mean: f64,
    pub influence_stderr: f64,
    pub wall_ms: u64,
    pub chosen: Vec<usize>,
}

/// Expected-influence score of `seeds`: plain Monte Carlo on a fixed graph,
/// or a fresh SBM draw per realization in redrawn mode.
pub fn evaluate_solution(
    network: Network<'_>,
    mode: SampleMode,
    seeds: &[usize],
    realizations: usize,
    rng_seed: u64,
) -> Result<InfluenceEstimate> {
    network.check_mode(mode)?;
    check_seeds(seeds, network.n())?;
    mc_moments(network.n(), seeds, realizations, rng_seed, |rng, uf| network.draw_live(rng, uf))
}

/// Uniform edge weight `n / (2|E|)`, capped at 1, giving expected live degree about 1.
pub fn make_default_q(graph: &WeightedGraph) -> Result<f64> {
    if graph.edge_count() == 0 {
        return Err(Error::Invalid("default q needs at least one edge".into()));
    }
    Ok((graph.n() as f64 / (2.0 * graph.edge_count() as f64)).min(1.0))
}

/// The network a trial runs on.
#[derive(Clone, Debug)]
pub enum TrialNetwork {
    Layout(CommunityLayout),
    Graph {
        graph: WeightedGraph,
        layout: Option<CommunityLayout>,
        candidates: Option<Vec<usize>>,
    },
}

impl TrialNetwork {
    pub fn as_network(&self) -> Network<'_> {
        match self {
            TrialNetwork::Layout(l) => Network::Layout(l),
            TrialNetwork::Graph { graph, .. } => Network::Graph(graph),
        }
    }

    pub fn layout(&self) -> Option<&CommunityLayout> {
        match self {
            TrialNetwork::Layout(l) => Some(l),
            TrialNetwork::Graph { layout, .. } => layout.as_ref(),
        }
    }

    pub fn candidates(&self) -> Option<&[usize]> {
        match self {
            TrialNetwork::Graph { candidates, .. } => candidates.as_deref(),
            TrialNetwork::Layout(_) => None,
        }
    }
}

fn sbm_community(cfg: &ExperimentConfig, size: usize) -> Community {
    let p = dense_live_probability(size, cfg.dense_factor);
    Community::new(size, cfg.q_sb.unwrap_or(p.sqrt()), cfg.q_ic.unwrap_or(p.sqrt()))
}

/// SBM 1 sizes: one community of `large_fraction * n`, the rest assigned
/// uniformly at random among the small communities (empty ones dropped).
fn sbm1_sizes(cfg: &ExperimentConfig, n: usize, seed: u64) -> Vec<usize> {
    let large = ((n as f64 * cfg.large_fraction).round() as usize).clamp(1, n);
    let rest = n - large;
    let mut sizes = vec![large];
    if rest == 0 {
        return sizes;
    }
    let count = cfg
        .communities
        .unwrap_or_else(|| ((rest as f64) / (n as f64 / 40.0)).round().max(1.0) as usize);
    let mut small = vec![0usize; count];
    let mut rng = rng::seeded(seed);
    for _ in 0..rest {
        small[rng.random_range(0..count)] += 1;
    }
    sizes.extend(small.into_iter().filter(|&s| s > 0));
    sizes
}

fn sbm2_sizes(cfg: &ExperimentConfig, n: usize) -> Vec<usize> {
    let c = cfg.communities.unwrap_or(10).min(n);
    (0..c).map(|i| n / c + usize::from(i < n % c)).collect()
}

/// Builds the network for one `(n, trial)` cell of an experiment.
pub fn build_trial_network(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<TrialNetwork> {
    let fixed_q = |g: WeightedGraph| -> Result<WeightedGraph> {
        let q = match cfg.q_ic {
            Some(q) => q,
            None => make_default_q(&g)?,
        };
        g.with_uniform_q(q)
    };
    let layout = match cfg.network {
        NetworkKind::Sbm1 => Some(sbm1_sizes(cfg, n, rng::derive_named(seed, "sizes"))),
        NetworkKind::Sbm2 => Some(sbm2_sizes(cfg, n)),
        _ => None,
    }
    .map(|sizes| {
        let comms = sizes.iter().map(|&s| sbm_community(cfg, s)).collect();
        CommunityLayout::new(comms, cfg.q_inter, cfg.q_ic_inter)
    })
    .transpose()?;
    let graph_seed = rng::derive_named(seed, "graph");
    Ok(match (cfg.network, layout) {
        (_, Some(layout)) => match cfg.mode() {
            SampleMode::RedrawnGraph => TrialNetwork::Layout(layout),
            SampleMode::FixedGraph => {
                let (graph, layout) = generate_sbm(&layout, graph_seed)?;
                TrialNetwork::Graph { graph, layout: Some(layout), candidates: None }
            }
        },
        (NetworkKind::Er, None) => {
            let p = (cfg.avg_degree / (n as f64 - 1.0)).clamp(0.0, 1.0);
            let graph = fixed_q(generate_er(n, p, 0.0, graph_seed)?)?;
            TrialNetwork::Graph { graph, layout: None, candidates: None }
        }
        (NetworkKind::Pa, None) => {
            let graph = fixed_q(generate_pa(n, cfg.edges_per_node, 0.0, graph_seed)?)?;
            TrialNetwork::Graph { graph, layout: None, candidates: None }
        }
        (NetworkKind::File, None) => {
            let path = cfg.path.as_ref().ok_or_else(|| Error::Config("file network needs `path`".into()))?;
            let loaded = load_edge_list(path, 0.0, cfg.degree_min, cfg.candidate_degree_min)?;
            let graph = fixed_q(loaded.graph)?;
            let candidates = (loaded.candidates.len() >= cfg.k).then_some(loaded.candidates);
            TrialNetwork::Graph { graph, layout: None, candidates }
        }
        _ => unreachable!("SBM kinds always build a layout"),
    })
}

fn timed<T>(record: bool, f: impl FnOnce() -> T) -> (T, u64) {
    let start = Instant::now();
    let out = f();
    (out, if record { start.elapsed().as_millis() as u64 } else { 0 })
}

fn run_trial(cfg: &ExperimentConfig, digest: &str, n: usize, trial: usize) -> Result<Vec<ResultRow>> {
    let seed = rng::derive(rng::derive(cfg.seed, n as u64), trial as u64);
    let net = build_trial_network(cfg, n, rng::derive_named(seed, "network"))?;
    let network = net.as_network();
    let n = network.n();
    let mode = cfg.mode();
    let candidates = net.candidates();
    let dist = uniform_expected_k(n, cfg.k)?;
    let samples = draw_samples(network, &dist, cfg.m, mode, rng::derive_named(seed, "samples"))?;
    let table = first_order(&samples, cfg.min_count);

    let mut solved: Vec<(SolverResult, f64, u64)> = Vec::new();
    for alpha in cfg.alphas() {
        let mut sc = SolverConfig::new(cfg.k, alpha).with_min_count(cfg.min_count);
        sc.candidates = candidates.map(<[usize]>::to_vec);
        let (res, ms) = timed(cfg.record_wall_time, || run_cops_on(&table, &sc));
        solved.push((res?, alpha, ms));
    }
    let mut sc = SolverConfig::new(cfg.k, cfg.alpha).with_min_count(cfg.min_count);
    sc.candidates = candidates.map(<[usize]>::to_vec);
    let (res, ms) = timed(cfg.record_wall_time, || run_margi_on(&table, &sc));
    solved.push((res?, cfg.alpha, ms));
    let (res, ms) = timed(cfg.record_wall_time, || {
        run_random(n, candidates, cfg.k, rng::derive_named(seed, "random"))
    });
    solved.push((res?, cfg.alpha, ms));
    if cfg.greedy {
        // The oracle gets its own stream, disjoint from the sample draws.
        let budget = OracleBudget {
            realizations_per_eval: cfg.greedy_realizations,
            recheck_factor: cfg.greedy_recheck_factor,
        };
        let (res, ms) = timed(cfg.record_wall_time, || {
            let oracle = MonteCarloOracle::new(network, mode, budget, rng::derive_named(seed, "greedy"))?;
            crate::solver::greedy_with_oracle(&oracle, cfg.k, candidates)
        });
        solved.push((res?, cfg.alpha, ms));
    }

    let eval_seed = rng::derive_named(seed, "eval");
    solved
        .into_iter()
        .map(|(res, alpha, wall_ms)| {
            let est = evaluate_solution(network, mode, &res.chosen, cfg.eval_realizations, eval_seed)?;
            Ok(ResultRow {
                config: digest.to_string(),
                algorithm: res.algorithm,
                trial,
                n,
                k: cfg.k,
                alpha,
                m: cfg.m,
                influence_mean: est.mean,
                influence_stderr: est.std_error,
                wall_ms,
                chosen: res.chosen,
            })
        })
        .collect()
}

/// Runs every `(size, trial)` cell of `cfg`. Trials run concurrently; rows come
/// back ordered by size, trial, then algorithm, and depend only on the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let digest = cfg.digest();
    let sizes = match cfg.network {
        NetworkKind::File => vec![0],
        _ => cfg.sizes.clone(),
    };
    let cells: Vec<(usize, usize)> = sizes
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let per_cell: Vec<Vec<ResultRow>> = cells
        .par_iter()
        .map(|&(n, t)| {
            run_trial(cfg, &digest, n, t).map_err(|e| Error::Trial {
                trial: t,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

/// Writes rows under [`CSV_HEADER`]; `chosen` is `;`-separated.
pub fn write_rows(rows: &[ResultRow], w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for r in rows {
        wtr.write_record([
            r.config.clone(),
            r.algorithm.clone(),
            r.trial.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.alpha.to_string(),
            r.m.to_string(),
            r.influence_mean.to_string(),
            r.influence_stderr.to_string(),
            r.wall_ms.to_string(),
            crate::sampling::join_ids(&r.chosen),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("results", e))?;
    Ok(())
}
