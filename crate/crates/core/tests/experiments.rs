//! Solver and experiment-level behaviour on community benchmarks.

use cops_core::cascade::influence_exact;
use cops_core::estimators::first_order;
use cops_core::graph::CommunityLayout;
use cops_core::harness::{build_trial_network, run_experiment, ExperimentConfig, NetworkKind, ResultRow};
use cops_core::rng;
use cops_core::sampling::{draw_samples, uniform_expected_k, Network, SampleMode};
use cops_core::solver::{
    greedy_with_oracle, run_cops_on, run_margi_on, run_random, ExactOracle, MonteCarloOracle, OracleBudget,
    SolverConfig, SolverResult,
};
use cops_core::{evaluate_solution, InfluenceEstimate};
use rand::Rng;

mod common;
use common::random_graph;

#[test]
fn greedy_value_is_nondecreasing_in_k() {
    for i in 0..10u64 {
        let mut r = rng::seeded(rng::derive(21, i));
        let edges = r.random_range(4..=14);
        let g = random_graph(&mut r, 8, edges);
        let values: Vec<f64> = (1..=4)
            .map(|k| {
                let res = greedy_with_oracle(&ExactOracle::new(&g), k, None).unwrap();
                influence_exact(&g, &res.chosen).unwrap()
            })
            .collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1] + 1e-9), "{values:?}");
    }
}

#[derive(Default)]
struct Tally {
    sum: f64,
    var: f64,
    trials: usize,
}

impl Tally {
    fn add(&mut self, est: &InfluenceEstimate) {
        self.sum += est.mean;
        self.var += est.std_error * est.std_error;
        self.trials += 1;
    }

    fn mean(&self) -> f64 {
        self.sum / self.trials as f64
    }

    fn se(&self) -> f64 {
        self.var.sqrt() / self.trials as f64
    }
}

/// `lo <= hi` up to two standard errors of the difference.
fn at_most(lo: &Tally, hi: &Tally) -> bool {
    lo.mean() <= hi.mean() + 2.0 * (lo.se().powi(2) + hi.se().powi(2)).sqrt()
}

fn bracket(layout: &CommunityLayout, trials: u64, tag: u64) {
    let (k, mode) = (5, SampleMode::RedrawnGraph);
    let net = Network::Layout(layout);
    let mut tallies: [Tally; 4] = Default::default();
    for t in 0..trials {
        let seed = rng::derive(tag, t);
        let dist = uniform_expected_k(layout.n(), k).unwrap();
        let set = draw_samples(net, &dist, 50_000, mode, rng::derive_named(seed, "samples")).unwrap();
        let table = first_order(&set, 5);
        let cfg = SolverConfig::new(k, 0.5).with_min_count(5);
        let oracle = MonteCarloOracle::new(net, mode, OracleBudget::default(), rng::derive_named(seed, "greedy")).unwrap();
        let solutions = [
            run_random(layout.n(), None, k, rng::derive_named(seed, "random")).unwrap(),
            run_margi_on(&table, &cfg).unwrap(),
            run_cops_on(&table, &cfg).unwrap(),
            greedy_with_oracle(&oracle, k, None).unwrap(),
        ];
        for (tally, sol) in tallies.iter_mut().zip(&solutions) {
            tally.add(&evaluate_solution(net, mode, &sol.chosen, 2000, rng::derive_named(seed, "eval")).unwrap());
        }
    }
    let [random, margi, cops, greedy] = &tallies;
    let report = format!(
        "random {:.1}, margi {:.1}, cops {:.1}, greedy {:.1}",
        random.mean(),
        margi.mean(),
        cops.mean(),
        greedy.mean()
    );
    assert!(at_most(random, cops) && at_most(cops, greedy), "{report}");
    // MargI concentrates on the largest communities, so it is only bounded above.
    assert!(at_most(margi, greedy), "{report}");
    assert!(at_most(margi, cops), "{report}");
}

#[test]
fn baselines_bracket_sample_based_solvers_in_dense_regime() {
    let layout = CommunityLayout::dense(&[40, 35, 30, 25, 20, 18, 16, 14], 3.0).unwrap();
    bracket(&layout, 3, 22);
}

#[test]
fn baselines_bracket_sample_based_solvers_on_sbm1() {
    let mut cfg = ExperimentConfig::new(NetworkKind::Sbm1, vec![400]);
    cfg.communities = Some(15);
    let net = build_trial_network(&cfg, 400, 23).unwrap();
    bracket(net.layout().unwrap(), 2, 24);
}

#[test]
fn prunes_stay_within_communities_given_enough_samples() {
    let layout = CommunityLayout::dense(&[40, 35, 30, 25, 20, 18, 16, 14], 3.0).unwrap();
    let dist = uniform_expected_k(layout.n(), 5).unwrap();
    let set = draw_samples(Network::Layout(&layout), &dist, 500_000, SampleMode::RedrawnGraph, 25).unwrap();
    let table = first_order(&set, 30);
    let res = run_cops_on(&table, &SolverConfig::new(5, 0.5)).unwrap();
    let intra = res
        .pruned
        .iter()
        .filter(|p| layout.community_of(p.node) == layout.community_of(p.blocker))
        .count();
    assert!(!res.pruned.is_empty());
    assert!(intra as f64 >= 0.95 * res.pruned.len() as f64, "{intra}/{} prunes intra-community", res.pruned.len());
    let mut comms: Vec<usize> = res.chosen.iter().map(|&a| layout.community_of(a)).collect();
    comms.sort();
    assert_eq!(comms, [0, 1, 2, 3, 4]);
    assert!(res.backfilled.is_empty());
}

fn cops_means(rows: &[ResultRow], key: impl Fn(&ResultRow) -> f64) -> Vec<(f64, f64)> {
    let mut groups: Vec<(f64, f64, usize)> = Vec::new();
    for r in rows.iter().filter(|r| r.algorithm == "cops") {
        let x = key(r);
        match groups.iter_mut().find(|g| g.0 == x) {
            Some(g) => {
                g.1 += r.influence_mean;
                g.2 += 1;
            }
            None => groups.push((x, r.influence_mean, 1)),
        }
    }
    groups.into_iter().map(|(x, s, c)| (x, s / c as f64)).collect()
}

#[test]
fn sbm2_influence_grows_linearly_with_n() {
    let mut cfg = ExperimentConfig::new(NetworkKind::Sbm2, vec![200, 400, 800]);
    cfg.trials = 3;
    cfg.m = 20_000;
    cfg.min_count = 5;
    cfg.eval_realizations = 500;
    cfg.greedy = false;
    cfg.seed = 26;
    let means = cops_means(&run_experiment(&cfg).unwrap(), |r| r.n as f64);
    for w in means.windows(2) {
        let ratio = w[1].1 / w[0].1;
        assert!((1.6..=2.4).contains(&ratio), "COPS means by n: {means:?}");
    }
}

#[test]
fn alpha_sweep_peaks_at_an_interior_value() {
    let mut cfg = ExperimentConfig::new(NetworkKind::Sbm2, vec![200]);
    cfg.trials = 4;
    cfg.m = 20_000;
    cfg.min_count = 5;
    cfg.eval_realizations = 500;
    cfg.greedy = false;
    cfg.alphas = Some(vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    cfg.seed = 27;
    let means = cops_means(&run_experiment(&cfg).unwrap(), |r| r.alpha);
    let best = means.iter().map(|m| m.1).fold(f64::MIN, f64::max);
    let ends = means[0].1.max(means[means.len() - 1].1);
    assert!(best > ends, "COPS means by alpha: {means:?}");
}

#[test]
fn re_evaluating_persisted_solutions_reproduces_influence() {
    let layout = CommunityLayout::dense(&[30, 20, 10], 3.0).unwrap();
    let net = Network::Layout(&layout);
    let mode = SampleMode::RedrawnGraph;
    let dist = uniform_expected_k(layout.n(), 3).unwrap();
    let set = draw_samples(net, &dist, 20_000, mode, 28).unwrap();
    let table = first_order(&set, 5);
    let res = run_cops_on(&table, &SolverConfig::new(3, 0.5).with_min_count(5)).unwrap();
    let first = evaluate_solution(net, mode, &res.chosen, 5000, 29).unwrap();

    let mut json = Vec::new();
    res.write_json(&mut json).unwrap();
    let back = SolverResult::from_json(std::str::from_utf8(&json).unwrap()).unwrap();
    assert_eq!(back, res);
    assert_eq!(evaluate_solution(net, mode, &back.chosen, 5000, 29).unwrap(), first);
    let fresh = evaluate_solution(net, mode, &back.chosen, 5000, 30).unwrap();
    let tolerance = 2.0 * (first.std_error.powi(2) + fresh.std_error.powi(2)).sqrt();
    assert!((fresh.mean - first.mean).abs() <= tolerance, "{first:?} vs {fresh:?}");
}

#[test]
fn result_rows_respect_influence_bounds() {
    let mut cfg = ExperimentConfig::new(NetworkKind::Er, vec![150]);
    cfg.trials = 2;
    cfg.m = 5_000;
    cfg.min_count = 5;
    cfg.eval_realizations = 300;
    cfg.greedy_realizations = 50;
    let rows = run_experiment(&cfg).unwrap();
    assert_eq!(rows.len(), 2 * 4);
    for r in &rows {
        assert!(r.influence_mean >= r.k as f64 && r.influence_mean <= r.n as f64, "{r:?}");
    }
}
