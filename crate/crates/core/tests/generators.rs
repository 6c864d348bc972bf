//! Statistical checks on the random graph generators.

use cops_core::graph::{generate_er, generate_pa, generate_sbm, generate_sbm_with, Community, CommunityLayout, EdgeSampling};
use cops_core::rng;

fn single(size: usize, q_sb: f64) -> CommunityLayout {
    CommunityLayout::new(vec![Community::new(size, q_sb, 1.0)], 0.0, 0.0).unwrap()
}

#[test]
fn sbm_edge_count_concentrates() {
    let layout = single(200, 0.1);
    let pairs = 200.0 * 199.0 / 2.0;
    let (mean, sd) = (pairs * 0.1, (pairs * 0.1 * 0.9f64).sqrt());
    let counts: Vec<f64> = (0..1000u64)
        .map(|s| generate_sbm(&layout, rng::derive(1, s)).unwrap().0.edge_count() as f64)
        .collect();
    let avg = counts.iter().sum::<f64>() / counts.len() as f64;
    assert!((avg - mean).abs() <= 3.0 * sd / (counts.len() as f64).sqrt(), "mean edge count {avg}");
    let inside = counts.iter().filter(|&&c| (c - mean).abs() <= 4.0 * sd).count();
    assert!(inside >= 990, "{inside}/1000 runs within 4 sd");
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn bernoulli_and_geometric_skip_agree_in_distribution() {
    let layout = CommunityLayout::new(
        vec![Community::new(150, 0.05, 1.0), Community::new(100, 0.2, 1.0)],
        0.01,
        1.0,
    )
    .unwrap();
    let counts = |method: EdgeSampling, tag: &str| -> Vec<f64> {
        (0..400u64)
            .map(|s| {
                let seed = rng::derive(rng::derive_named(2, tag), s);
                generate_sbm_with(&layout, seed, method).unwrap().0.edge_count() as f64
            })
            .collect()
    };
    let d = ks_statistic(counts(EdgeSampling::Bernoulli, "b"), counts(EdgeSampling::GeometricSkip, "g"));
    // Critical value at the 0.001 level for two samples of 400.
    let critical = 1.95 * (2.0f64 / 400.0).sqrt();
    assert!(d < critical, "KS statistic {d} >= {critical}");
}

#[test]
fn er_connectivity_threshold() {
    let n = 500usize;
    let ln = (n as f64).ln();
    let connected = |p: f64, tag: u64| {
        (0..100u64)
            .filter(|&s| generate_er(n, p, 1.0, rng::derive(tag, s)).unwrap().is_connected())
            .count()
    };
    assert!(connected(3.0 * ln / n as f64, 3) >= 95);
    assert!(connected(0.5 * ln / n as f64, 4) <= 5);
}

#[test]
fn giant_component_in_supercritical_er() {
    let n = 2000usize;
    let big = (0..100u64)
        .filter(|&s| {
            let g = generate_er(n, 1.5 / n as f64, 1.0, rng::derive(5, s)).unwrap();
            g.largest_component_size() as f64 >= 0.2 * n as f64
        })
        .count();
    assert!(big >= 95, "{big}/100");
}

#[test]
fn preferential_attachment_has_heavier_hubs_than_er() {
    let n = 10_000usize;
    let max_degree = |g: &cops_core::WeightedGraph| g.degrees().into_iter().max().unwrap();
    let wins = (0..20u64)
        .filter(|&s| {
            let pa = generate_pa(n, 5, 0.1, rng::derive(6, s)).unwrap();
            let p = pa.edge_count() as f64 / (n * (n - 1) / 2) as f64;
            let er = generate_er(n, p, 0.1, rng::derive(7, s)).unwrap();
            max_degree(&pa) > max_degree(&er)
        })
        .count();
    assert!(wins >= 18, "{wins}/20");
}

#[test]
fn pa_max_degree_grows_with_n() {
    let max_degree = |n: usize| {
        (0..5u64)
            .map(|s| generate_pa(n, 3, 0.1, rng::derive(8, s)).unwrap().degrees().into_iter().max().unwrap())
            .sum::<usize>()
    };
    assert!(max_degree(500) < max_degree(5000));
}
