//! Random instance generators shared by the integration suites.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ust_core::graph::{validate_root, NodeId, PhysicalGraph, RootedPreprocess, DEFAULT_TIE_TOL};
use ust_core::{shortest_path_tree, DiscreteMeasure, TreeOptions, UstParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn p3() -> PhysicalGraph {
    PhysicalGraph::new(3, &[(0, 1, 1.0), (1, 2, 2.0)]).unwrap()
}

pub fn random_tree(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> PhysicalGraph {
    let edges: Vec<_> = (1..n)
        .map(|v| (rng.random_range(0..v), v, rng.random_range(lo..hi)))
        .collect();
    PhysicalGraph::new(n, &edges).unwrap()
}

/// Spanning tree plus up to `extra` distinct chords.
pub fn random_graph(rng: &mut impl Rng, n: usize, extra: usize) -> PhysicalGraph {
    let mut edges: Vec<(NodeId, NodeId, f64)> = (1..n)
        .map(|v| (rng.random_range(0..v), v, rng.random_range(0.1..2.0)))
        .collect();
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        let dup = edges.iter().any(|&(a, b, _)| (a, b) == (u, v) || (b, a) == (u, v));
        if u != v && !dup {
            edges.push((u, v, rng.random_range(0.1..2.0)));
        }
    }
    PhysicalGraph::new(n, &edges).unwrap()
}

/// First node in a shuffled order whose shortest paths are unique.
pub fn valid_root(rng: &mut impl Rng, g: &PhysicalGraph) -> Option<NodeId> {
    let mut order: Vec<NodeId> = (0..g.node_count()).collect();
    order.shuffle(rng);
    order
        .into_iter()
        .find(|&r| validate_root(g, r, DEFAULT_TIE_TOL).unwrap().ok)
}

pub fn random_graph_with_root(rng: &mut impl Rng, n: usize, extra: usize) -> (PhysicalGraph, RootedPreprocess) {
    loop {
        let g = random_graph(rng, n, extra);
        if let Some(r) = valid_root(rng, &g) {
            let pre = shortest_path_tree(&g, r, TreeOptions::default()).unwrap();
            return (g, pre);
        }
    }
}

pub fn random_measure(rng: &mut impl Rng, n: usize, max_support: usize) -> DiscreteMeasure {
    let k = rng.random_range(1..=max_support.min(n));
    let nodes: Vec<NodeId> = rand::seq::index::sample(rng, n, k).into_vec();
    DiscreteMeasure::new(nodes.into_iter().map(|v| (v, rng.random_range(0.1..1.0)))).unwrap()
}

/// Masses that are multiples of 1/8, so all partial sums are exact.
pub fn dyadic_measure(rng: &mut impl Rng, n: usize, max_support: usize) -> DiscreteMeasure {
    let k = rng.random_range(1..=max_support.min(n));
    let nodes: Vec<NodeId> = rand::seq::index::sample(rng, n, k).into_vec();
    DiscreteMeasure::new(nodes.into_iter().map(|v| (v, rng.random_range(1..=16) as f64 / 8.0))).unwrap()
}

/// Same dyadic masses on a fresh random support, so total masses agree exactly.
pub fn dyadic_balanced_pair(rng: &mut impl Rng, n: usize, max_support: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    let mu = dyadic_measure(rng, n, max_support);
    let k = mu.support_len();
    let nodes: Vec<NodeId> = rand::seq::index::sample(rng, n, k).into_vec();
    let nu = DiscreteMeasure::new(nodes.into_iter().zip(mu.entries().iter().map(|e| e.1))).unwrap();
    assert_eq!(mu.total_mass(), nu.total_mass());
    (mu, nu)
}

/// `nu` rescaled to the total mass of `mu`.
pub fn balanced_pair(rng: &mut impl Rng, n: usize, max_support: usize) -> (DiscreteMeasure, DiscreteMeasure) {
    let mu = random_measure(rng, n, max_support);
    let nu = random_measure(rng, n, max_support);
    let nu = nu.scale(mu.total_mass() / nu.total_mass()).unwrap();
    (mu, nu)
}

/// Metric-regime parameters: equal root weights and α below the metric cap.
pub fn metric_params(rng: &mut impl Rng, p: f64) -> UstParams {
    let b = rng.random_range(0.5..2.0);
    let lambda = rng.random_range(0.0..2.0);
    let w = rng.random_range(0.0..2.0);
    let cap = 0.5 * b * lambda + w;
    UstParams {
        p: ust_core::Order::new(p).unwrap(),
        b,
        lambda,
        alpha: rng.random_range(0.0..0.99) * cap,
        w1_root: w,
        w2_root: w,
        ..UstParams::default()
    }
}

/// Any admissible parameters, root weights may differ.
pub fn admissible_params(rng: &mut impl Rng, base: &UstParams) -> UstParams {
    let lambda = rng.random_range(0.0..5.0);
    let w1 = rng.random_range(0.0..5.0);
    let w2 = rng.random_range(0.0..5.0);
    let cap = 0.5 * (base.b * lambda + w1 + w2);
    UstParams {
        lambda,
        alpha: rng.random_range(0.0..=1.0) * cap,
        w1_root: w1,
        w2_root: w2,
        ..base.clone()
    }
}
