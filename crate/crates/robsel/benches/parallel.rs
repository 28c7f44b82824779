//! Parallel vs. sequential comparison for the data-parallel hot paths:
//! Monte Carlo spread estimation, exact live-edge enumeration, and a full
//! greedy run over a noisy influence ensemble.
//!
//! With the default `parallel` feature the public entry points fan out via
//! rayon while the `_seq` reference paths stay single-threaded (and produce
//! bit-identical values). Building with `--no-default-features` makes both
//! sides sequential, which is a useful sanity baseline.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use robsel::greedy::greedy_select;
use robsel::influence::{
    estimate_spread, estimate_spread_seq, exact_spread_live_edge, exact_spread_live_edge_seq,
    weighted_cascade_probs, DirectedGraph, IcSimulator, ProbabilityVector, SpreadSampler,
};
use robsel::objective::{ObjectiveEnsemble, SeedPolicy, SetFunction, StochasticOracle};
use robsel::subset::Subset;

fn random_graph(n: usize, edges: usize, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut raw = Vec::new();
    while raw.len() < edges {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && seen.insert((u, v)) {
            raw.push((u, v, 1.0));
        }
    }
    DirectedGraph::new((0..n).map(|i| i.to_string()).collect(), raw).unwrap()
}

fn bench_estimate_spread(c: &mut Criterion) {
    let graph = Arc::new(random_graph(200, 800, 1));
    let theta = weighted_cascade_probs(&graph).unwrap();
    let sim = IcSimulator::new(graph, theta).unwrap();
    let x = Subset::from_indices(200, [0, 17, 55, 120, 199]).unwrap();

    let mut group = c.benchmark_group("estimate_spread");
    for r in [100u32, 1000] {
        group.bench_with_input(BenchmarkId::new("parallel", r), &r, |b, &r| {
            b.iter(|| estimate_spread(&sim, &x, r, 42))
        });
        group.bench_with_input(BenchmarkId::new("sequential", r), &r, |b, &r| {
            b.iter(|| estimate_spread_seq(&sim, &x, r, 42))
        });
    }
    group.finish();
}

fn bench_exact_spread(c: &mut Criterion) {
    let graph = random_graph(12, 18, 2);
    let theta = ProbabilityVector::new(vec![0.3; 18]).unwrap();
    let x = Subset::from_indices(12, [0, 5]).unwrap();

    // both paths must agree bit-for-bit
    assert_eq!(
        exact_spread_live_edge(&graph, &theta, &x)
            .unwrap()
            .to_bits(),
        exact_spread_live_edge_seq(&graph, &theta, &x)
            .unwrap()
            .to_bits()
    );

    let mut group = c.benchmark_group("exact_spread_18_edges");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| exact_spread_live_edge(&graph, &theta, &x).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| exact_spread_live_edge_seq(&graph, &theta, &x).unwrap())
    });
    group.finish();
}

fn bench_greedy_on_noisy_ensemble(c: &mut Criterion) {
    let graph = Arc::new(random_graph(60, 240, 3));
    let theta = weighted_cascade_probs(&graph).unwrap();
    let make_ensemble = || {
        let functions: Vec<Arc<dyn SetFunction>> = (0..3)
            .map(|i| {
                let sim = IcSimulator::new(graph.clone(), theta.clone()).unwrap();
                Arc::new(StochasticOracle::new(
                    SpreadSampler::new(sim, 100).unwrap(),
                    SeedPolicy::MemoizedPerSubset,
                    i as u64,
                )) as Arc<dyn SetFunction>
            })
            .collect();
        ObjectiveEnsemble::from_functions(functions).unwrap()
    };

    let mut group = c.benchmark_group("greedy_noisy_n60_k3");
    group.sample_size(10);
    group.bench_function("default", |b| {
        b.iter(|| {
            let ens = make_ensemble();
            greedy_select(&ens, 3).unwrap()
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_estimate_spread,
    bench_exact_spread,
    bench_greedy_on_noisy_ensemble
);
criterion_main!(benches);
