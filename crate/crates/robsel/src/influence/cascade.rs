//! Independent-cascade simulation and the seeded Monte Carlo spread
//! estimator.
//!
//! Replicates use sub-seeds derived from `(seed, replicate index)`, so the
//! estimate is a pure function of its inputs and replicates can fan out
//! across threads without changing the result: per-replicate activation
//! counts are integers and their sum is order-independent.

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objective::Sampler;
use crate::seeding;
use crate::subset::Subset;

use super::graph::{DirectedGraph, ProbabilityVector};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// One independent cascade from seed set `x`: each newly activated node tries
/// each currently inactive out-neighbor exactly once, in the following time
/// step; the process stops when a step activates nothing. Returns the total
/// number of active nodes (at least `|x|`).
pub fn simulate_ic(
    graph: &DirectedGraph,
    theta: &ProbabilityVector,
    x: &Subset,
    rng: &mut ChaCha8Rng,
) -> usize {
    assert_eq!(theta.len(), graph.edge_count(), "probability vector length");
    assert_eq!(x.width(), graph.node_count(), "seed set width");
    let mut active = vec![false; graph.node_count()];
    let mut frontier: Vec<usize> = x.iter_ones().collect();
    for &s in &frontier {
        active[s] = true;
    }
    let mut count = frontier.len();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for &(v, e) in graph.out_neighbors(u) {
                if !active[v] && rng.random_bool(theta.get(e)) {
                    active[v] = true;
                    count += 1;
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        frontier = next;
    }
    count
}

/// Parameters of the failure-dependent activation probability
/// `min{base + increment·|S_v|, cap}`, where `S_v` is the set of neighbors
/// whose attempt on `v` has already failed.
#[derive(Clone, Copy, Debug)]
pub struct GeneralIcParams {
    pub base: f64,
    pub increment: f64,
    pub cap: f64,
}

impl Default for GeneralIcParams {
    fn default() -> Self {
        GeneralIcParams {
            base: 0.1,
            increment: 0.05,
            cap: 1.0,
        }
    }
}

impl GeneralIcParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.base && self.base <= self.cap && self.cap <= 1.0) {
            return Err(Error::InvalidArgument("need 0 <= base <= cap <= 1".into()));
        }
        if !self.increment.is_finite() || self.increment < 0.0 {
            return Err(Error::InvalidArgument("increment must be >= 0".into()));
        }
        Ok(())
    }

    pub fn attempt_probability(&self, failed: u32) -> f64 {
        (self.base + self.increment * failed as f64).min(self.cap)
    }
}

/// Cascade under the general model: the probability of an attempt on `v`
/// grows with the number of earlier failed attempts, which persists across
/// time steps. Attempts within a time step run in ascending attacker id,
/// then ascending target id, so runs are seed-reproducible.
pub fn simulate_general_ic(
    graph: &DirectedGraph,
    params: &GeneralIcParams,
    x: &Subset,
    rng: &mut ChaCha8Rng,
) -> usize {
    assert_eq!(x.width(), graph.node_count(), "seed set width");
    let mut active = vec![false; graph.node_count()];
    let mut failed = vec![0u32; graph.node_count()];
    let mut frontier: Vec<usize> = x.iter_ones().collect();
    for &s in &frontier {
        active[s] = true;
    }
    let mut count = frontier.len();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for &(v, _) in graph.out_neighbors(u) {
                if active[v] {
                    continue;
                }
                if rng.random_bool(params.attempt_probability(failed[v])) {
                    active[v] = true;
                    count += 1;
                    next.push(v);
                } else {
                    failed[v] += 1;
                }
            }
        }
        next.sort_unstable();
        frontier = next;
    }
    count
}

/// A diffusion process whose single run can be simulated with a seeded
/// generator.
pub trait CascadeSimulator: Send + Sync {
    fn node_count(&self) -> usize;
    fn simulate(&self, x: &Subset, rng: &mut ChaCha8Rng) -> usize;
}

/// Independent cascade with fixed per-edge probabilities.
#[derive(Clone, Debug)]
pub struct IcSimulator {
    graph: Arc<DirectedGraph>,
    theta: ProbabilityVector,
}

impl IcSimulator {
    pub fn new(graph: Arc<DirectedGraph>, theta: ProbabilityVector) -> Result<Self> {
        if theta.len() != graph.edge_count() {
            return Err(Error::LengthMismatch {
                left: theta.len(),
                right: graph.edge_count(),
            });
        }
        Ok(IcSimulator { graph, theta })
    }

    pub fn theta(&self) -> &ProbabilityVector {
        &self.theta
    }
}

impl CascadeSimulator for IcSimulator {
    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    fn simulate(&self, x: &Subset, rng: &mut ChaCha8Rng) -> usize {
        simulate_ic(&self.graph, &self.theta, x, rng)
    }
}

/// General cascade with failure-dependent activation probabilities.
#[derive(Clone, Debug)]
pub struct GeneralIcSimulator {
    graph: Arc<DirectedGraph>,
    params: GeneralIcParams,
}

impl GeneralIcSimulator {
    pub fn new(graph: Arc<DirectedGraph>, params: GeneralIcParams) -> Result<Self> {
        params.validate()?;
        Ok(GeneralIcSimulator { graph, params })
    }
}

impl CascadeSimulator for GeneralIcSimulator {
    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    fn simulate(&self, x: &Subset, rng: &mut ChaCha8Rng) -> usize {
        simulate_general_ic(&self.graph, &self.params, x, rng)
    }
}

/// Mean and sample standard deviation of the replicate activation counts.
#[derive(Clone, Copy, Debug)]
pub struct SpreadStats {
    pub mean: f64,
    pub std_dev: f64,
    pub replicates: u32,
}

fn replicate_sums<S: CascadeSimulator>(sim: &S, x: &Subset, r: u32, seed: u64) -> (u64, u128) {
    let one = |i: u32| {
        let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, &[i as u64]));
        sim.simulate(x, &mut rng) as u64
    };
    #[cfg(feature = "parallel")]
    {
        (0..r)
            .into_par_iter()
            .map(|i| {
                let c = one(i);
                (c, (c as u128) * (c as u128))
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut sum = 0u64;
        let mut sumsq = 0u128;
        for i in 0..r {
            let c = one(i);
            sum += c;
            sumsq += (c as u128) * (c as u128);
        }
        (sum, sumsq)
    }
}

fn stats_from_sums(sum: u64, sumsq: u128, r: u32) -> SpreadStats {
    let rf = r as f64;
    let mean = sum as f64 / rf;
    let var = if r > 1 {
        ((sumsq as f64) - (sum as f64) * (sum as f64) / rf) / (rf - 1.0)
    } else {
        0.0
    };
    SpreadStats {
        mean,
        std_dev: var.max(0.0).sqrt(),
        replicates: r,
    }
}

/// Mean activation count over `r` independent seeded replicates.
pub fn estimate_spread<S: CascadeSimulator>(sim: &S, x: &Subset, r: u32, seed: u64) -> f64 {
    estimate_spread_stats(sim, x, r, seed).mean
}

pub fn estimate_spread_stats<S: CascadeSimulator>(
    sim: &S,
    x: &Subset,
    r: u32,
    seed: u64,
) -> SpreadStats {
    assert!(r >= 1, "at least one replicate");
    let (sum, sumsq) = replicate_sums(sim, x, r, seed);
    stats_from_sums(sum, sumsq, r)
}

/// Always-sequential reference path; bit-identical to [`estimate_spread`].
pub fn estimate_spread_seq<S: CascadeSimulator>(sim: &S, x: &Subset, r: u32, seed: u64) -> f64 {
    assert!(r >= 1, "at least one replicate");
    let mut sum = 0u64;
    let mut sumsq = 0u128;
    for i in 0..r {
        let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, &[i as u64]));
        let c = sim.simulate(x, &mut rng) as u64;
        sum += c;
        sumsq += (c as u128) * (c as u128);
    }
    stats_from_sums(sum, sumsq, r).mean
}

/// Adapts a cascade simulator into a noisy set-function [`Sampler`]: one
/// sample is the `r`-replicate spread estimate.
pub struct SpreadSampler<S> {
    sim: S,
    replicates: u32,
}

impl<S: CascadeSimulator> SpreadSampler<S> {
    pub fn new(sim: S, replicates: u32) -> Result<Self> {
        if replicates < 1 {
            return Err(Error::InvalidArgument("replicates must be >= 1".into()));
        }
        Ok(SpreadSampler { sim, replicates })
    }
}

impl<S: CascadeSimulator> Sampler for SpreadSampler<S> {
    fn n(&self) -> usize {
        self.sim.node_count()
    }

    fn sample(&self, x: &Subset, seed: u64) -> f64 {
        estimate_spread(&self.sim, x, self.replicates, seed)
    }
}
