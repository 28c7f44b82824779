//! Exact influence spread by live-edge enumeration.
//!
//! The spread under fixed edge probabilities decomposes over live-edge
//! subgraphs: each edge appears independently with its probability, and the
//! spread is the probability-weighted sum of the reachability counts over all
//! `2^|E|` subgraphs. Exponential in the edge count, so it is guarded and
//! meant for desk-scale verification only.
//!
//! Summation runs over fixed-size chunks of the subgraph index space whose
//! partial sums are accumulated in chunk order, so the parallel and
//! sequential paths produce bit-identical results.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::objective::SetFunction;
use crate::subset::Subset;

use super::graph::{DirectedGraph, ProbabilityVector};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maximum edge count accepted by the exact enumeration (2^22 subgraphs).
pub const EXACT_SPREAD_EDGE_LIMIT: usize = 22;

const CHUNK_BITS: u32 = 14;

struct Scratch {
    stamp: Vec<u64>,
    epoch: u64,
    queue: Vec<usize>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            stamp: vec![0; n],
            epoch: 0,
            queue: Vec::with_capacity(n),
        }
    }
}

/// Weighted reachability over one chunk of live-edge masks.
fn chunk_sum(
    graph: &DirectedGraph,
    probs: &[f64],
    seeds: &[usize],
    mask_lo: u64,
    mask_hi: u64,
    scratch: &mut Scratch,
) -> f64 {
    let mut acc = 0.0;
    'next_mask: for mask in mask_lo..mask_hi {
        let mut pi = 1.0;
        for (e, &p) in probs.iter().enumerate() {
            pi *= if mask & (1 << e) != 0 { p } else { 1.0 - p };
            if pi == 0.0 {
                continue 'next_mask;
            }
        }
        scratch.epoch += 1;
        let epoch = scratch.epoch;
        scratch.queue.clear();
        for &s in seeds {
            if scratch.stamp[s] != epoch {
                scratch.stamp[s] = epoch;
                scratch.queue.push(s);
            }
        }
        let mut head = 0;
        while head < scratch.queue.len() {
            let u = scratch.queue[head];
            head += 1;
            for &(v, e) in graph.out_neighbors(u) {
                if mask & (1 << e) != 0 && scratch.stamp[v] != epoch {
                    scratch.stamp[v] = epoch;
                    scratch.queue.push(v);
                }
            }
        }
        acc += pi * scratch.queue.len() as f64;
    }
    acc
}

fn exact_spread_impl(
    graph: &DirectedGraph,
    theta: &ProbabilityVector,
    x: &Subset,
    parallel: bool,
) -> Result<f64> {
    let edges = graph.edge_count();
    if edges > EXACT_SPREAD_EDGE_LIMIT {
        return Err(Error::EdgeLimit {
            edges,
            limit: EXACT_SPREAD_EDGE_LIMIT,
        });
    }
    if theta.len() != edges {
        return Err(Error::LengthMismatch {
            left: theta.len(),
            right: edges,
        });
    }
    if x.width() != graph.node_count() {
        return Err(Error::InvalidSubset {
            width: x.width(),
            expected: graph.node_count(),
        });
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    let seeds: Vec<usize> = x.iter_ones().collect();
    let probs = theta.as_slice();
    let total_masks: u64 = 1 << edges;
    let chunk_len: u64 = 1 << CHUNK_BITS.min(edges as u32);
    let chunks: u64 = total_masks.div_ceil(chunk_len);

    let partials: Vec<f64> = if parallel {
        #[cfg(feature = "parallel")]
        {
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut scratch = Scratch::new(graph.node_count());
                    let lo = c * chunk_len;
                    chunk_sum(
                        graph,
                        probs,
                        &seeds,
                        lo,
                        (lo + chunk_len).min(total_masks),
                        &mut scratch,
                    )
                })
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            unreachable!("parallel path requested without the parallel feature")
        }
    } else {
        let mut scratch = Scratch::new(graph.node_count());
        (0..chunks)
            .map(|c| {
                let lo = c * chunk_len;
                chunk_sum(
                    graph,
                    probs,
                    &seeds,
                    lo,
                    (lo + chunk_len).min(total_masks),
                    &mut scratch,
                )
            })
            .collect()
    };
    Ok(partials.iter().sum())
}

/// Exact expected spread `Σ_S π_θ(S)·σ_S(X)` over all live-edge subgraphs.
pub fn exact_spread_live_edge(
    graph: &DirectedGraph,
    theta: &ProbabilityVector,
    x: &Subset,
) -> Result<f64> {
    exact_spread_impl(graph, theta, x, cfg!(feature = "parallel"))
}

/// Always-sequential reference path; bit-identical to
/// [`exact_spread_live_edge`].
pub fn exact_spread_live_edge_seq(
    graph: &DirectedGraph,
    theta: &ProbabilityVector,
    x: &Subset,
) -> Result<f64> {
    exact_spread_impl(graph, theta, x, false)
}

/// Correlation-ratio lower bound `1 - 2·e·n·δ_max` for perturbed influence
/// ensembles; non-positive values are vacuous.
pub fn beta_lower_bound(n: usize, delta_max: f64) -> f64 {
    1.0 - 2.0 * std::f64::consts::E * n as f64 * delta_max
}

/// The exact spread as a deterministic monotone set function; construction
/// enforces the edge-count guard so evaluation cannot fail.
pub struct ExactSpreadFunction {
    graph: Arc<DirectedGraph>,
    theta: ProbabilityVector,
}

impl ExactSpreadFunction {
    pub fn new(graph: Arc<DirectedGraph>, theta: ProbabilityVector) -> Result<Self> {
        if graph.edge_count() > EXACT_SPREAD_EDGE_LIMIT {
            return Err(Error::EdgeLimit {
                edges: graph.edge_count(),
                limit: EXACT_SPREAD_EDGE_LIMIT,
            });
        }
        if theta.len() != graph.edge_count() {
            return Err(Error::LengthMismatch {
                left: theta.len(),
                right: graph.edge_count(),
            });
        }
        Ok(ExactSpreadFunction { graph, theta })
    }

    pub fn theta(&self) -> &ProbabilityVector {
        &self.theta
    }
}

impl SetFunction for ExactSpreadFunction {
    fn n(&self) -> usize {
        self.graph.node_count()
    }

    fn evaluate(&self, x: &Subset) -> f64 {
        exact_spread_live_edge(&self.graph, &self.theta, x)
            .expect("graph validated at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3(p: f64) -> (DirectedGraph, ProbabilityVector) {
        let g = DirectedGraph::from_edge_list_text("0 1\n1 2\n").unwrap();
        let theta = ProbabilityVector::new(vec![p; 2]).unwrap();
        (g, theta)
    }

    #[test]
    fn deterministic_path() {
        let (g, theta) = path3(1.0);
        let x = Subset::from_indices(3, [0]).unwrap();
        assert_eq!(exact_spread_live_edge(&g, &theta, &x).unwrap(), 3.0);
    }

    #[test]
    fn half_probability_path() {
        let (g, theta) = path3(0.5);
        let x = Subset::from_indices(3, [0]).unwrap();
        let v = exact_spread_live_edge(&g, &theta, &x).unwrap();
        assert!((v - 1.75).abs() < 1e-12, "spread {v}");
    }

    #[test]
    fn empty_seed_set() {
        let (g, theta) = path3(0.5);
        assert_eq!(
            exact_spread_live_edge(&g, &theta, &Subset::empty(3)).unwrap(),
            0.0
        );
    }

    #[test]
    fn edge_guard() {
        let text: String = (0..23).map(|i| format!("{i} {}\n", i + 23)).collect();
        let g = DirectedGraph::from_edge_list_text(&text).unwrap();
        let theta = ProbabilityVector::new(vec![0.5; 23]).unwrap();
        let x = Subset::from_indices(g.node_count(), [0]).unwrap();
        assert!(matches!(
            exact_spread_live_edge(&g, &theta, &x),
            Err(Error::EdgeLimit { edges: 23, .. })
        ));
        assert!(ExactSpreadFunction::new(Arc::new(g), theta).is_err());
    }

    #[test]
    fn parallel_matches_sequential_bitwise() {
        let g = DirectedGraph::from_edge_list_text("0 1\n0 2\n1 3\n2 3\n3 4\n4 0\n1 4\n2 4\n0 3\n")
            .unwrap();
        let theta =
            ProbabilityVector::new(vec![0.3, 0.7, 0.25, 0.6, 0.45, 0.8, 0.15, 0.55, 0.35]).unwrap();
        let x = Subset::from_indices(5, [0, 2]).unwrap();
        let a = exact_spread_live_edge(&g, &theta, &x).unwrap();
        let b = exact_spread_live_edge_seq(&g, &theta, &x).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn beta_bound_values() {
        assert_eq!(beta_lower_bound(10, 0.0), 1.0);
        let v = beta_lower_bound(200, 1e-4);
        assert!((v - 0.891_268_7).abs() < 1e-6, "bound {v}");
        assert!(beta_lower_bound(10, 1.0) < 0.0);
    }

    #[test]
    fn exact_spread_is_monotone_and_submodular() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g =
            DirectedGraph::from_edge_list_text("0 1\n1 2\n2 0\n0 3\n3 4\n4 1\n2 4\n1 3\n").unwrap();
        let n = g.node_count();
        let theta = ProbabilityVector::new(
            (0..g.edge_count())
                .map(|_| rng.random_range(0.0..=1.0))
                .collect(),
        )
        .unwrap();
        let f = |x: &Subset| exact_spread_live_edge(&g, &theta, x).unwrap();
        // enumerate all X ⊆ Y and all v ∉ Y
        for y_mask in 0u32..(1 << n) {
            let y = Subset::from_indices(n, (0..n).filter(|i| y_mask & (1 << i) != 0)).unwrap();
            let fy = f(&y);
            let mut x_mask = y_mask;
            loop {
                let x = Subset::from_indices(n, (0..n).filter(|i| x_mask & (1 << i) != 0)).unwrap();
                let fx = f(&x);
                assert!(
                    fx <= fy + 1e-9,
                    "monotonicity: f({x:?})={fx} > f({y:?})={fy}"
                );
                for v in 0..n {
                    if !y.contains(v) {
                        let gain_x = f(&x.with_inserted(v)) - fx;
                        let gain_y = f(&y.with_inserted(v)) - fy;
                        assert!(
                            gain_x >= gain_y - 1e-9,
                            "submodularity violated at X={x:?} Y={y:?} v={v}"
                        );
                    }
                }
                if x_mask == 0 {
                    break;
                }
                x_mask = (x_mask - 1) & y_mask;
            }
        }
    }

    #[test]
    fn matches_monte_carlo_on_small_graph() {
        use crate::influence::cascade::{estimate_spread, IcSimulator};
        let g = Arc::new(DirectedGraph::from_edge_list_text("0 1\n1 2\n0 2\n2 3\n").unwrap());
        let theta = ProbabilityVector::new(vec![0.5, 0.4, 0.3, 0.6]).unwrap();
        let x = Subset::from_indices(4, [0]).unwrap();
        let exact = exact_spread_live_edge(&g, &theta, &x).unwrap();
        let sim = IcSimulator::new(g.clone(), theta).unwrap();
        let mc = estimate_spread(&sim, &x, 200_000, 5);
        assert!((exact - mc).abs() < 0.02, "exact {exact} vs mc {mc}");
    }
}
