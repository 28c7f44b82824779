//! Influence-maximization application layer: graph ingestion, edge
//! probabilities and their perturbation, independent-cascade Monte Carlo
//! simulation, and the exact live-edge spread used as a desk-scale oracle.

mod cascade;
mod graph;
mod spread;

pub use cascade::{
    estimate_spread, estimate_spread_seq, estimate_spread_stats, simulate_general_ic, simulate_ic,
    CascadeSimulator, GeneralIcParams, GeneralIcSimulator, IcSimulator, SpreadSampler, SpreadStats,
};
pub use graph::{
    load_edge_list, perturb_probs, read_probability_vector, top_active_subgraph, vector_distance,
    weighted_cascade_probs, write_probability_vector, DirectedGraph, Edge, ProbabilityVector,
};
pub use spread::{
    beta_lower_bound, exact_spread_live_edge, exact_spread_live_edge_seq, ExactSpreadFunction,
    EXACT_SPREAD_EDGE_LIMIT,
};
