//! Robust subset selection: pick at most `k` items from a ground set so that
//! the worst of `m` monotone objective functions is as large as possible.
//!
//! The crate provides:
//!
//! - [`objective`]: set-function oracles (deterministic families and seeded
//!   noisy estimators) and the min-aggregated ensemble with evaluation
//!   accounting;
//! - [`greedy`]: the greedy selector and the modified greedy variant with
//!   exact evaluation-count contracts;
//! - [`saturate`]: the bisection-over-target baseline with a truncated-mean
//!   greedy subroutine;
//! - [`eporss`]: evolutionary Pareto optimization over `(F, -|x|)` with a
//!   domination-based archive and bit-wise mutation;
//! - [`influence`]: influence-maximization objectives (edge-list ingestion,
//!   weighted-cascade probabilities, perturbed ensembles, independent-cascade
//!   Monte Carlo, exact live-edge spread);
//! - [`ratios`]: brute-force oracles for the submodularity and correlation
//!   ratios, the exhaustive optimum, and per-run guarantee reports;
//! - [`verify`]: the property suite that checks the solvers against the
//!   brute-force oracles on generated desk-scale instances.
//!
//! With the default `parallel` feature, Monte Carlo replicates, candidate
//! scans, and enumerations fan out via rayon; all reductions are arranged so
//! results are bit-identical with the feature disabled.

pub mod eporss;
pub mod error;
pub mod greedy;
pub mod influence;
pub mod objective;
pub mod ratios;
pub mod saturate;
pub mod seeding;
pub mod subset;
pub mod trace;
pub mod verify;

pub use error::{Error, Result};
pub use objective::{GroundSet, ObjectiveEnsemble, SeedPolicy, SetFunction};
pub use subset::Subset;
pub use trace::{RunTrace, TraceStep};

/// Crate version, embedded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Cap the rayon worker count from the `ROBSEL_THREADS` environment variable.
/// No-op when the variable is unset/invalid or the `parallel` feature is off.
pub fn configure_threads_from_env() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(value) = std::env::var("ROBSEL_THREADS") {
            if let Ok(threads) = value.parse::<usize>() {
                if threads >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(threads)
                        .build_global();
                }
            }
        }
    }
}
