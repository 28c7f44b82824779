//! Per-iteration run records emitted by every solver.

use crate::subset::Subset;

/// One recorded point of a solver run.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub iteration: u64,
    /// Item added at this step, when the solver grows one item at a time.
    pub chosen: Option<usize>,
    /// Current (or best-so-far) subset at this point.
    pub subset: Subset,
    /// Objective value the solver attributes to `subset`.
    pub f_value: f64,
    /// Worst-case objective evaluations consumed so far in this run.
    pub evals: u64,
}

#[derive(Clone, Debug)]
pub struct RunTrace {
    pub algorithm: String,
    pub seed: Option<u64>,
    pub steps: Vec<TraceStep>,
    pub warnings: Vec<String>,
}

impl RunTrace {
    pub fn new(algorithm: impl Into<String>, seed: Option<u64>) -> Self {
        RunTrace {
            algorithm: algorithm.into(),
            seed,
            steps: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Final objective value, 0 for an empty trace (no step ever improved on
    /// the empty set).
    pub fn final_f(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.f_value)
    }

    /// Total worst-case evaluations consumed by the run.
    pub fn total_evals(&self) -> u64 {
        self.steps.last().map_or(0, |s| s.evals)
    }
}
