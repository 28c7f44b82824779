//! Evolutionary Pareto optimization for robust subset selection.
//!
//! The cardinality-constrained problem is recast as bi-objective
//! maximization of `(g1, g2)` where `g1` is the worst-case objective (or
//! `-∞` once a solution reaches twice the budget) and `g2 = -|x|`. A
//! domination-based archive keeps one incumbent per size; each iteration
//! mutates a uniformly chosen archive member by independent bit flips and
//! re-inserts, and the final answer is the archived solution of size at most
//! `k` with the largest objective value.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objective::ObjectiveEnsemble;
use crate::subset::Subset;
use crate::trace::{RunTrace, TraceStep};

/// An evaluated archive member.
#[derive(Clone, Debug)]
pub struct Solution {
    bits: Subset,
    g1: f64,
}

impl Solution {
    pub fn new(bits: Subset, g1: f64) -> Self {
        Solution { bits, g1 }
    }

    pub fn bits(&self) -> &Subset {
        &self.bits
    }

    pub fn g1(&self) -> f64 {
        self.g1
    }

    pub fn size(&self) -> usize {
        self.bits.len()
    }

    pub fn g2(&self) -> i64 {
        -(self.size() as i64)
    }
}

/// Outcome of comparing two solutions under the bi-objective order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dominance {
    /// `a` strictly dominates `b`.
    Dominates,
    /// `b` strictly dominates `a`.
    DominatedBy,
    /// Equal on both objectives.
    Equal,
    /// Neither weakly dominates the other.
    Incomparable,
}

/// `a` is no worse than `b` on both objectives. `-∞` compares below every
/// real value.
pub fn weakly_dominates(a: &Solution, b: &Solution) -> bool {
    a.g1() >= b.g1() && a.g2() >= b.g2()
}

/// Weak domination with at least one strict inequality.
pub fn dominates(a: &Solution, b: &Solution) -> bool {
    weakly_dominates(a, b) && (a.g1() > b.g1() || a.g2() > b.g2())
}

pub fn compare(a: &Solution, b: &Solution) -> Dominance {
    match (weakly_dominates(a, b), weakly_dominates(b, a)) {
        (true, true) => Dominance::Equal,
        (true, false) => Dominance::Dominates,
        (false, true) => Dominance::DominatedBy,
        (false, false) => Dominance::Incomparable,
    }
}

/// `(g1, g2)` of a bit vector: `g1` is the worst-case objective unless the
/// solution has reached size `2k`, which is punished with `-∞`; `g2` is the
/// negated size. Consumes a worst-case evaluation only when `|x| < 2k`.
pub fn bi_objective(bits: &Subset, k: usize, ensemble: &ObjectiveEnsemble) -> Result<(f64, i64)> {
    if bits.width() != ensemble.n() {
        return Err(Error::InvalidSubset {
            width: bits.width(),
            expected: ensemble.n(),
        });
    }
    let size = bits.len();
    let g2 = -(size as i64);
    if size >= 2 * k {
        Ok((f64::NEG_INFINITY, g2))
    } else {
        Ok((ensemble.evaluate_worst_case(bits)?, g2))
    }
}

/// Flip each bit independently with probability `1/n`. The parent is left
/// unchanged.
pub fn mutate(bits: &Subset, rng: &mut ChaCha8Rng) -> Subset {
    let n = bits.width();
    let p = 1.0 / n as f64;
    let mut child = bits.clone();
    for i in 0..n {
        if rng.random_bool(p) {
            child.flip(i);
        }
    }
    child
}

/// The non-dominated archive: mutually incomparable solutions, at most one
/// per size in `{0, .., 2k-1}`.
#[derive(Clone, Debug)]
pub struct Population {
    members: Vec<Solution>,
    k: usize,
}

impl Population {
    pub fn new(k: usize, initial: Solution) -> Self {
        Population {
            members: vec![initial],
            k,
        }
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Insert a candidate: rejected if some incumbent strictly dominates it,
    /// otherwise it replaces everything it weakly dominates. Returns whether
    /// the candidate entered the archive.
    pub fn insert(&mut self, candidate: Solution) -> bool {
        if self.members.iter().any(|z| dominates(z, &candidate)) {
            return false;
        }
        self.members.retain(|z| !weakly_dominates(&candidate, z));
        self.members.push(candidate);
        true
    }

    /// Best archived solution with size at most `budget`; ties resolve to the
    /// smaller size, then the index-lexicographically smaller bit vector.
    pub fn best_feasible(&self, budget: usize) -> Option<&Solution> {
        self.members
            .iter()
            .filter(|s| s.size() <= budget)
            .min_by(|a, b| {
                b.g1()
                    .partial_cmp(&a.g1())
                    .unwrap()
                    .then(a.size().cmp(&b.size()))
                    .then_with(|| a.bits().cmp_indices(b.bits()))
            })
    }

    /// Structural invariants of the archive; exercised by the verification
    /// suite and in debug builds after every insert.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.members.len() > 2 * self.k {
            return Err(format!(
                "archive holds {} solutions, limit {}",
                self.members.len(),
                2 * self.k
            ));
        }
        for s in &self.members {
            if s.size() >= 2 * self.k {
                return Err(format!("archived solution of size {}", s.size()));
            }
        }
        for (i, a) in self.members.iter().enumerate() {
            for b in self.members.iter().skip(i + 1) {
                if a.size() == b.size() {
                    return Err(format!("two archived solutions of size {}", a.size()));
                }
                if compare(a, b) != Dominance::Incomparable {
                    return Err("archive holds a comparable pair".into());
                }
            }
        }
        match self.members.iter().find(|s| s.size() == 0) {
            Some(zero) if zero.g1() >= 0.0 => Ok(()),
            Some(_) => Err("size-0 slot has negative value".into()),
            None => Err("size-0 slot is empty".into()),
        }
    }
}

/// Iteration budget suggested for a ground set of size `n` and budget `k`:
/// `⌊2·e·k²·n⌋`.
pub fn default_iterations(k: usize, n: usize) -> u64 {
    (2.0 * std::f64::consts::E * (k * k * n) as f64).floor() as u64
}

/// Run the evolutionary loop for `t` iterations from the all-zeros solution.
/// Deterministic given `(ensemble, k, t, seed)`. The trace samples the best
/// feasible objective value every `⌈t/200⌉` iterations.
pub fn eporss_run(
    ensemble: &ObjectiveEnsemble,
    k: usize,
    t: u64,
    seed: u64,
) -> Result<(Subset, RunTrace)> {
    eporss_run_observed(ensemble, k, t, seed, |_, _| {})
}

/// [`eporss_run`] with a per-iteration observer over the archive, used by the
/// structural-invariant checks.
pub fn eporss_run_observed(
    ensemble: &ObjectiveEnsemble,
    k: usize,
    t: u64,
    seed: u64,
    mut observer: impl FnMut(u64, &Population),
) -> Result<(Subset, RunTrace)> {
    let n = ensemble.n();
    if k < 1 || k > n {
        return Err(Error::InvalidBudget { k, n });
    }
    let start_evals = ensemble.worst_case_eval_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = RunTrace::new("eporss", Some(seed));

    let zeros = Subset::empty(n);
    let (g1, _) = bi_objective(&zeros, k, ensemble)?;
    let mut population = Population::new(k, Solution::new(zeros, g1));

    let cadence = (t / 200).max(1);
    let record = |population: &Population, iteration: u64, trace: &mut RunTrace, evals: u64| {
        let best = population
            .best_feasible(k)
            .expect("size-0 slot always present");
        trace.steps.push(TraceStep {
            iteration,
            chosen: None,
            subset: best.bits().clone(),
            f_value: best.g1(),
            evals,
        });
    };
    record(
        &population,
        0,
        &mut trace,
        ensemble.worst_case_eval_count() - start_evals,
    );

    for iteration in 1..=t {
        let parent = population.members()[rng.random_range(0..population.len())]
            .bits()
            .clone();
        let child = mutate(&parent, &mut rng);
        // Solutions at or beyond size 2k are strictly dominated by the
        // ever-present all-zeros member; drop them without spending an
        // evaluation.
        if child.len() < 2 * k {
            let (g1, _) = bi_objective(&child, k, ensemble)?;
            population.insert(Solution::new(child, g1));
            debug_assert_eq!(population.check_invariants(), Ok(()));
        }
        observer(iteration, &population);
        if iteration % cadence == 0 || iteration == t {
            record(
                &population,
                iteration,
                &mut trace,
                ensemble.worst_case_eval_count() - start_evals,
            );
        }
    }

    let best = population
        .best_feasible(k)
        .expect("size-0 slot always present");
    Ok((best.bits().clone(), trace))
}
