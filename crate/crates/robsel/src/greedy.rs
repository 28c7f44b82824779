//! Greedy maximization of the worst-case objective, plus the modified greedy
//! variant that scores candidates by their worst normalized per-function gain.
//!
//! Both selectors have exact evaluation-count contracts: greedy consumes
//! `(n - k/2 + 1/2)·k` worst-case evaluations, modified greedy twice that,
//! `(2n - k + 1)·k`, because each iteration first locates every function's
//! best single addition and then re-evaluates the candidates for the ratio
//! argmax instead of caching the first pass.

use crate::error::{Error, Result};
use crate::objective::ObjectiveEnsemble;
use crate::subset::Subset;
use crate::trace::{RunTrace, TraceStep};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

fn check_budget(ensemble: &ObjectiveEnsemble, k: usize) -> Result<()> {
    let n = ensemble.n();
    if k < 1 || k > n {
        return Err(Error::InvalidBudget { k, n });
    }
    Ok(())
}

/// Component values `f_1..f_m` of `base ∪ {v}` for every candidate `v`, in
/// candidate order. One worst-case evaluation per candidate.
fn scan_components(
    ensemble: &ObjectiveEnsemble,
    base: &Subset,
    candidates: &[usize],
) -> Result<Vec<Vec<f64>>> {
    #[cfg(feature = "parallel")]
    {
        candidates
            .par_iter()
            .map(|&v| ensemble.evaluate_components(&base.with_inserted(v)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        candidates
            .iter()
            .map(|&v| ensemble.evaluate_components(&base.with_inserted(v)))
            .collect()
    }
}

/// Index of the strictly largest value; ties resolve to the first (lowest)
/// index.
fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Iteratively add the item with the largest `F(X ∪ {v})` until `k` items are
/// selected. Argmax ties break to the lowest item index.
pub fn greedy_select(ensemble: &ObjectiveEnsemble, k: usize) -> Result<(Subset, RunTrace)> {
    check_budget(ensemble, k)?;
    let n = ensemble.n();
    let start_evals = ensemble.worst_case_eval_count();
    let mut trace = RunTrace::new("greedy", None);
    let mut x = Subset::empty(n);

    for j in 1..=k {
        let candidates: Vec<usize> = (0..n).filter(|&v| !x.contains(v)).collect();
        let components = scan_components(ensemble, &x, &candidates)?;
        let values: Vec<f64> = components.iter().map(|c| min_of(c)).collect();
        let best = argmax_first(&values);
        x.insert(candidates[best]);
        trace.steps.push(TraceStep {
            iteration: j as u64,
            chosen: Some(candidates[best]),
            subset: x.clone(),
            f_value: values[best],
            evals: ensemble.worst_case_eval_count() - start_evals,
        });
    }
    Ok((x, trace))
}

/// Modified greedy: each iteration finds every `f_i`'s best single addition,
/// then adds the item maximizing `min_i gain_i(v) / best_gain_i`.
///
/// Gain-ratio terms whose denominator is not positive count as 1: when even
/// the best addition cannot improve `f_i`, monotonicity forces every gain to
/// zero and the constraint is vacuous, so a saturated function must not
/// penalize candidates.
pub fn modified_greedy_select(
    ensemble: &ObjectiveEnsemble,
    k: usize,
) -> Result<(Subset, RunTrace)> {
    modified_greedy_with_caching(ensemble, k, false)
}

/// Modified greedy with the candidate values of the first pass reused for the
/// ratio argmax. Same selections on deterministic instances, but only
/// `(n - k/2 + 1/2)·k` evaluations; trades the exact double-evaluation count
/// for speed.
pub fn modified_greedy_select_cached(
    ensemble: &ObjectiveEnsemble,
    k: usize,
) -> Result<(Subset, RunTrace)> {
    modified_greedy_with_caching(ensemble, k, true)
}

fn modified_greedy_with_caching(
    ensemble: &ObjectiveEnsemble,
    k: usize,
    cache_gains: bool,
) -> Result<(Subset, RunTrace)> {
    check_budget(ensemble, k)?;
    let n = ensemble.n();
    let m = ensemble.m();
    let start_evals = ensemble.worst_case_eval_count();
    let name = if cache_gains {
        "modified-greedy-cached"
    } else {
        "modified-greedy"
    };
    let mut trace = RunTrace::new(name, None);
    let mut x = Subset::empty(n);
    // f_i(X_0) = 0 by normalization; thereafter carried from the chosen candidate.
    let mut base = vec![0.0f64; m];

    for j in 1..=k {
        let candidates: Vec<usize> = (0..n).filter(|&v| !x.contains(v)).collect();

        // pass 1: largest improvement per function
        let first = scan_components(ensemble, &x, &candidates)?;
        let mut best_gain = vec![f64::NEG_INFINITY; m];
        for row in &first {
            for i in 0..m {
                best_gain[i] = best_gain[i].max(row[i] - base[i]);
            }
        }

        // pass 2: ratio argmax (re-evaluated unless caching is requested)
        let second = if cache_gains {
            first
        } else {
            scan_components(ensemble, &x, &candidates)?
        };
        let scores: Vec<f64> = second
            .iter()
            .map(|row| {
                (0..m)
                    .map(|i| {
                        if best_gain[i] > 0.0 {
                            (row[i] - base[i]) / best_gain[i]
                        } else {
                            1.0
                        }
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let best = argmax_first(&scores);
        x.insert(candidates[best]);
        base = second[best].clone();
        trace.steps.push(TraceStep {
            iteration: j as u64,
            chosen: Some(candidates[best]),
            subset: x.clone(),
            f_value: min_of(&base),
            evals: ensemble.worst_case_eval_count() - start_evals,
        });
    }
    Ok((x, trace))
}

/// `(n - k/2 + 1/2)·k`, the exact worst-case evaluation count of
/// [`greedy_select`].
pub fn greedy_eval_count(n: usize, k: usize) -> u64 {
    // sum_{j=1..k} (n - j + 1), kept in integers
    (1..=k as u64).map(|j| n as u64 - j + 1).sum()
}

/// `(2n - k + 1)·k`, the exact worst-case evaluation count of
/// [`modified_greedy_select`].
pub fn modified_greedy_eval_count(n: usize, k: usize) -> u64 {
    2 * greedy_eval_count(n, k)
}
