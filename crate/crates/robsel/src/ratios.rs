//! Brute-force oracles for the approximation theory: submodularity ratio,
//! correlation ratio, exhaustive optimum, and the per-run guarantee report.
//! Everything here is exponential-time by construction and guarded by
//! enumeration budgets; it exists to verify the solvers on desk-scale
//! instances, not to run at scale.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::objective::{ObjectiveEnsemble, SetFunction};
use crate::subset::Subset;
use crate::trace::RunTrace;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Budget on subsets enumerated by [`exhaustive_opt`] and the prime ratios.
pub const SUBSET_ENUM_LIMIT: u64 = 1_000_000;
/// Budget on (L, S) pairs enumerated by [`submodularity_ratio`].
pub const PAIR_ENUM_LIMIT: u64 = 10_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn subsets_up_to(n: usize, k: usize) -> u128 {
    (0..=k.min(n)).map(|s| binomial(n, s)).sum()
}

/// Worst ratio of summed singleton gains to the joint gain over all pairs
/// `(L ⊆ X, S)` with `S` nonempty, `|S| ≤ b`, `S ∩ L = ∅`. Pairs whose joint
/// gain is zero are skipped (monotonicity forces their singleton gains to
/// zero too, so the constraint is vacuous); 1 if every pair is skipped.
/// Equals 1 exactly iff `f` behaves submodularly on the enumerated pairs.
pub fn submodularity_ratio(f: &dyn SetFunction, x: &Subset, b: usize) -> Result<f64> {
    let n = f.n();
    if x.width() != n {
        return Err(Error::InvalidSubset {
            width: x.width(),
            expected: n,
        });
    }
    if b < 1 {
        return Err(Error::InvalidArgument("b must be at least 1".into()));
    }

    let x_items: Vec<usize> = x.iter_ones().collect();
    let pairs: u128 = (0..=x_items.len())
        .map(|l| binomial(x_items.len(), l) * subsets_up_to(n - l, b).saturating_sub(1))
        .sum();
    if pairs > PAIR_ENUM_LIMIT as u128 {
        return Err(Error::EnumerationBudget {
            required: pairs,
            limit: PAIR_ENUM_LIMIT,
        });
    }

    let mut gamma = 1.0f64;
    for l_mask in 0u64..(1 << x_items.len()) {
        let mut base_set = Subset::empty(n);
        for (i, &item) in x_items.iter().enumerate() {
            if l_mask & (1 << i) != 0 {
                base_set.insert(item);
            }
        }
        let base = f.evaluate(&base_set);
        let rest: Vec<usize> = (0..n).filter(|&v| !base_set.contains(v)).collect();
        let gains: Vec<f64> = rest
            .iter()
            .map(|&v| f.evaluate(&base_set.with_inserted(v)) - base)
            .collect();
        // singletons contribute exactly 1 (or are skipped); start from s = 2
        for s in 2..=b.min(rest.len()) {
            for combo in (0..rest.len()).combinations(s) {
                let mut joint = base_set.clone();
                let mut num = 0.0;
                for &ci in &combo {
                    joint.insert(rest[ci]);
                    num += gains[ci];
                }
                let den = f.evaluate(&joint) - base;
                if den <= 0.0 {
                    continue;
                }
                let ratio = num / den;
                if ratio < gamma {
                    gamma = ratio;
                }
            }
        }
    }
    Ok(gamma)
}

/// Best common item's worst normalized gain: maximize over `v ∉ X` the
/// minimum over functions of `gain_i(v) / best_gain_i`, where `best_gain_i`
/// is `f_i`'s largest single-item gain at `X`. Zero-denominator terms count
/// as 1 (a saturated function constrains nothing).
pub fn correlation_ratio(ensemble: &ObjectiveEnsemble, x: &Subset) -> Result<f64> {
    let n = ensemble.n();
    let m = ensemble.m();
    if x.width() != n {
        return Err(Error::InvalidSubset {
            width: x.width(),
            expected: n,
        });
    }
    if x.len() == n {
        return Err(Error::InvalidArgument(
            "correlation ratio needs at least one unselected item".into(),
        ));
    }
    let rest: Vec<usize> = (0..n).filter(|&v| !x.contains(v)).collect();
    let base: Vec<f64> = (0..m).map(|i| ensemble.function(i).evaluate(x)).collect();
    // gains[c][i]: gain of f_i when adding candidate c
    let gains: Vec<Vec<f64>> = rest
        .iter()
        .map(|&v| {
            let xv = x.with_inserted(v);
            (0..m)
                .map(|i| ensemble.function(i).evaluate(&xv) - base[i])
                .collect()
        })
        .collect();
    let best_gain: Vec<f64> = (0..m)
        .map(|i| gains.iter().map(|g| g[i]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let beta = gains
        .iter()
        .map(|g| {
            (0..m)
                .map(|i| {
                    if best_gain[i] > 0.0 {
                        g[i] / best_gain[i]
                    } else {
                        1.0
                    }
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(beta)
}

/// Lexicographic subsets of size exactly `s`, streamed in chunks to bound
/// memory; `visit` receives `(enumeration rank, subset)` batches.
fn for_each_subset_chunk(
    n: usize,
    s: usize,
    mut visit: impl FnMut(&[(u64, Subset)]) -> Result<()>,
) -> Result<()> {
    const CHUNK: usize = 8192;
    let mut buffer: Vec<(u64, Subset)> = Vec::with_capacity(CHUNK);
    for (rank, combo) in (0..n).combinations(s).enumerate() {
        buffer.push((rank as u64, Subset::from_indices(n, combo)?));
        if buffer.len() == CHUNK {
            visit(&buffer)?;
            buffer.clear();
        }
    }
    if !buffer.is_empty() {
        visit(&buffer)?;
    }
    Ok(())
}

struct OptAccumulator {
    value: f64,
    witness: Subset,
    witness_rank: (usize, u64),
    per_function: Vec<f64>,
}

/// One exhaustive pass over all subsets of size ≤ k, tracking the worst-case
/// optimum with a canonical witness and every per-function optimum.
fn exhaustive_scan(ensemble: &ObjectiveEnsemble, k: usize) -> Result<OptAccumulator> {
    let n = ensemble.n();
    let k = k.min(n);
    let count = subsets_up_to(n, k);
    if count > SUBSET_ENUM_LIMIT as u128 {
        return Err(Error::EnumerationBudget {
            required: count,
            limit: SUBSET_ENUM_LIMIT,
        });
    }
    let m = ensemble.m();
    let mut acc = OptAccumulator {
        value: f64::NEG_INFINITY,
        witness: Subset::empty(n),
        witness_rank: (usize::MAX, u64::MAX),
        per_function: vec![f64::NEG_INFINITY; m],
    };
    for s in 0..=k {
        for_each_subset_chunk(n, s, |batch| {
            let evaluated: Vec<(u64, &Subset, Vec<f64>)> = {
                #[cfg(feature = "parallel")]
                {
                    batch
                        .par_iter()
                        .map(|(rank, x)| Ok((*rank, x, ensemble.evaluate_components(x)?)))
                        .collect::<Result<_>>()?
                }
                #[cfg(not(feature = "parallel"))]
                {
                    batch
                        .iter()
                        .map(|(rank, x)| Ok((*rank, x, ensemble.evaluate_components(x)?)))
                        .collect::<Result<Vec<_>>>()?
                }
            };
            for (rank, x, components) in evaluated {
                let f = components.iter().copied().fold(f64::INFINITY, f64::min);
                for (i, &c) in components.iter().enumerate() {
                    if c > acc.per_function[i] {
                        acc.per_function[i] = c;
                    }
                }
                // strictly-better value wins; ties keep the earliest subset in
                // (size, lexicographic) enumeration order
                if f > acc.value || (f == acc.value && (s, rank) < acc.witness_rank) {
                    acc.value = f;
                    acc.witness = x.clone();
                    acc.witness_rank = (s, rank);
                }
            }
            Ok(())
        })?;
    }
    Ok(acc)
}

/// Exact maximum of the worst-case objective over all subsets of size ≤ k,
/// with the lexicographically smallest witness.
pub fn exhaustive_opt(ensemble: &ObjectiveEnsemble, k: usize) -> Result<(f64, Subset)> {
    let acc = exhaustive_scan(ensemble, k)?;
    Ok((acc.value, acc.witness))
}

/// The brute-forced constants behind the greedy and evolutionary guarantees.
#[derive(Clone, Debug)]
pub struct GuaranteeReport {
    /// Optimum of the worst-case objective over subsets of size ≤ k.
    pub opt: f64,
    pub opt_witness: Subset,
    /// Per-function optima over subsets of size ≤ k.
    pub opt_per_function: Vec<f64>,
    /// Minimum correlation ratio along the supplied greedy prefixes.
    pub beta: f64,
    /// Minimum submodularity ratio of the functions at the last greedy prefix.
    pub gamma: f64,
    /// Minimum correlation ratio over all subsets of size ≤ k-1.
    pub beta_prime: f64,
    /// Minimum submodularity ratio over all subsets of size exactly k-1.
    pub gamma_prime: f64,
    /// `1 - e^{-beta·gamma}`.
    pub ratio_bound: f64,
    /// `1 - e^{-beta'·gamma'}`.
    pub ratio_bound_prime: f64,
}

impl GuaranteeReport {
    /// Flat `key=value` record, one pair per line.
    pub fn to_kv_string(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let witness = self
            .opt_witness
            .iter_ones()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "opt={}\nopt_witness={}\nopt_per_function={}\nbeta={}\ngamma={}\nbeta_prime={}\ngamma_prime={}\nratio_bound={}\nratio_bound_prime={}\n",
            self.opt,
            witness,
            join(&self.opt_per_function),
            self.beta,
            self.gamma,
            self.beta_prime,
            self.gamma_prime,
            self.ratio_bound,
            self.ratio_bound_prime
        )
    }
}

/// Compute every guarantee constant for a finished greedy run: OPT and the
/// per-function optima by exhaustive search, the correlation ratio along the
/// run's own prefixes, the submodularity ratio at the last prefix, and the
/// instance-wide prime variants over all small subsets.
pub fn guarantee_report(
    ensemble: &ObjectiveEnsemble,
    k: usize,
    greedy_trace: &RunTrace,
) -> Result<GuaranteeReport> {
    let n = ensemble.n();
    if k < 1 || k > n {
        return Err(Error::InvalidBudget { k, n });
    }
    if greedy_trace.steps.len() < k {
        return Err(Error::InvalidArgument(format!(
            "trace has {} steps, need {k}",
            greedy_trace.steps.len()
        )));
    }

    let acc = exhaustive_scan(ensemble, k)?;

    // prefixes X_0 .. X_{k-1} of the supplied run
    let mut prefixes: Vec<Subset> = vec![Subset::empty(n)];
    prefixes.extend(greedy_trace.steps[..k - 1].iter().map(|s| s.subset.clone()));

    let mut beta = f64::INFINITY;
    for p in &prefixes {
        beta = beta.min(correlation_ratio(ensemble, p)?);
    }

    let last_prefix = prefixes.last().expect("at least the empty prefix");
    let mut gamma = f64::INFINITY;
    for i in 0..ensemble.m() {
        gamma = gamma.min(submodularity_ratio(ensemble.function(i), last_prefix, k)?);
    }

    // beta' over all subsets of size ≤ k-1
    let small = subsets_up_to(n, k - 1);
    if small > SUBSET_ENUM_LIMIT as u128 {
        return Err(Error::EnumerationBudget {
            required: small,
            limit: SUBSET_ENUM_LIMIT,
        });
    }
    let mut beta_prime = f64::INFINITY;
    for s in 0..k {
        for_each_subset_chunk(n, s, |batch| {
            for (_, x) in batch {
                beta_prime = beta_prime.min(correlation_ratio(ensemble, x)?);
            }
            Ok(())
        })?;
    }

    // gamma' over all subsets of size exactly k-1
    let mut gamma_prime = f64::INFINITY;
    for_each_subset_chunk(n, k - 1, |batch| {
        for (_, x) in batch {
            for i in 0..ensemble.m() {
                gamma_prime = gamma_prime.min(submodularity_ratio(ensemble.function(i), x, k)?);
            }
        }
        Ok(())
    })?;

    Ok(GuaranteeReport {
        opt: acc.value,
        opt_witness: acc.witness,
        opt_per_function: acc.per_function,
        beta,
        gamma,
        beta_prime,
        gamma_prime,
        ratio_bound: 1.0 - (-beta * gamma).exp(),
        ratio_bound_prime: 1.0 - (-beta_prime * gamma_prime).exp(),
    })
}
