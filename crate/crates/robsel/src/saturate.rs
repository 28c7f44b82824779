//! Bisection baseline: search over a target value `c`, each round running a
//! greedy subroutine on the truncated-mean surrogate
//! `Ĥ_c(X) = (1/m) Σ_i min{f_i(X), c}`. A round is feasible when the
//! subroutine meets the target within the (relaxed) budget; the best feasible
//! subset by true worst-case value is returned.

use crate::error::{Error, Result};
use crate::objective::ObjectiveEnsemble;
use crate::subset::Subset;
use crate::trace::{RunTrace, TraceStep};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Relative slack on the target test `Ĥ_c(X) ≥ c·(1 - TARGET_SLACK)`.
const TARGET_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct SaturateConfig {
    /// Cardinality relaxation factor; the subroutine may use up to `⌊alpha·k⌋`
    /// items. 1 keeps the output feasible.
    pub alpha: f64,
    /// Bisection stops when the interval width drops below
    /// `epsilon · max(1, c_max)`.
    pub epsilon: f64,
    /// Safety cap on bisection rounds.
    pub max_rounds: u32,
}

impl Default for SaturateConfig {
    fn default() -> Self {
        SaturateConfig {
            alpha: 1.0,
            epsilon: 1e-3,
            max_rounds: 60,
        }
    }
}

impl SaturateConfig {
    fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 1.0 {
            return Err(Error::InvalidArgument("alpha must be >= 1".into()));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidArgument("max_rounds must be positive".into()));
        }
        Ok(())
    }
}

fn truncated_mean(components: &[f64], c: f64) -> f64 {
    components.iter().map(|&v| v.min(c)).sum::<f64>() / components.len() as f64
}

/// Greedily maximize `Ĥ_c` until the target is met, the size limit binds, or
/// no item improves it. Returns the subset and its `Ĥ_c` value.
fn truncated_greedy_inner(
    ensemble: &ObjectiveEnsemble,
    c: f64,
    limit: usize,
) -> Result<(Subset, f64)> {
    if c.is_nan() || c < 0.0 {
        return Err(Error::InvalidArgument(
            "target c must be non-negative".into(),
        ));
    }
    if limit < 1 {
        return Err(Error::InvalidArgument("limit must be positive".into()));
    }
    let n = ensemble.n();
    let mut x = Subset::empty(n);
    let mut h = 0.0; // Ĥ_c(∅): every normalized component is 0
    loop {
        if h >= c * (1.0 - TARGET_SLACK) || x.len() >= limit.min(n) {
            break;
        }
        let candidates: Vec<usize> = (0..n).filter(|&v| !x.contains(v)).collect();
        let h_values: Vec<f64> = {
            #[cfg(feature = "parallel")]
            {
                candidates
                    .par_iter()
                    .map(|&v| {
                        ensemble
                            .evaluate_components(&x.with_inserted(v))
                            .map(|comp| truncated_mean(&comp, c))
                    })
                    .collect::<Result<_>>()?
            }
            #[cfg(not(feature = "parallel"))]
            {
                candidates
                    .iter()
                    .map(|&v| {
                        ensemble
                            .evaluate_components(&x.with_inserted(v))
                            .map(|comp| truncated_mean(&comp, c))
                    })
                    .collect::<Result<Vec<f64>>>()?
            }
        };
        let mut best = 0;
        for (i, &v) in h_values.iter().enumerate().skip(1) {
            if v > h_values[best] {
                best = i;
            }
        }
        if h_values[best] <= h {
            break; // no positive gain
        }
        x.insert(candidates[best]);
        h = h_values[best];
    }
    Ok((x, h))
}

/// The greedy subroutine on the truncated-mean surrogate, exposed on its own.
pub fn truncated_greedy(ensemble: &ObjectiveEnsemble, c: f64, limit: usize) -> Result<Subset> {
    truncated_greedy_inner(ensemble, c, limit).map(|(x, _)| x)
}

/// Bisect the target `c` over `[0, min_i f_i(V)]`, keeping the best feasible
/// subset by true worst-case value. With `alpha = 1` the output never exceeds
/// the budget `k`.
pub fn saturate_select(
    ensemble: &ObjectiveEnsemble,
    k: usize,
    config: &SaturateConfig,
) -> Result<(Subset, RunTrace)> {
    config.validate()?;
    let n = ensemble.n();
    if k < 1 || k > n {
        return Err(Error::InvalidBudget { k, n });
    }
    let limit = ((config.alpha * k as f64).floor() as usize).min(n);
    let start_evals = ensemble.worst_case_eval_count();
    let mut trace = RunTrace::new("saturate", None);

    let full_components = ensemble.evaluate_components(&Subset::full(n))?;
    let c_max = full_components
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let threshold = config.epsilon * c_max.max(1.0);

    let mut best_subset = Subset::empty(n);
    let mut best_f = 0.0f64;
    let mut found_feasible = false;
    let mut lo = 0.0f64;
    let mut hi = c_max;
    let mut round = 0u32;

    while hi - lo > threshold && round < config.max_rounds {
        let c = 0.5 * (lo + hi);
        let (x, h) = truncated_greedy_inner(ensemble, c, limit)?;
        let feasible = x.len() <= limit && h >= c * (1.0 - TARGET_SLACK);
        if feasible {
            lo = c;
            let f = ensemble.evaluate_worst_case(&x)?;
            if f > best_f {
                best_f = f;
                best_subset = x;
            }
            found_feasible = true;
        } else {
            hi = c;
        }
        round += 1;
        trace.steps.push(TraceStep {
            iteration: round as u64,
            chosen: None,
            subset: best_subset.clone(),
            f_value: best_f,
            evals: ensemble.worst_case_eval_count() - start_evals,
        });
    }

    if !found_feasible || best_subset.is_empty() {
        trace
            .warnings
            .push("no feasible target above 0; returning the empty subset".into());
    }
    Ok((best_subset, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{Modular, ObjectiveEnsemble, SetFunction};
    use std::sync::Arc;

    fn modular_pair() -> ObjectiveEnsemble {
        ObjectiveEnsemble::from_functions(vec![
            Arc::new(Modular::new(vec![3.0, 2.0, 1.0]).unwrap()),
            Arc::new(Modular::new(vec![1.0, 2.0, 3.0]).unwrap()),
        ])
        .unwrap()
    }

    fn single_modular(weights: Vec<f64>) -> ObjectiveEnsemble {
        ObjectiveEnsemble::from_functions(vec![
            Arc::new(Modular::new(weights).unwrap()) as Arc<dyn SetFunction>
        ])
        .unwrap()
    }

    #[test]
    fn zero_target_returns_empty() {
        let ens = modular_pair();
        let x = truncated_greedy(&ens, 0.0, 2).unwrap();
        assert!(x.is_empty());
        assert_eq!(ens.worst_case_eval_count(), 0);
    }

    #[test]
    fn truncated_greedy_balances_the_pair() {
        // singleton surrogate values: v1 -> 1.5, v2 -> 2, v3 -> 1.5
        let ens = modular_pair();
        let x = truncated_greedy(&ens, 2.0, 1).unwrap();
        assert_eq!(x.iter_ones().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn unreachable_target_fills_to_limit() {
        let ens = modular_pair();
        let x = truncated_greedy(&ens, 1e6, 3).unwrap();
        assert_eq!(x.len(), 3);
    }

    #[test]
    fn single_function_reaches_opt() {
        let ens = single_modular(vec![3.0, 2.0, 1.0]);
        let config = SaturateConfig {
            epsilon: 1e-6,
            ..SaturateConfig::default()
        };
        let (x, trace) = saturate_select(&ens, 2, &config).unwrap();
        assert_eq!(ens.function(0).evaluate(&x), 5.0);
        assert!(trace.warnings.is_empty());
    }

    #[test]
    fn pair_budget_one_finds_opt_singleton() {
        let ens = modular_pair();
        let (x, trace) = saturate_select(&ens, 1, &SaturateConfig::default()).unwrap();
        assert_eq!(x.iter_ones().collect::<Vec<_>>(), vec![1]);
        assert_eq!(trace.final_f(), 2.0);
        assert!(x.len() <= 1);
    }

    #[test]
    fn full_budget_attains_full_set_value() {
        let ens = modular_pair();
        let (x, trace) = saturate_select(&ens, 3, &SaturateConfig::default()).unwrap();
        let f = ObjectiveEnsemble::from_functions(vec![
            Arc::new(Modular::new(vec![3.0, 2.0, 1.0]).unwrap()) as Arc<dyn SetFunction>,
            Arc::new(Modular::new(vec![1.0, 2.0, 3.0]).unwrap()),
        ])
        .unwrap()
        .evaluate_worst_case(&x)
        .unwrap();
        assert_eq!(f, 6.0);
        assert_eq!(trace.final_f(), 6.0);
    }

    #[test]
    fn all_zero_functions_warn_and_return_empty() {
        let ens = single_modular(vec![0.0, 0.0]);
        let (x, trace) = saturate_select(&ens, 1, &SaturateConfig::default()).unwrap();
        assert!(x.is_empty());
        assert!(!trace.warnings.is_empty());
    }

    #[test]
    fn uses_more_evaluations_than_greedy() {
        for seed in 0..5u64 {
            use rand::prelude::*;
            use rand_chacha::ChaCha8Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(4..9);
            let k = rng.random_range(1..=n.min(4));
            let w1: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..4.0)).collect();
            let w2: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..4.0)).collect();
            let make = || {
                ObjectiveEnsemble::from_functions(vec![
                    Arc::new(Modular::new(w1.clone()).unwrap()) as Arc<dyn SetFunction>,
                    Arc::new(Modular::new(w2.clone()).unwrap()),
                ])
                .unwrap()
            };
            let greedy_ens = make();
            crate::greedy::greedy_select(&greedy_ens, k).unwrap();
            let sat_ens = make();
            saturate_select(&sat_ens, k, &SaturateConfig::default()).unwrap();
            assert!(
                sat_ens.worst_case_eval_count() > greedy_ens.worst_case_eval_count(),
                "seed {seed}: saturate {} vs greedy {}",
                sat_ens.worst_case_eval_count(),
                greedy_ens.worst_case_eval_count()
            );
        }
    }

    #[test]
    fn round_count_is_logarithmic_in_epsilon() {
        let ens = modular_pair();
        let config = SaturateConfig {
            epsilon: 1e-4,
            ..SaturateConfig::default()
        };
        let (_, trace) = saturate_select(&ens, 2, &config).unwrap();
        // interval halves every round: c_max=6, threshold=6e-4
        let c_max: f64 = 6.0;
        let bound = (c_max / (config.epsilon * c_max.max(1.0))).log2().ceil() as usize + 1;
        assert!(
            trace.steps.len() <= bound,
            "{} rounds > {bound}",
            trace.steps.len()
        );
        assert!(trace.steps.len() <= config.max_rounds as usize);
    }

    #[test]
    fn value_is_monotone_in_budget() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let n = 6;
            let w1: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..4.0)).collect();
            let w2: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..4.0)).collect();
            let mut prev = 0.0;
            for k in 1..=n {
                let ens = ObjectiveEnsemble::from_functions(vec![
                    Arc::new(Modular::new(w1.clone()).unwrap()) as Arc<dyn SetFunction>,
                    Arc::new(Modular::new(w2.clone()).unwrap()),
                ])
                .unwrap();
                let (x, _) = saturate_select(&ens, k, &SaturateConfig::default()).unwrap();
                assert!(x.len() <= k);
                let f = ens.evaluate_worst_case(&x).unwrap();
                assert!(f >= prev - 1e-12, "seed {seed} k {k}: {f} < {prev}");
                prev = f;
            }
        }
    }
}
