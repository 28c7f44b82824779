//! Verification suite: checks the solvers and estimators against the
//! brute-force oracles on generated desk-scale instances.
//!
//! Used by the `acceptance` test target and by the CLI `verify` subcommand.
//! Each check returns a [`CheckOutcome`] with a pass/fail flag and a short
//! human-readable account of what was measured.

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::eporss::{default_iterations, eporss_run, eporss_run_observed};
use crate::greedy::{
    greedy_eval_count, greedy_select, modified_greedy_eval_count, modified_greedy_select,
};
use crate::influence::{
    estimate_spread_stats, exact_spread_live_edge, perturb_probs, vector_distance,
    weighted_cascade_probs, DirectedGraph, ExactSpreadFunction, IcSimulator, ProbabilityVector,
};
use crate::objective::{
    Coverage, Modular, ObjectiveEnsemble, PowerModular, SetFunction, TableFunction,
};
use crate::ratios::{correlation_ratio, exhaustive_opt, guarantee_report, submodularity_ratio};
use crate::seeding;
use crate::subset::Subset;

/// Result of one verification check.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckOutcome {
            name: name.to_string(),
            passed,
            detail,
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{:<28} {} ({})",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

/// Size tier for the full suite: `Tiny` finishes in well under a minute,
/// `Small` runs the full instance counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tier {
    Tiny,
    Small,
}

const TOLERANCE: f64 = 1e-9;

// ---------------------------------------------------------------------------
// instance generators

/// Deterministic function families used in the generated pools.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Modular,
    Coverage,
    ConcaveModular,
    SupermodularPower,
}

/// One random monotone normalized function of the given family.
pub fn random_function(family: Family, n: usize, rng: &mut ChaCha8Rng) -> Arc<dyn SetFunction> {
    match family {
        Family::Modular => {
            let w = (0..n).map(|_| rng.random_range(0.0..4.0)).collect();
            Arc::new(Modular::new(w).unwrap())
        }
        Family::Coverage => {
            let universe = rng.random_range(n..2 * n + 1);
            let covers = (0..n)
                .map(|_| {
                    let size = rng.random_range(0..=3.min(universe));
                    let mut elems: Vec<usize> =
                        (0..size).map(|_| rng.random_range(0..universe)).collect();
                    elems.sort_unstable();
                    elems.dedup();
                    elems
                })
                .collect();
            Arc::new(Coverage::new(universe, covers).unwrap())
        }
        Family::ConcaveModular => {
            let w = (0..n).map(|_| rng.random_range(0.0..4.0)).collect();
            let p = rng.random_range(0.3..0.9);
            Arc::new(PowerModular::new(w, p).unwrap())
        }
        Family::SupermodularPower => {
            let w = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
            let p = rng.random_range(1.3..2.0);
            Arc::new(PowerModular::new(w, p).unwrap())
        }
    }
}

/// A random ensemble with `m` functions drawn from the given families.
pub fn random_ensemble(
    families: &[Family],
    n: usize,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> ObjectiveEnsemble {
    let functions = (0..m)
        .map(|_| random_function(families[rng.random_range(0..families.len())], n, rng))
        .collect();
    ObjectiveEnsemble::from_functions(functions).unwrap()
}

/// A random weakly connected digraph with `n` nodes and at most `max_edges`
/// distinct edges (no self-loops), unit weights.
pub fn random_digraph(n: usize, max_edges: usize, rng: &mut ChaCha8Rng) -> DirectedGraph {
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let target = rng.random_range(1..=max_edges);
    let mut attempts = 0;
    while edges.len() < target && attempts < 20 * max_edges {
        attempts += 1;
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && seen.insert((u, v)) {
            edges.push((u, v, 1.0));
        }
    }
    let names = (0..n).map(|i| i.to_string()).collect();
    DirectedGraph::new(names, edges).unwrap()
}

/// Uniform random edge probabilities.
pub fn random_theta(edge_count: usize, rng: &mut ChaCha8Rng) -> ProbabilityVector {
    ProbabilityVector::new(
        (0..edge_count)
            .map(|_| rng.random_range(0.0..=1.0))
            .collect(),
    )
    .unwrap()
}

/// A uniformly random subset of the given width.
pub fn random_subset(width: usize, rng: &mut ChaCha8Rng) -> Subset {
    Subset::from_indices(width, (0..width).filter(|_| rng.random_bool(0.5))).unwrap()
}

// ---------------------------------------------------------------------------
// checks

/// Greedy attains `F(X) ≥ (1 - e^{-βγ})·OPT` on every generated instance,
/// with OPT, β, γ brute-forced from the run's own prefixes.
pub fn check_greedy_guarantee(instances: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, &[1]));
    let families = [Family::Modular, Family::Coverage, Family::ConcaveModular];
    let mut violations = 0;
    let mut worst_margin = f64::INFINITY;
    for _ in 0..instances {
        let n = rng.random_range(3..=10);
        let k = rng.random_range(1..=3.min(n));
        let m = rng.random_range(1..=3);
        let ens = random_ensemble(&families, n, m, &mut rng);
        let (_, trace) = greedy_select(&ens, k).unwrap();
        let report = guarantee_report(&ens, k, &trace).unwrap();
        let achieved = trace.final_f();
        let margin = achieved - (report.ratio_bound * report.opt - TOLERANCE);
        worst_margin = worst_margin.min(margin);
        if margin < 0.0 {
            violations += 1;
        }
    }
    CheckOutcome::new(
        "greedy-guarantee",
        violations == 0,
        format!("{instances} instances, {violations} violations, worst margin {worst_margin:.3e}"),
    )
}

/// Best of 10 seeds of the evolutionary run with a doubled iteration budget
/// reaches `(1 - e^{-β'γ'})·OPT` on every generated instance.
pub fn check_eporss_guarantee(instances: usize, seeds: u64, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, &[2]));
    let families = [Family::Modular, Family::Coverage, Family::ConcaveModular];
    let mut failures = 0;
    for instance in 0..instances {
        let n = rng.random_range(3..=10);
        let k = rng.random_range(1..=3.min(n));
        let m = rng.random_range(1..=3);
        let ens = random_ensemble(&families, n, m, &mut rng);
        let (_, trace) = greedy_select(&ens, k).unwrap();
        let report = guarantee_report(&ens, k, &trace).unwrap();
        let target = report.ratio_bound_prime * report.opt - TOLERANCE;
        let budget = 2 * default_iterations(k, n);
        let mut best = f64::NEG_INFINITY;
        for s in 0..seeds {
            let run_seed = seeding::derive(seed, &[3, instance as u64, s]);
            let (x, _) = eporss_run(&ens, k, budget, run_seed).unwrap();
            best = best.max(ens.evaluate_worst_case(&x).unwrap());
            if best >= target {
                break;
            }
        }
        if best < target {
            failures += 1;
        }
    }
    CheckOutcome::new(
        "eporss-guarantee",
        failures == 0,
        format!("{instances} instances x best-of-{seeds} seeds, {failures} misses"),
    )
}

/// Exact evaluation-count contracts of both greedy variants for every
/// `1 ≤ k ≤ n ≤ n_max`.
pub fn check_eval_counts(n_max: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, &[4]));
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for n in 1..=n_max {
        for k in 1..=n {
            let make = |rng: &mut ChaCha8Rng| {
                let w1: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..4.0)).collect();
                let w2: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..4.0)).collect();
                ObjectiveEnsemble::from_functions(vec![
                    Arc::new(Modular::new(w1).unwrap()) as Arc<dyn SetFunction>,
                    Arc::new(Modular::new(w2).unwrap()),
                ])
                .unwrap()
            };
            let ens = make(&mut rng);
            greedy_select(&ens, k).unwrap();
            if ens.worst_case_eval_count() != greedy_eval_count(n, k) {
                mismatches.push(format!(
                    "greedy n={n} k={k}: {} != {}",
                    ens.worst_case_eval_count(),
                    greedy_eval_count(n, k)
                ));
            }
            let ens = make(&mut rng);
            modified_greedy_select(&ens, k).unwrap();
            if ens.worst_case_eval_count() != modified_greedy_eval_count(n, k) {
                mismatches.push(format!(
                    "modified n={n} k={k}: {} != {}",
                    ens.worst_case_eval_count(),
                    modified_greedy_eval_count(n, k)
                ));
            }
            checked += 2;
        }
    }
    CheckOutcome::new(
        "eval-count-exactness",
        mismatches.is_empty(),
        format!(
            "{checked} runs over n<= {n_max}{}",
            if mismatches.is_empty() {
                ", all exact".to_string()
            } else {
                format!("; first mismatch: {}", mismatches[0])
            }
        ),
    )
}

/// Exact spreads under two probability vectors differ by at most `n·δ(θ,θ')`.
pub fn check_spread_stability(trials: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, &[5]));
    let mut violations = 0;
    let mut worst_slack = f64::INFINITY;
    for _ in 0..trials {
        let n = rng.random_range(3..=7);
        let g = random_digraph(n, 12, &mut rng);
        let theta = random_theta(g.edge_count(), &mut rng);
        let theta2 = random_theta(g.edge_count(), &mut rng);
        let x = random_subset(n, &mut rng);
        let a = exact_spread_live_edge(&g, &theta, &x).unwrap();
        let b = exact_spread_live_edge(&g, &theta2, &x).unwrap();
        let delta = vector_distance(&theta, &theta2).unwrap();
        let slack = n as f64 * delta + TOLERANCE - (a - b).abs();
        worst_slack = worst_slack.min(slack);
        if slack < 0.0 {
            violations += 1;
        }
    }
    CheckOutcome::new(
        "spread-stability",
        violations == 0,
        format!("{trials} triples, {violations} violations, min slack {worst_slack:.3e}"),
    )
}

/// On perturbed influence ensembles with `δ_max < 1/(4en)`, every greedy
/// prefix in the operative regime (all spreads below `(1-1/e)·n`) has a
/// correlation ratio of at least `1 - 2en·δ_max`.
pub fn check_perturbed_correlation_bound(instances: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, &[6]));
    let mut checked_prefixes = 0;
    let mut violations = 0;
    for _ in 0..instances {
        let n = rng.random_range(4..=7);
        let g = Arc::new(random_digraph(n, 11, &mut rng));
        let base = weighted_cascade_probs(&g).unwrap();
        let mass: f64 = base.as_slice().iter().sum();
        // pick the perturbation half-width so the worst-case pairwise L1
        // distance stays below 1/(4en)
        let e = std::f64::consts::E;
        let eta = 1.0 / (16.0 * e * n as f64 * (mass + 1.0));
        let m = rng.random_range(2..=3);
        let thetas = perturb_probs(&base, 1.0 - eta, 1.0 + eta, m, &mut rng).unwrap();
        let mut delta_max = 0.0f64;
        for i in 0..m {
            for j in (i + 1)..m {
                delta_max = delta_max.max(vector_distance(&thetas[i], &thetas[j]).unwrap());
            }
        }
        assert!(delta_max < 1.0 / (4.0 * e * n as f64));
        let functions: Vec<Arc<dyn SetFunction>> = thetas
            .iter()
            .map(|t| {
                Arc::new(ExactSpreadFunction::new(g.clone(), t.clone()).unwrap())
                    as Arc<dyn SetFunction>
            })
            .collect();
        let ens = ObjectiveEnsemble::from_functions(functions.clone()).unwrap();
        let k = rng.random_range(2..=3.min(n - 1));
        let (_, trace) = greedy_select(&ens, k).unwrap();
        let bound = crate::influence::beta_lower_bound(n, delta_max) - TOLERANCE;

        let mut prefixes: Vec<Subset> = vec![Subset::empty(n)];
        prefixes.extend(trace.steps[..k - 1].iter().map(|s| s.subset.clone()));
        for p in &prefixes {
            let operative = functions
                .iter()
                .all(|f| f.evaluate(p) < (1.0 - 1.0 / e) * n as f64);
            if !operative {
                continue;
            }
            checked_prefixes += 1;
            let beta = correlation_ratio(&ens, p).unwrap();
            if beta < bound {
                violations += 1;
            }
        }
    }
    CheckOutcome::new(
        "perturbed-correlation-bound",
        violations == 0 && checked_prefixes > 0,
        format!(
            "{instances} instances, {checked_prefixes} operative prefixes, {violations} violations"
        ),
    )
}

/// Pointwise single-step improvement bounds: per function, the best addition
/// gains at least `(γ_{X,k}/k)·(OPT_i - f_i(X))`; on the worst-case objective
/// it gains at least `(β_X·γ^min_{X,k}/k)·(OPT - F(X))`.
pub fn check_single_step_bounds(pairs: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, &[7]));
    let families = [
        Family::Modular,
        Family::Coverage,
        Family::ConcaveModular,
        Family::SupermodularPower,
    ];
    let mut violations = 0;
    for _ in 0..pairs {
        let n = rng.random_range(3..=8);
        let m = rng.random_range(1..=3);
        let k = rng.random_range(1..=3.min(n));
        let ens = random_ensemble(&families, n, m, &mut rng);
        let mut x = random_subset(n, &mut rng);
        if x.len() == n {
            x.remove(rng.random_range(0..n));
        }
        let rest: Vec<usize> = (0..n).filter(|&v| !x.contains(v)).collect();

        // per-function bound
        let mut per_fn_opt = vec![f64::NEG_INFINITY; m];
        {
            // brute-force OPT_i over subsets of size <= k
            use itertools::Itertools;
            for s in 0..=k {
                for combo in (0..n).combinations(s) {
                    let c = Subset::from_indices(n, combo).unwrap();
                    for (i, opt_i) in per_fn_opt.iter_mut().enumerate() {
                        *opt_i = opt_i.max(ens.function(i).evaluate(&c));
                    }
                }
            }
        }
        for (i, &opt_i) in per_fn_opt.iter().enumerate() {
            let f = ens.function(i);
            let fx = f.evaluate(&x);
            let gamma = submodularity_ratio(f, &x, k).unwrap();
            let best_gain = rest
                .iter()
                .map(|&v| f.evaluate(&x.with_inserted(v)) - fx)
                .fold(f64::NEG_INFINITY, f64::max);
            if best_gain < gamma / k as f64 * (opt_i - fx) - TOLERANCE {
                violations += 1;
            }
        }

        // worst-case bound
        let (opt, _) = exhaustive_opt(&ens, k).unwrap();
        let fx = ens.evaluate_worst_case(&x).unwrap();
        let beta = correlation_ratio(&ens, &x).unwrap();
        let gamma_min = (0..m)
            .map(|i| submodularity_ratio(ens.function(i), &x, k).unwrap())
            .fold(f64::INFINITY, f64::min);
        let best_gain = rest
            .iter()
            .map(|&v| ens.evaluate_worst_case(&x.with_inserted(v)).unwrap() - fx)
            .fold(f64::NEG_INFINITY, f64::max);
        if best_gain < beta * gamma_min / k as f64 * (opt - fx) - TOLERANCE {
            violations += 1;
        }
    }
    CheckOutcome::new(
        "single-step-bounds",
        violations == 0,
        format!("{pairs} (instance, X) pairs, {violations} violations"),
    )
}

/// Coverage functions score a submodularity ratio of exactly 1; a
/// complementary-pair table function and a supermodular power function score
/// strictly below 1.
pub fn check_submodularity_detection(trials: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, &[8]));
    let mut failures = 0;
    for _ in 0..trials {
        let n = rng.random_range(3..=7);
        let f = random_function(Family::Coverage, n, &mut rng);
        let mut x = random_subset(n, &mut rng);
        while x.len() > n.saturating_sub(2) {
            let first = x.iter_ones().next().unwrap();
            x.remove(first);
        }
        let b = rng.random_range(1..=3);
        if submodularity_ratio(f.as_ref(), &x, b).unwrap() != 1.0 {
            failures += 1;
        }
    }
    let table = TableFunction::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
    let witness_zero = submodularity_ratio(&table, &Subset::empty(2), 2).unwrap();
    let power = PowerModular::new(vec![1.0, 1.0, 1.0, 1.0], 2.0).unwrap();
    let witness_power = submodularity_ratio(&power, &Subset::empty(4), 3).unwrap();
    let witnesses_ok = witness_zero == 0.0 && witness_power < 1.0;
    CheckOutcome::new(
        "submodularity-detection",
        failures == 0 && witnesses_ok,
        format!(
            "{trials} coverage triples at ratio 1, {failures} failures; supermodular witnesses {witness_zero} and {witness_power:.3}"
        ),
    )
}

/// The Monte Carlo spread estimator agrees with the exact live-edge value to
/// within four standard errors; at most `allowed_misses` of the trials may
/// fall outside.
pub fn check_monte_carlo_calibration(
    trials: usize,
    replicates: u32,
    allowed_misses: usize,
    seed: u64,
) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, &[9]));
    let mut misses = 0;
    for trial in 0..trials {
        let n = rng.random_range(3..=7);
        let g = Arc::new(random_digraph(n, 12, &mut rng));
        let theta = random_theta(g.edge_count(), &mut rng);
        let mut x = random_subset(n, &mut rng);
        if x.is_empty() {
            x.insert(rng.random_range(0..n));
        }
        let exact = exact_spread_live_edge(&g, &theta, &x).unwrap();
        let sim = IcSimulator::new(g.clone(), theta).unwrap();
        let stats = estimate_spread_stats(
            &sim,
            &x,
            replicates,
            seeding::derive(seed, &[10, trial as u64]),
        );
        let standard_error = stats.std_dev / (replicates as f64).sqrt();
        if (stats.mean - exact).abs() > 4.0 * standard_error + TOLERANCE {
            misses += 1;
        }
    }
    CheckOutcome::new(
        "monte-carlo-calibration",
        misses <= allowed_misses,
        format!("{trials} trials at r={replicates}, {misses} outside 4 standard errors (allowed {allowed_misses})"),
    )
}

/// Archive invariants under fuzzing: across at least `total_iterations`
/// evolutionary iterations the archive stays within `2k` members, holds at
/// most one solution per size, never a comparable pair, and the best feasible
/// value never decreases.
pub fn check_archive_invariants(total_iterations: u64, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, &[11]));
    let families = [
        Family::Modular,
        Family::Coverage,
        Family::ConcaveModular,
        Family::SupermodularPower,
    ];
    let mut done = 0u64;
    let mut runs = 0u64;
    let mut first_failure: Option<String> = None;
    while done < total_iterations {
        let n = rng.random_range(3..=12);
        let k = rng.random_range(1..=n.min(4));
        let m = rng.random_range(1..=3);
        let ens = random_ensemble(&families, n, m, &mut rng);
        let t = rng
            .random_range(2_000..=20_000u64)
            .min(total_iterations - done + 1);
        let mut best_so_far = f64::NEG_INFINITY;
        let run_seed = seeding::derive(seed, &[12, runs]);
        let result = eporss_run_observed(&ens, k, t, run_seed, |iteration, population| {
            if first_failure.is_some() {
                return;
            }
            if let Err(msg) = population.check_invariants() {
                first_failure = Some(format!("iteration {iteration}: {msg}"));
                return;
            }
            let best = population.best_feasible(k).map_or(0.0, |s| s.g1());
            if best < best_so_far {
                first_failure = Some(format!(
                    "iteration {iteration}: best feasible dropped {best_so_far} -> {best}"
                ));
            } else {
                best_so_far = best;
            }
        });
        if let Err(e) = result {
            first_failure = Some(format!("run error: {e}"));
        }
        if first_failure.is_some() {
            break;
        }
        done += t;
        runs += 1;
    }
    CheckOutcome::new(
        "archive-invariants",
        first_failure.is_none(),
        match &first_failure {
            None => format!("{done} iterations over {runs} fuzzed runs, all invariants held"),
            Some(msg) => msg.clone(),
        },
    )
}

/// Run every check at the given tier, in a stable order.
pub fn run_all_checks(tier: Tier) -> Vec<CheckOutcome> {
    let seed = 0x5EED_2024;
    match tier {
        Tier::Tiny => vec![
            check_greedy_guarantee(25, seed),
            check_eporss_guarantee(10, 10, seed),
            check_eval_counts(8, seed),
            check_spread_stability(50, seed),
            check_perturbed_correlation_bound(5, seed),
            check_single_step_bounds(25, seed),
            check_submodularity_detection(15, seed),
            check_monte_carlo_calibration(10, 10_000, 1, seed),
            check_archive_invariants(100_000, seed),
        ],
        Tier::Small => vec![
            check_greedy_guarantee(100, seed),
            check_eporss_guarantee(100, 10, seed),
            check_eval_counts(12, seed),
            check_spread_stability(200, seed),
            check_perturbed_correlation_bound(20, seed),
            check_single_step_bounds(100, seed),
            check_submodularity_detection(50, seed),
            check_monte_carlo_calibration(50, 10_000, 1, seed),
            check_archive_invariants(1_000_000, seed),
        ],
    }
}
