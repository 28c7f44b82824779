//! Experiment drivers: instance preparation, per-point runs, and CSV/JSON
//! emission.
//!
//! All randomness is derived from the master seed, and perturbation draws are
//! shared across sweep grid points so algorithms are compared on the same
//! sampled objectives. Outputs are deterministic for a fixed config and seed,
//! except the wall_ms column of results.csv.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};

use robsel::eporss::{default_iterations, eporss_run};
use robsel::greedy::{greedy_select, modified_greedy_select};
use robsel::influence::{
    load_edge_list, perturb_probs, top_active_subgraph, weighted_cascade_probs, DirectedGraph,
    GeneralIcSimulator, IcSimulator, ProbabilityVector, SpreadSampler,
};
use robsel::objective::{GroundSet, Modular, ObjectiveEnsemble, SetFunction, StochasticOracle};
use robsel::saturate::saturate_select;
use robsel::seeding;
use robsel::trace::RunTrace;
use robsel::verify::{run_all_checks, Tier};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Algorithm, ExperimentConfig, Mode, SweepAxis};

// salt words for the master-seed derivation tree
const SALT_PERTURB: u64 = 1;
const SALT_NOISE: u64 = 2;
const SALT_EPORSS: u64 = 3;

/// A loaded instance that can build fresh ensembles per repetition.
pub enum PreparedInstance {
    Synthetic {
        weights: Vec<Vec<f64>>,
    },
    PerturbIc {
        graph: Arc<DirectedGraph>,
        thetas: Vec<ProbabilityVector>,
        replicates: u32,
    },
    MultiGraph {
        graphs: Vec<Arc<DirectedGraph>>,
        replicates: u32,
    },
}

impl PreparedInstance {
    pub fn n(&self) -> usize {
        match self {
            PreparedInstance::Synthetic { weights } => weights[0].len(),
            PreparedInstance::PerturbIc { graph, .. } => graph.node_count(),
            PreparedInstance::MultiGraph { graphs, .. } => graphs[0].node_count(),
        }
    }

    pub fn is_stochastic(&self) -> bool {
        !matches!(self, PreparedInstance::Synthetic { .. })
    }

    fn ground(&self) -> Result<GroundSet> {
        let ground = match self {
            PreparedInstance::Synthetic { weights } => GroundSet::new(weights[0].len())?,
            PreparedInstance::PerturbIc { graph, .. } => {
                GroundSet::with_labels(graph.node_names().to_vec())?
            }
            PreparedInstance::MultiGraph { graphs, .. } => {
                GroundSet::with_labels(graphs[0].node_names().to_vec())?
            }
        };
        Ok(ground)
    }

    /// Fresh ensemble over the first `m` objectives with the given oracle
    /// noise seed (ignored for deterministic instances).
    pub fn build(
        &self,
        m: usize,
        noise_seed: u64,
        config: &ExperimentConfig,
    ) -> Result<ObjectiveEnsemble> {
        let functions: Vec<Arc<dyn SetFunction>> = match self {
            PreparedInstance::Synthetic { weights } => {
                ensure!(m <= weights.len(), "m exceeds provided weight vectors");
                weights[..m]
                    .iter()
                    .map(|w| Ok(Arc::new(Modular::new(w.clone())?) as Arc<dyn SetFunction>))
                    .collect::<Result<_, robsel::Error>>()?
            }
            PreparedInstance::PerturbIc {
                graph,
                thetas,
                replicates,
            } => {
                ensure!(m <= thetas.len(), "m exceeds prepared probability vectors");
                thetas[..m]
                    .iter()
                    .enumerate()
                    .map(|(i, theta)| {
                        let sim = IcSimulator::new(graph.clone(), theta.clone())?;
                        Ok(Arc::new(StochasticOracle::new(
                            SpreadSampler::new(sim, *replicates)?,
                            config.oracle_mode,
                            seeding::derive(noise_seed, &[i as u64]),
                        )) as Arc<dyn SetFunction>)
                    })
                    .collect::<Result<_, robsel::Error>>()?
            }
            PreparedInstance::MultiGraph { graphs, replicates } => {
                ensure!(m <= graphs.len(), "m exceeds loaded snapshot graphs");
                graphs[..m]
                    .iter()
                    .enumerate()
                    .map(|(i, graph)| {
                        let sim = GeneralIcSimulator::new(graph.clone(), config.general_ic)?;
                        Ok(Arc::new(StochasticOracle::new(
                            SpreadSampler::new(sim, *replicates)?,
                            config.oracle_mode,
                            seeding::derive(noise_seed, &[i as u64]),
                        )) as Arc<dyn SetFunction>)
                    })
                    .collect::<Result<_, robsel::Error>>()?
            }
        };
        Ok(ObjectiveEnsemble::new(self.ground()?, functions)?)
    }
}

fn load_graph(path: &Path) -> Result<DirectedGraph> {
    let file = File::open(path).with_context(|| format!("opening graph {}", path.display()))?;
    load_edge_list(std::io::BufReader::new(file))
        .with_context(|| format!("parsing graph {}", path.display()))
}

/// Rebuild the snapshot graphs over the union of their node names so every
/// objective shares one ground set; nodes missing from a snapshot are
/// isolated there.
fn align_snapshots(graphs: Vec<DirectedGraph>) -> Result<Vec<DirectedGraph>> {
    let mut names: Vec<String> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for g in &graphs {
        for name in g.node_names() {
            if !index.contains_key(name) {
                index.insert(name.clone(), names.len());
                names.push(name.clone());
            }
        }
    }
    graphs
        .into_iter()
        .map(|g| {
            let edges = g
                .edges()
                .iter()
                .map(|e| {
                    (
                        index[g.node_name(e.source)],
                        index[g.node_name(e.target)],
                        e.weight,
                    )
                })
                .collect();
            Ok(DirectedGraph::new(names.clone(), edges)?)
        })
        .collect()
}

/// Keep the `limit` nodes of highest total degree summed across snapshots,
/// ties to the lower index; induce every snapshot on that common node set.
fn top_active_common(graphs: Vec<DirectedGraph>, limit: usize) -> Result<Vec<DirectedGraph>> {
    let n = graphs[0].node_count();
    if limit >= n {
        return Ok(graphs);
    }
    let mut order: Vec<usize> = (0..n).collect();
    let degree = |v: usize| -> usize { graphs.iter().map(|g| g.total_degree(v)).sum() };
    order.sort_by_key(|&v| (std::cmp::Reverse(degree(v)), v));
    let mut keep = order[..limit].to_vec();
    keep.sort_unstable();
    let mut remap = vec![usize::MAX; n];
    for (new, &old) in keep.iter().enumerate() {
        remap[old] = new;
    }
    graphs
        .into_iter()
        .map(|g| {
            let names = keep.iter().map(|&v| g.node_name(v).to_string()).collect();
            let edges = g
                .edges()
                .iter()
                .filter(|e| remap[e.source] != usize::MAX && remap[e.target] != usize::MAX)
                .map(|e| (remap[e.source], remap[e.target], e.weight))
                .collect();
            Ok(DirectedGraph::new(names, edges)?)
        })
        .collect()
}

/// Load graphs and draw perturbations once; sweep grid points share the
/// result.
pub fn prepare_instance(config: &ExperimentConfig) -> Result<PreparedInstance> {
    match config.mode {
        Mode::Synthetic => Ok(PreparedInstance::Synthetic {
            weights: config.modular_weights.clone(),
        }),
        Mode::PerturbIc => {
            let graph = load_graph(&config.graph_paths[0])?;
            let limit = config.node_limit.min(graph.node_count());
            let graph = Arc::new(top_active_subgraph(&graph, limit)?);
            let base = weighted_cascade_probs(&graph)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(config.seed, &[SALT_PERTURB]));
            let thetas = perturb_probs(&base, 0.9, 1.1, config.m.max(), &mut rng)?;
            Ok(PreparedInstance::PerturbIc {
                graph,
                thetas,
                replicates: config.r,
            })
        }
        Mode::MultiGraphGeneralIc => {
            let graphs = config
                .graph_paths
                .iter()
                .map(|p| load_graph(p))
                .collect::<Result<Vec<_>>>()?;
            let graphs = align_snapshots(graphs)?;
            let limit = config.node_limit.min(graphs[0].node_count());
            let graphs = top_active_common(graphs, limit)?;
            Ok(PreparedInstance::MultiGraph {
                graphs: graphs.into_iter().map(Arc::new).collect(),
                replicates: config.r,
            })
        }
    }
}

/// One results.csv row.
#[derive(Clone, Debug)]
pub struct ResultRow {
    pub algorithm: &'static str,
    pub k: usize,
    pub m: usize,
    pub rep: u32,
    pub f_value: f64,
    pub eval_count: u64,
    pub wall_ms: u128,
    pub subset: String,
}

pub struct PointOutput {
    pub rows: Vec<ResultRow>,
    /// Per-seed evolutionary traces, kept only when the caller asks for them.
    pub eporss_traces: Vec<RunTrace>,
}

fn solve_deterministic(
    algorithm: Algorithm,
    ensemble: &ObjectiveEnsemble,
    k: usize,
    config: &ExperimentConfig,
) -> Result<(robsel::Subset, RunTrace)> {
    let out = match algorithm {
        Algorithm::Greedy => greedy_select(ensemble, k)?,
        Algorithm::ModifiedGreedy => modified_greedy_select(ensemble, k)?,
        Algorithm::Saturate => saturate_select(ensemble, k, &config.saturate)?,
        Algorithm::Eporss => bail!("eporss is handled by the randomized path"),
    };
    Ok(out)
}

/// Run every configured algorithm at one `(k, m)` grid point.
pub fn run_point(
    instance: &PreparedInstance,
    config: &ExperimentConfig,
    k: usize,
    m: usize,
    keep_traces: bool,
) -> Result<PointOutput> {
    let n = instance.n();
    ensure!(
        k <= n,
        "k={k} exceeds the instance ground set size {n} (after node-limit subsampling)"
    );
    let det_reps: u32 = if instance.is_stochastic() {
        config.reps
    } else {
        1
    };
    let mut rows = Vec::new();
    let mut eporss_traces = Vec::new();

    for &algorithm in &config.algorithms {
        if algorithm.is_randomized() {
            let iterations = config
                .eporss_iterations
                .unwrap_or_else(|| default_iterations(k, n));
            for s in 0..config.eporss_seeds {
                let ensemble = instance.build(
                    m,
                    seeding::derive(config.seed, &[SALT_NOISE, s as u64]),
                    config,
                )?;
                let run_seed = seeding::derive(config.seed, &[SALT_EPORSS, s as u64]);
                let start = Instant::now();
                let (subset, trace) = eporss_run(&ensemble, k, iterations, run_seed)?;
                let wall_ms = start.elapsed().as_millis();
                rows.push(ResultRow {
                    algorithm: algorithm.name(),
                    k,
                    m,
                    rep: s,
                    f_value: trace.final_f(),
                    eval_count: ensemble.worst_case_eval_count(),
                    wall_ms,
                    subset: ensemble.ground().format_subset(&subset, ";"),
                });
                if keep_traces {
                    eporss_traces.push(trace);
                }
            }
        } else {
            for rep in 0..det_reps {
                let ensemble = instance.build(
                    m,
                    seeding::derive(config.seed, &[SALT_NOISE, rep as u64]),
                    config,
                )?;
                let start = Instant::now();
                let (subset, trace) = solve_deterministic(algorithm, &ensemble, k, config)?;
                let wall_ms = start.elapsed().as_millis();
                rows.push(ResultRow {
                    algorithm: algorithm.name(),
                    k,
                    m,
                    rep,
                    f_value: trace.final_f(),
                    eval_count: ensemble.worst_case_eval_count(),
                    wall_ms,
                    subset: ensemble.ground().format_subset(&subset, ";"),
                });
            }
        }
    }
    Ok(PointOutput {
        rows,
        eporss_traces,
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Aggregate rows into one summary record per (algorithm, k, m), preserving
/// first-appearance order.
fn summarize(rows: &[ResultRow]) -> Vec<(String, usize, usize, usize, f64, f64, f64)> {
    let mut keys: Vec<(&'static str, usize, usize)> = Vec::new();
    for row in rows {
        let key = (row.algorithm, row.k, row.m);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(algorithm, k, m)| {
            let group: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.algorithm == algorithm && r.k == k && r.m == m)
                .collect();
            let f: Vec<f64> = group.iter().map(|r| r.f_value).collect();
            let evals: Vec<f64> = group.iter().map(|r| r.eval_count as f64).collect();
            let (mean_f, std_f) = mean_std(&f);
            let (mean_evals, _) = mean_std(&evals);
            (
                algorithm.to_string(),
                k,
                m,
                group.len(),
                mean_f,
                std_f,
                mean_evals,
            )
        })
        .collect()
}

pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "algorithm",
        "k",
        "m",
        "rep",
        "f_value",
        "eval_count",
        "wall_ms",
        "subset",
    ])?;
    for row in rows {
        writer.write_record([
            row.algorithm.to_string(),
            row.k.to_string(),
            row.m.to_string(),
            row.rep.to_string(),
            row.f_value.to_string(),
            row.eval_count.to_string(),
            row.wall_ms.to_string(),
            row.subset.clone(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_summary_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "algorithm",
        "k",
        "m",
        "reps",
        "mean_f",
        "std_f",
        "mean_evals",
    ])?;
    for (algorithm, k, m, reps, mean_f, std_f, mean_evals) in summarize(rows) {
        writer.write_record([
            algorithm,
            k.to_string(),
            m.to_string(),
            reps.to_string(),
            mean_f.to_string(),
            std_f.to_string(),
            mean_evals.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn write_sweep_csv(path: &Path, axis: SweepAxis, rows: &[ResultRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "axis",
        "value",
        "algorithm",
        "k",
        "m",
        "reps",
        "mean_f",
        "std_f",
        "mean_evals",
    ])?;
    for (algorithm, k, m, reps, mean_f, std_f, mean_evals) in summarize(rows) {
        let value = match axis {
            SweepAxis::K => k,
            SweepAxis::M => m,
        };
        writer.write_record([
            axis.name().to_string(),
            value.to_string(),
            algorithm,
            k.to_string(),
            m.to_string(),
            reps.to_string(),
            mean_f.to_string(),
            std_f.to_string(),
            mean_evals.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn write_metadata(out_dir: &Path, command: &str, config: &ExperimentConfig) -> Result<()> {
    let mut echo = serde_json::Map::new();
    for (key, value) in &config.raw {
        echo.insert(key.clone(), serde_json::Value::String(value.clone()));
    }
    let metadata = serde_json::json!({
        "command": command,
        "config": echo,
        "seed": config.seed,
        "library_version": robsel::VERSION,
        "oracle_mode": config.oracle_mode_name(),
    });
    let mut file = File::create(out_dir.join("metadata.json"))?;
    writeln!(file, "{}", serde_json::to_string_pretty(&metadata)?)?;
    Ok(())
}

pub fn cmd_run(config: &ExperimentConfig) -> Result<()> {
    let k = config
        .k
        .single()
        .context("'run' needs a single k (use 'sweep' for ranges)")?;
    let m = config
        .m
        .single()
        .context("'run' needs a single m (use 'sweep' for ranges)")?;
    std::fs::create_dir_all(&config.output_dir)?;
    let instance = prepare_instance(config)?;
    let output = run_point(&instance, config, k, m, false)?;
    write_results_csv(&config.output_dir.join("results.csv"), &output.rows)?;
    write_summary_csv(&config.output_dir.join("summary.csv"), &output.rows)?;
    write_metadata(&config.output_dir, "run", config)?;
    println!(
        "run: {} rows -> {}",
        output.rows.len(),
        config.output_dir.display()
    );
    Ok(())
}

pub fn cmd_sweep(config: &ExperimentConfig) -> Result<()> {
    let axis = config.sweep_axis()?;
    std::fs::create_dir_all(&config.output_dir)?;
    let instance = prepare_instance(config)?;
    let mut all_rows: Vec<ResultRow> = Vec::new();
    let points: Vec<(usize, usize)> = match axis {
        SweepAxis::K => {
            let m = config.m.single()?;
            config.k.values().into_iter().map(|k| (k, m)).collect()
        }
        SweepAxis::M => {
            let k = config.k.single()?;
            config.m.values().into_iter().map(|m| (k, m)).collect()
        }
    };
    for (k, m) in points {
        let output = run_point(&instance, config, k, m, false)?;
        all_rows.extend(output.rows);
        // flush progress so partial results survive a failing later point
        write_results_csv(&config.output_dir.join("results.csv"), &all_rows)?;
    }
    write_summary_csv(&config.output_dir.join("summary.csv"), &all_rows)?;
    write_sweep_csv(&config.output_dir.join("sweep.csv"), axis, &all_rows)?;
    write_metadata(&config.output_dir, "sweep", config)?;
    println!(
        "sweep: {} rows -> {}",
        all_rows.len(),
        config.output_dir.display()
    );
    Ok(())
}

pub fn cmd_trace(config: &ExperimentConfig) -> Result<()> {
    ensure!(
        config.algorithms.contains(&Algorithm::Eporss),
        "'trace' needs eporss among the configured algorithms"
    );
    let k = config.k.single()?;
    let m = config.m.single()?;
    std::fs::create_dir_all(&config.output_dir)?;
    let instance = prepare_instance(config)?;
    let n = instance.n();
    let kn = (k * n) as f64;
    let output = run_point(&instance, config, k, m, true)?;

    let mut writer = csv::Writer::from_path(config.output_dir.join("trace.csv"))?;
    writer.write_record([
        "kind",
        "algorithm",
        "iteration",
        "iteration_kn",
        "f_value",
        "std_f",
    ])?;

    // evolutionary samples share iteration points across seeds; average them
    let traces = &output.eporss_traces;
    ensure!(!traces.is_empty(), "no evolutionary traces recorded");
    let sample_count = traces[0].steps.len();
    ensure!(
        traces.iter().all(|t| t.steps.len() == sample_count),
        "traces have mismatched sampling cadences"
    );
    for i in 0..sample_count {
        let iteration = traces[0].steps[i].iteration;
        let values: Vec<f64> = traces.iter().map(|t| t.steps[i].f_value).collect();
        let (mean, std) = mean_std(&values);
        writer.write_record([
            "sample".to_string(),
            "eporss".to_string(),
            iteration.to_string(),
            (iteration as f64 / kn).to_string(),
            mean.to_string(),
            std.to_string(),
        ])?;
    }

    // horizontal baselines: final value of each deterministic algorithm
    for &algorithm in &config.algorithms {
        if algorithm.is_randomized() {
            continue;
        }
        let values: Vec<f64> = output
            .rows
            .iter()
            .filter(|r| r.algorithm == algorithm.name())
            .map(|r| r.f_value)
            .collect();
        let (mean, std) = mean_std(&values);
        writer.write_record([
            "baseline".to_string(),
            algorithm.name().to_string(),
            "0".to_string(),
            "0".to_string(),
            mean.to_string(),
            std.to_string(),
        ])?;
    }
    writer.flush()?;
    write_metadata(&config.output_dir, "trace", config)?;
    println!("trace -> {}", config.output_dir.display());
    Ok(())
}

pub fn cmd_verify(tier: Tier) -> Result<()> {
    let outcomes = run_all_checks(tier);
    let mut failures = 0;
    for outcome in &outcomes {
        println!("{}", outcome.summary_line());
        if !outcome.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        bail!("{failures} of {} checks failed", outcomes.len());
    }
    println!("all {} checks passed", outcomes.len());
    Ok(())
}
