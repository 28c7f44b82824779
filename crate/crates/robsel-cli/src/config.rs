//! Flat `key = value` experiment configuration.
//!
//! Every field is a scalar or a short comma-separated list, so the format
//! stays line-diffable in experiment logs. `#` starts a comment line.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};

use robsel::influence::GeneralIcParams;
use robsel::objective::SeedPolicy;
use robsel::saturate::SaturateConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Synthetic,
    PerturbIc,
    MultiGraphGeneralIc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Greedy,
    ModifiedGreedy,
    Saturate,
    Eporss,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::ModifiedGreedy => "modified-greedy",
            Algorithm::Saturate => "saturate",
            Algorithm::Eporss => "eporss",
        }
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, Algorithm::Eporss)
    }
}

/// A scalar or an inclusive `lo..hi` range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueOrRange {
    Single(usize),
    Range(usize, usize),
}

impl ValueOrRange {
    pub fn is_range(&self) -> bool {
        matches!(self, ValueOrRange::Range(_, _))
    }

    pub fn values(&self) -> Vec<usize> {
        match *self {
            ValueOrRange::Single(v) => vec![v],
            ValueOrRange::Range(lo, hi) => (lo..=hi).collect(),
        }
    }

    pub fn max(&self) -> usize {
        match *self {
            ValueOrRange::Single(v) => v,
            ValueOrRange::Range(_, hi) => hi,
        }
    }

    pub fn single(&self) -> Result<usize> {
        match *self {
            ValueOrRange::Single(v) => Ok(v),
            ValueOrRange::Range(lo, hi) => bail!("expected a single value, got range {lo}..{hi}"),
        }
    }
}

fn parse_value_or_range(text: &str) -> Result<ValueOrRange> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().context("range start")?;
        let hi: usize = hi.trim().parse().context("range end")?;
        ensure!(lo <= hi, "range start {lo} exceeds end {hi}");
        Ok(ValueOrRange::Range(lo, hi))
    } else {
        Ok(ValueOrRange::Single(text.parse().context("integer value")?))
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub graph_paths: Vec<PathBuf>,
    pub k: ValueOrRange,
    pub m: ValueOrRange,
    pub r: u32,
    pub node_limit: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Fixed iteration budget; `None` means `⌊2ek²n⌋` per point.
    pub eporss_iterations: Option<u64>,
    pub eporss_seeds: u32,
    pub saturate: SaturateConfig,
    pub oracle_mode: SeedPolicy,
    /// Repetitions of the deterministic algorithms when oracles are noisy.
    pub reps: u32,
    pub output_dir: PathBuf,
    /// Per-function weights for synthetic mode.
    pub modular_weights: Vec<Vec<f64>>,
    pub general_ic: GeneralIcParams,
    /// Normalized key/value echo for the metadata sidecar.
    pub raw: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "mode",
    "graph-paths",
    "k",
    "m",
    "r",
    "node-limit",
    "seed",
    "algorithms",
    "eporss-T",
    "eporss-seeds",
    "saturate-alpha",
    "saturate-epsilon",
    "saturate-max-rounds",
    "oracle-mode",
    "reps",
    "output-dir",
    "general-ic-base",
    "general-ic-increment",
    "general-ic-cap",
];

pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("line {}: expected 'key = value'", lineno + 1))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        ensure!(
            KNOWN_KEYS.contains(&key.as_str()) || key.starts_with("modular-weights-"),
            "line {}: unknown key '{key}'",
            lineno + 1
        );
        ensure!(
            map.insert(key.clone(), value).is_none(),
            "line {}: duplicate key '{key}'",
            lineno + 1
        );
    }
    Ok(map)
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let raw = parse_kv(text)?;
        let get = |key: &str| raw.get(key).map(String::as_str);

        let mode = match get("mode").context("missing required key 'mode'")? {
            "synthetic" => Mode::Synthetic,
            "perturb-ic" => Mode::PerturbIc,
            "multi-graph-general-ic" => Mode::MultiGraphGeneralIc,
            other => bail!("unknown mode '{other}'"),
        };

        let graph_paths: Vec<PathBuf> = get("graph-paths")
            .map(|v| v.split(',').map(|p| PathBuf::from(p.trim())).collect())
            .unwrap_or_default();

        let mut modular_weights: Vec<(usize, Vec<f64>)> = Vec::new();
        for (key, value) in &raw {
            if let Some(index) = key.strip_prefix("modular-weights-") {
                let index: usize = index
                    .parse()
                    .with_context(|| format!("weight index in '{key}'"))?;
                let weights = value
                    .split(',')
                    .map(|w| w.trim().parse::<f64>().context("weight"))
                    .collect::<Result<Vec<f64>>>()?;
                modular_weights.push((index, weights));
            }
        }
        modular_weights.sort_by_key(|(i, _)| *i);
        for (expect, (i, _)) in modular_weights.iter().enumerate() {
            ensure!(
                *i == expect + 1,
                "modular-weights-* keys must be numbered 1..count without gaps"
            );
        }
        let modular_weights: Vec<Vec<f64>> = modular_weights.into_iter().map(|(_, w)| w).collect();

        let k = parse_value_or_range(get("k").context("missing required key 'k'")?)
            .context("key 'k'")?;
        let m = match get("m") {
            Some(v) => parse_value_or_range(v).context("key 'm'")?,
            None if mode == Mode::Synthetic && !modular_weights.is_empty() => {
                ValueOrRange::Single(modular_weights.len())
            }
            None => bail!("missing required key 'm'"),
        };

        let r: u32 = get("r").unwrap_or("100").parse().context("key 'r'")?;
        let node_limit: usize = get("node-limit")
            .unwrap_or("200")
            .parse()
            .context("key 'node-limit'")?;
        let seed: u64 = get("seed").unwrap_or("0").parse().context("key 'seed'")?;

        let algorithms = get("algorithms")
            .unwrap_or("greedy,modified-greedy,saturate,eporss")
            .split(',')
            .map(|a| match a.trim() {
                "greedy" => Ok(Algorithm::Greedy),
                "modified-greedy" => Ok(Algorithm::ModifiedGreedy),
                "saturate" => Ok(Algorithm::Saturate),
                "eporss" => Ok(Algorithm::Eporss),
                other => bail!("unknown algorithm '{other}'"),
            })
            .collect::<Result<Vec<_>>>()?;
        ensure!(!algorithms.is_empty(), "algorithms list is empty");

        let eporss_iterations = match get("eporss-T").unwrap_or("auto") {
            "auto" => None,
            v => Some(v.parse::<u64>().context("key 'eporss-T'")?),
        };
        let eporss_seeds: u32 = get("eporss-seeds")
            .unwrap_or("10")
            .parse()
            .context("key 'eporss-seeds'")?;

        let saturate = SaturateConfig {
            alpha: get("saturate-alpha")
                .unwrap_or("1.0")
                .parse()
                .context("key 'saturate-alpha'")?,
            epsilon: get("saturate-epsilon")
                .unwrap_or("1e-3")
                .parse()
                .context("key 'saturate-epsilon'")?,
            max_rounds: get("saturate-max-rounds")
                .unwrap_or("60")
                .parse()
                .context("key 'saturate-max-rounds'")?,
        };

        let oracle_mode = match get("oracle-mode").unwrap_or("memoized") {
            "memoized" => SeedPolicy::MemoizedPerSubset,
            "fresh" => SeedPolicy::FreshSample,
            other => bail!("unknown oracle-mode '{other}' (memoized|fresh)"),
        };

        let reps: u32 = get("reps").unwrap_or("10").parse().context("key 'reps'")?;
        let output_dir = PathBuf::from(get("output-dir").unwrap_or("out"));

        let general_ic = GeneralIcParams {
            base: get("general-ic-base")
                .unwrap_or("0.1")
                .parse()
                .context("key 'general-ic-base'")?,
            increment: get("general-ic-increment")
                .unwrap_or("0.05")
                .parse()
                .context("key 'general-ic-increment'")?,
            cap: get("general-ic-cap")
                .unwrap_or("1.0")
                .parse()
                .context("key 'general-ic-cap'")?,
        };

        let config = ExperimentConfig {
            mode,
            graph_paths,
            k,
            m,
            r,
            node_limit,
            seed,
            algorithms,
            eporss_iterations,
            eporss_seeds,
            saturate,
            oracle_mode,
            reps,
            output_dir,
            modular_weights,
            general_ic,
            raw,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_text(&text)
    }

    fn validate(&self) -> Result<()> {
        ensure!(self.r >= 1, "r must be at least 1");
        ensure!(self.reps >= 1, "reps must be at least 1");
        ensure!(self.eporss_seeds >= 1, "eporss-seeds must be at least 1");
        ensure!(self.node_limit >= 1, "node-limit must be at least 1");
        for k in self.k.values() {
            ensure!(
                (1..=self.node_limit).contains(&k),
                "k={k} outside [1, node-limit={}]",
                self.node_limit
            );
        }
        for m in self.m.values() {
            ensure!(m >= 1, "m must be at least 1");
        }
        self.general_ic
            .validate()
            .map_err(|e| anyhow::anyhow!("general-ic parameters: {e}"))?;

        match self.mode {
            Mode::Synthetic => {
                ensure!(
                    !self.modular_weights.is_empty(),
                    "synthetic mode needs modular-weights-1..m keys"
                );
                let n = self.modular_weights[0].len();
                ensure!(
                    self.modular_weights.iter().all(|w| w.len() == n),
                    "all modular-weights vectors must have the same length"
                );
                ensure!(
                    self.m.max() <= self.modular_weights.len(),
                    "m exceeds the {} provided weight vectors",
                    self.modular_weights.len()
                );
            }
            Mode::PerturbIc => {
                ensure!(
                    self.graph_paths.len() == 1,
                    "perturb-ic mode needs exactly one graph path"
                );
                ensure!(
                    self.m.values().iter().all(|&m| m >= 2),
                    "robust graph modes need m >= 2"
                );
            }
            Mode::MultiGraphGeneralIc => {
                ensure!(
                    self.graph_paths.len() >= self.m.max(),
                    "multi-graph mode needs at least m={} graph paths, got {}",
                    self.m.max(),
                    self.graph_paths.len()
                );
                ensure!(
                    self.m.values().iter().all(|&m| m >= 2),
                    "robust graph modes need m >= 2"
                );
            }
        }
        Ok(())
    }

    /// Exactly one of k, m must be a range for a sweep.
    pub fn sweep_axis(&self) -> Result<SweepAxis> {
        match (self.k.is_range(), self.m.is_range()) {
            (true, false) => Ok(SweepAxis::K),
            (false, true) => Ok(SweepAxis::M),
            (false, false) => bail!("sweep needs a range for exactly one of k, m (e.g. k = 5..10)"),
            (true, true) => bail!("sweep over both k and m is not supported"),
        }
    }

    pub fn oracle_mode_name(&self) -> &'static str {
        match self.oracle_mode {
            SeedPolicy::MemoizedPerSubset => "memoized",
            SeedPolicy::FreshSample => "fresh",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    K,
    M,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::K => "k",
            SweepAxis::M => "m",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYNTHETIC: &str = "\
mode = synthetic
k = 1
seed = 7
modular-weights-1 = 3,2,1
modular-weights-2 = 1,2,3
";

    #[test]
    fn parses_synthetic_config() {
        let config = ExperimentConfig::from_text(SYNTHETIC).unwrap();
        assert_eq!(config.mode, Mode::Synthetic);
        assert_eq!(config.m, ValueOrRange::Single(2));
        assert_eq!(config.modular_weights.len(), 2);
        assert_eq!(config.algorithms.len(), 4);
        assert_eq!(config.seed, 7);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(ExperimentConfig::from_text("mode = synthetic\nbogus = 1\n").is_err());
        assert!(parse_kv("k = 1\nk = 2\n").is_err());
    }

    #[test]
    fn ranges_parse_inclusive() {
        assert_eq!(parse_value_or_range("5").unwrap(), ValueOrRange::Single(5));
        assert_eq!(
            parse_value_or_range("5..10").unwrap(),
            ValueOrRange::Range(5, 10)
        );
        assert_eq!(ValueOrRange::Range(2, 4).values(), vec![2, 3, 4]);
        assert!(parse_value_or_range("7..3").is_err());
    }

    #[test]
    fn perturb_mode_needs_one_graph_and_two_functions() {
        let text = "mode = perturb-ic\nk = 5\nm = 1\ngraph-paths = g.txt\n";
        assert!(ExperimentConfig::from_text(text).is_err());
        let text = "mode = perturb-ic\nk = 5\nm = 3\ngraph-paths = a.txt,b.txt\n";
        assert!(ExperimentConfig::from_text(text).is_err());
        let text = "mode = perturb-ic\nk = 5\nm = 3\ngraph-paths = g.txt\n";
        assert!(ExperimentConfig::from_text(text).is_ok());
    }

    #[test]
    fn sweep_axis_detection() {
        let config = ExperimentConfig::from_text(&SYNTHETIC.replace("k = 1", "k = 1..3")).unwrap();
        assert_eq!(config.sweep_axis().unwrap(), SweepAxis::K);
        let config = ExperimentConfig::from_text(SYNTHETIC).unwrap();
        assert!(config.sweep_axis().is_err());
    }

    #[test]
    fn k_must_fit_node_limit() {
        let text = "mode = synthetic\nk = 9\nnode-limit = 5\nmodular-weights-1 = 1,1,1\n";
        assert!(ExperimentConfig::from_text(text).is_err());
    }
}
