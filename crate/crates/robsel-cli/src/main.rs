//! `robsel`: robust subset selection experiments from the command line.

mod config;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use robsel::verify::Tier;

#[derive(Parser)]
#[command(
    name = "robsel",
    version,
    about = "Robust subset selection: greedy, modified greedy, saturate, and evolutionary Pareto solvers over worst-case objectives"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat key=value experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured algorithm at a single (k, m) point.
    Run(ExperimentArgs),
    /// Sweep a k or m range; grid points share the perturbation draws.
    Sweep(ExperimentArgs),
    /// Emit the evolutionary objective-vs-iterations curve with baselines.
    Trace(ExperimentArgs),
    /// Run the property/oracle verification suite.
    Verify {
        /// Suite size: "tiny" finishes in under a minute, "small" runs the
        /// full instance counts.
        #[arg(long, default_value = "tiny")]
        tier: String,
        /// Accepted for interface symmetry; the suite generates its own
        /// instances.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

impl ExperimentArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::from_file(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
            config.raw.insert("seed".into(), seed.to_string());
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
            config
                .raw
                .insert("output-dir".into(), out.display().to_string());
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => runner::cmd_run(&args.load()?),
        Command::Sweep(args) => runner::cmd_sweep(&args.load()?),
        Command::Trace(args) => runner::cmd_trace(&args.load()?),
        Command::Verify { tier, config: _ } => {
            let tier = match tier.as_str() {
                "tiny" => Tier::Tiny,
                "small" => Tier::Small,
                other => anyhow::bail!("unknown tier '{other}' (tiny|small)"),
            };
            runner::cmd_verify(tier)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    robsel::configure_threads_from_env();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
