//! `streetperc`: runs percolation experiments on random street systems from
//! TOML configs and writes CSV tables, a manifest and SVG plots.

mod config;
mod output;
mod plot;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use streetperc::Execution;

use config::{Experiment, ExperimentConfig};
use output::Output;
use run::RunContext;

#[derive(Debug, Parser)]
#[command(
    name = "streetperc",
    version,
    about = "Percolation experiments for D2D networks on random street systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML); every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config `output`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially. Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Suppress progress messages.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical intensity λ_c by logistic fit of crossing probabilities.
    Threshold,
    /// Crossing probability curves for several window sizes.
    CrossingCurves,
    /// Percolation probability θ̂(λ) from sequential device insertion.
    Theta,
    /// Hop-count stretch factor μ̂(λ).
    Stretch,
    /// λ_c/γ table over rγ for both street models, next to the PBM column.
    Table1,
    /// Regenerates the plots of a finished run from its CSVs.
    Replot,
}

fn executor(workers: Option<usize>) -> Result<Execution> {
    match workers {
        Some(0) => bail!("--workers: must be at least 1"),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()?;
            #[cfg(not(feature = "parallel"))]
            eprintln!("built without the `parallel` feature; ignoring --workers {n}");
            Ok(Execution::default())
        }
        None => Ok(Execution::default()),
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let experiment = match cli.command {
        Command::Threshold => Experiment::Threshold,
        Command::CrossingCurves => Experiment::CrossingCurves,
        Command::Theta => Experiment::Theta,
        Command::Stretch => Experiment::Stretch,
        Command::Table1 => Experiment::Table1,
        Command::Replot => {
            let Some(dir) = cli.out.or(cfg.output) else {
                bail!("replot needs --out (or a config with `output`) naming a finished run");
            };
            let manifest = output::read_manifest(&dir)?;
            for name in output::render_plots(&dir, manifest.experiment)? {
                println!("{}", dir.join(name).display());
            }
            return Ok(());
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    let resolved = cfg.resolve(experiment)?;
    let dir = resolved
        .config
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("results").join(experiment.to_string()));
    let ctx = RunContext {
        exec: executor(cli.workers)?,
        quiet: cli.quiet,
    };
    let mut out = Output::create(&dir)?;
    match experiment {
        Experiment::Threshold => run::threshold(&resolved, &ctx, &mut out)?,
        Experiment::CrossingCurves => run::crossing_curves(&resolved, &ctx, &mut out)?,
        Experiment::Theta => run::theta(&resolved, &ctx, &mut out)?,
        Experiment::Stretch => run::stretch(&resolved, &ctx, &mut out)?,
        Experiment::Table1 => run::table1(&resolved, &ctx, &mut out)?,
    }
    let files = out.finish(
        experiment,
        &resolved.config,
        resolved.config.plots.unwrap_or(true),
    )?;
    for f in files {
        println!("{}", dir.join(f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
