use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use windsoup_cli::{execute, load_config, Config, Experiment, UsageError};

/// Brownian loop soup winding-field experiments.
#[derive(Parser, Debug)]
#[command(name = "windsoup", version)]
struct Args {
    /// verify-lemma1 | verify-lemma2 | verify-lemma3 | martingale-scan |
    /// field-moments | exact-tables | soup-dump
    experiment: String,
    /// `key = value` configuration file; all keys are optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of replicas (overrides the config).
    #[arg(long)]
    replicas: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

fn run(args: Args) -> Result<bool> {
    let experiment: Experiment = args.experiment.parse()?;
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => Config::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(r) = args.replicas {
        cfg.replicas = Some(r);
    }
    cfg.validate()?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let outcome = execute(experiment, &cfg, workers)?;
    for c in &outcome.summary.checks {
        println!("{}", c.line());
    }
    for path in outcome.write(&args.out)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(outcome.summary.all_pass)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("windsoup: some checks failed");
            ExitCode::from(1)
        }
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("windsoup: usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("windsoup: error: {e:#}");
            ExitCode::from(1)
        }
    }
}
