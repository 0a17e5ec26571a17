//! Library side of the `windsoup` command: configuration parsing, the
//! experiments and their CSV/JSON reports.

pub mod config;
pub mod experiments;
pub mod report;

use std::path::Path;

use anyhow::{Context, Result};

pub use config::{parse_config, Config, Experiment, UsageError};
pub use report::{Check, Outcome, Provenance, Summary, Table};

/// Runs an experiment on a dedicated pool of `workers` threads.
pub fn execute(experiment: Experiment, cfg: &Config, workers: usize) -> Result<Outcome> {
    if workers == 0 {
        return Err(UsageError("workers: must be at least 1".into()).into());
    }
    if let Some(e) = cfg.experiment {
        if e != experiment {
            return Err(UsageError(format!(
                "experiment: the configuration names `{e}` but `{experiment}` was requested"
            ))
            .into());
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building worker pool")?;
    pool.install(|| experiments::run(experiment, cfg))
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    Ok(parse_config(&text)?)
}
