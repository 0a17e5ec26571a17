//! Check records, JSON summaries and CSV tables.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use windsoup_core::stats::EstimateWithError;

use crate::config::{Config, Experiment};

/// Statistical checks pass when `|z| < Z_THRESHOLD`.
pub const Z_THRESHOLD: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// The reference value is a formula stated in the paper.
    PaperFormula,
    /// The reference value comes from an independent derivation or oracle.
    DerivedOracle,
}

/// One checked quantity in a summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub estimate: f64,
    pub stderr: f64,
    pub reference_value: f64,
    pub provenance: Provenance,
    /// `None` for deterministic comparisons, which use `tolerance` instead.
    pub z_score: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    /// Ungated checks are reported but do not affect the exit status.
    pub gated: bool,
}

impl Check {
    /// Passes when the estimate is within three standard errors of the reference.
    pub fn statistical(name: impl Into<String>, est: EstimateWithError<f64>, reference: f64, provenance: Provenance) -> Self {
        let z = est.z_score(reference);
        Self {
            name: name.into(),
            estimate: est.mean,
            stderr: est.stderr,
            reference_value: reference,
            provenance,
            z_score: Some(z),
            tolerance: None,
            pass: z.abs() < Z_THRESHOLD,
            gated: true,
        }
    }

    /// Passes when `|estimate - reference| < tolerance`.
    pub fn deterministic(name: impl Into<String>, estimate: f64, reference: f64, tolerance: f64, provenance: Provenance) -> Self {
        Self {
            name: name.into(),
            estimate,
            stderr: 0.0,
            reference_value: reference,
            provenance,
            z_score: None,
            tolerance: Some(tolerance),
            pass: (estimate - reference).abs() < tolerance,
            gated: true,
        }
    }

    pub fn ungated(mut self) -> Self {
        self.gated = false;
        self
    }

    /// Adds a relative-error requirement on top of the existing criterion.
    pub fn with_relative_tolerance(mut self, rel: f64) -> Self {
        let ok = (self.estimate - self.reference_value).abs() <= rel * self.reference_value.abs();
        self.tolerance = Some(rel * self.reference_value.abs());
        self.pass &= ok;
        self
    }

    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let gate = if self.gated { "" } else { " (not gated)" };
        match self.z_score {
            Some(z) => format!(
                "{verdict} {}: estimate {:.7} ± {:.2e}, reference {:.7} [{}], z = {z:.2}{gate}",
                self.name,
                self.estimate,
                self.stderr,
                self.reference_value,
                self.provenance_label()
            ),
            None => format!(
                "{verdict} {}: value {:.10}, reference {:.10} [{}], |diff| = {:.2e} (tol {:.0e}){gate}",
                self.name,
                self.estimate,
                self.reference_value,
                self.provenance_label(),
                (self.estimate - self.reference_value).abs(),
                self.tolerance.unwrap_or(0.0)
            ),
        }
    }

    fn provenance_label(&self) -> &'static str {
        match self.provenance {
            Provenance::PaperFormula => "paper-formula",
            Provenance::DerivedOracle => "derived-oracle",
        }
    }
}

/// The JSON summary written next to the CSV output.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub experiment: Experiment,
    pub seed: u64,
    pub replicas: usize,
    pub split_function: &'static str,
    pub config: Config,
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

impl Summary {
    pub fn new(experiment: Experiment, config: &Config, replicas: usize, checks: Vec<Check>) -> Self {
        let all_pass = checks.iter().filter(|c| c.gated).all(|c| c.pass);
        Self {
            experiment,
            seed: config.seed,
            replicas,
            split_function: windsoup_core::rng::SPLIT_FUNCTION,
            config: config.clone(),
            notes: Vec::new(),
            checks,
            all_pass,
        }
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }
}

/// An in-memory CSV table; written in one piece by a single writer.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file_name: impl Into<String>, header: &[&'static str]) -> Self {
        Self {
            file_name: file_name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().context("flushing CSV buffer")
    }
}

/// Shortest round-trip formatting, so equal values always print identically.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Everything an experiment produces.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub summary: Summary,
}

impl Outcome {
    /// Writes all tables and `<stem>.json` into `dir`, returning the paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        let mut paths = Vec::new();
        for t in &self.tables {
            let path = dir.join(&t.file_name);
            std::fs::write(&path, t.to_bytes()?).with_context(|| format!("writing {}", path.display()))?;
            paths.push(path);
        }
        let path = dir.join(format!("{}.json", self.summary.experiment.stem()));
        let json = serde_json::to_string_pretty(&self.summary)?;
        std::fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        paths.push(path);
        Ok(paths)
    }
}
