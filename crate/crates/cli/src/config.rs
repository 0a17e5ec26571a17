//! `key = value` experiment configuration.
//!
//! Lines are `key = value`; `#` starts a comment and blank lines are
//! ignored. Every key is optional. Keys whose default depends on the
//! experiment are resolved by the `*_or` accessors.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use windsoup_core::field::{BetaField, DeltaSchedule, TestFunction};
use windsoup_core::{DiscDomain, PlanePoint, SoupConfig};

/// An invalid command line or configuration file (exit status 2).
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VerifyLemma1,
    VerifyLemma2,
    VerifyLemma3,
    MartingaleScan,
    FieldMoments,
    ExactTables,
    SoupDump,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::VerifyLemma1,
        Experiment::VerifyLemma2,
        Experiment::VerifyLemma3,
        Experiment::MartingaleScan,
        Experiment::FieldMoments,
        Experiment::ExactTables,
        Experiment::SoupDump,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::VerifyLemma1 => "verify-lemma1",
            Experiment::VerifyLemma2 => "verify-lemma2",
            Experiment::VerifyLemma3 => "verify-lemma3",
            Experiment::MartingaleScan => "martingale-scan",
            Experiment::FieldMoments => "field-moments",
            Experiment::ExactTables => "exact-tables",
            Experiment::SoupDump => "soup-dump",
        }
    }

    /// File stem shared by the CSV and JSON outputs.
    pub fn stem(self) -> String {
        self.name().replace('-', "_")
    }
}

impl FromStr for Experiment {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, UsageError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| UsageError(format!("unknown experiment `{s}`")))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunctionKind {
    Indicator,
    Bump,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaFieldKind {
    Constant,
    RadialStep,
}

/// A fully parsed configuration. `None` means "use the experiment default".
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    pub experiment: Option<Experiment>,
    pub seed: u64,
    pub replicas: Option<usize>,

    pub alpha: Option<f64>,
    pub beta: f64,
    pub radius: f64,
    pub t_min: Option<f64>,
    pub t_max: f64,
    pub steps_per_unit_time: u32,
    pub exit_margin: f64,
    pub margin: f64,
    pub point_re: f64,
    pub point_im: f64,

    pub schedule_first: f64,
    pub schedule_levels: usize,
    pub deltas: Option<Vec<f64>>,

    pub delta: f64,
    pub k_max: i64,

    pub bridges: u64,
    pub root_radius: f64,

    pub test_function: TestFunctionKind,
    pub h_radius: f64,
    /// Cells per side of the quadrature grid; by default the cell side is at
    /// most half the smallest schedule scale.
    pub grid_n: Option<usize>,
    pub beta_field: BetaFieldKind,
    pub beta_inner: f64,
    pub beta_outer: f64,
    pub beta_step_radius: f64,
    pub exploratory_alpha: Option<f64>,
    pub jackknife_groups: usize,

    pub r_values: Vec<f64>,
    pub n_values: Vec<i64>,
    pub fourier_betas: Vec<f64>,
    pub fourier_terms: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 0,
            replicas: None,
            alpha: None,
            beta: PI,
            radius: 1.0,
            t_min: None,
            t_max: 20.0,
            steps_per_unit_time: 2048,
            exit_margin: 0.0,
            margin: windsoup_core::field::DEFAULT_MARGIN,
            point_re: 0.0,
            point_im: 0.0,
            schedule_first: 0.5,
            schedule_levels: 8,
            deltas: None,
            delta: 0.2,
            k_max: 1,
            bridges: 1_000_000,
            root_radius: 6.0,
            test_function: TestFunctionKind::Indicator,
            h_radius: 0.5,
            grid_n: None,
            beta_field: BetaFieldKind::Constant,
            beta_inner: PI,
            beta_outer: PI,
            beta_step_radius: 0.25,
            exploratory_alpha: None,
            jackknife_groups: 20,
            r_values: vec![0.5, 1.0, 2.0],
            n_values: vec![1, 2, 3],
            fourier_betas: vec![PI / 2.0, PI, 1.5 * PI],
            fourier_terms: 1_000_000,
        }
    }
}

/// Reals accept plain numbers and multiples of π: `pi`, `3pi/2`, `0.5*pi`, `pi/4`.
fn parse_real(key: &str, raw: &str) -> Result<f64, UsageError> {
    let s: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = s.to_ascii_lowercase();
    let value = if let Some(pos) = lower.find("pi").or_else(|| lower.find('π')) {
        let marker = if lower[pos..].starts_with("pi") { 2 } else { 'π'.len_utf8() };
        let head = lower[..pos].trim_end_matches('*');
        let tail = &lower[pos + marker..];
        let factor = if head.is_empty() { Some(1.0) } else { head.parse::<f64>().ok() };
        let divisor = if tail.is_empty() {
            Some(1.0)
        } else {
            tail.strip_prefix('/').and_then(|d| d.parse::<f64>().ok())
        };
        match (factor, divisor) {
            (Some(f), Some(d)) if d != 0.0 => Some(f * PI / d),
            _ => None,
        }
    } else {
        lower.parse::<f64>().ok()
    };
    match value {
        Some(v) if v.is_finite() => Ok(v),
        _ => usage(format!("{key}: expected a real number, got `{raw}`")),
    }
}

fn parse_int<T: FromStr>(key: &str, raw: &str) -> Result<T, UsageError> {
    let s = raw.trim().replace('_', "");
    // Allow integral values written in scientific notation, e.g. `1e6`.
    if let Ok(v) = s.parse::<T>() {
        return Ok(v);
    }
    if let Ok(f) = s.parse::<f64>() {
        if f.fract() == 0.0 && f.is_finite() {
            if let Ok(v) = format!("{f:.0}").parse::<T>() {
                return Ok(v);
            }
        }
    }
    usage(format!("{key}: expected an integer, got `{raw}`"))
}

fn parse_list<T>(key: &str, raw: &str, item: impl Fn(&str, &str) -> Result<T, UsageError>) -> Result<Vec<T>, UsageError> {
    let items: Vec<T> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return usage(format!("{key}: expected a non-empty comma-separated list"));
    }
    Ok(items)
}

fn parse_optional_real(key: &str, raw: &str) -> Result<Option<f64>, UsageError> {
    match raw.trim() {
        "" | "none" | "default" => Ok(None),
        s => parse_real(key, s).map(Some),
    }
}

impl Config {
    fn set(&mut self, key: &str, raw: &str) -> Result<(), UsageError> {
        match key {
            "experiment" => self.experiment = Some(raw.trim().parse()?),
            "seed" => self.seed = parse_int(key, raw)?,
            "replicas" => self.replicas = Some(parse_int(key, raw)?),
            "alpha" => self.alpha = Some(parse_real(key, raw)?),
            "beta" => self.beta = parse_real(key, raw)?,
            "radius" => self.radius = parse_real(key, raw)?,
            "t_min" => self.t_min = parse_optional_real(key, raw)?,
            "t_max" => self.t_max = parse_real(key, raw)?,
            "steps_per_unit_time" => self.steps_per_unit_time = parse_int(key, raw)?,
            "exit_margin" => self.exit_margin = parse_real(key, raw)?,
            "margin" => self.margin = parse_real(key, raw)?,
            "point_re" => self.point_re = parse_real(key, raw)?,
            "point_im" => self.point_im = parse_real(key, raw)?,
            "schedule_first" => self.schedule_first = parse_real(key, raw)?,
            "schedule_levels" => self.schedule_levels = parse_int(key, raw)?,
            "deltas" => self.deltas = Some(parse_list(key, raw, parse_real)?),
            "delta" => self.delta = parse_real(key, raw)?,
            "k_max" => self.k_max = parse_int(key, raw)?,
            "bridges" => self.bridges = parse_int(key, raw)?,
            "root_radius" => self.root_radius = parse_real(key, raw)?,
            "test_function" => {
                self.test_function = match raw.trim() {
                    "indicator" => TestFunctionKind::Indicator,
                    "bump" => TestFunctionKind::Bump,
                    other => return usage(format!("test_function: expected `indicator` or `bump`, got `{other}`")),
                }
            }
            "h_radius" => self.h_radius = parse_real(key, raw)?,
            "grid_n" => self.grid_n = Some(parse_int(key, raw)?),
            "beta_field" => {
                self.beta_field = match raw.trim() {
                    "constant" => BetaFieldKind::Constant,
                    "radial-step" => BetaFieldKind::RadialStep,
                    other => return usage(format!("beta_field: expected `constant` or `radial-step`, got `{other}`")),
                }
            }
            "beta_inner" => self.beta_inner = parse_real(key, raw)?,
            "beta_outer" => self.beta_outer = parse_real(key, raw)?,
            "beta_step_radius" => self.beta_step_radius = parse_real(key, raw)?,
            "exploratory_alpha" => self.exploratory_alpha = parse_optional_real(key, raw)?,
            "jackknife_groups" => self.jackknife_groups = parse_int(key, raw)?,
            "r_values" => self.r_values = parse_list(key, raw, parse_real)?,
            "n_values" => self.n_values = parse_list(key, raw, parse_int)?,
            "fourier_betas" => self.fourier_betas = parse_list(key, raw, parse_real)?,
            "fourier_terms" => self.fourier_terms = parse_int(key, raw)?,
            _ => return usage(format!("unknown configuration key `{key}`")),
        }
        Ok(())
    }

    /// Checks every constraint, naming the offending key.
    pub fn validate(&self) -> Result<(), UsageError> {
        fn require(ok: bool, key: &str, what: &str) -> Result<(), UsageError> {
            if ok {
                Ok(())
            } else {
                usage(format!("{key}: {what}"))
            }
        }
        if let Some(r) = self.replicas {
            require(r >= 1, "replicas", "must be at least 1")?;
        }
        if let Some(a) = self.alpha {
            require(a > 0.0, "alpha", "must be positive")?;
        }
        require((0.0..2.0 * PI).contains(&self.beta), "beta", "must lie in [0, 2π)")?;
        require(self.radius > 0.0, "radius", "must be positive")?;
        if let Some(t) = self.t_min {
            require(t > 0.0, "t_min", "must be positive")?;
            require(t < self.t_max, "t_min", "must be smaller than t_max")?;
        }
        require(self.t_max > 0.0, "t_max", "must be positive")?;
        require(self.steps_per_unit_time >= 2, "steps_per_unit_time", "must be at least 2")?;
        require((0.0..1.0).contains(&self.exit_margin), "exit_margin", "must lie in [0, 1)")?;
        require((0.0..1.0).contains(&self.margin), "margin", "must lie in [0, 1)")?;
        require(self.point().norm() < self.radius, "point_re", "the marked point must lie inside the domain")?;
        require(self.schedule_first > 0.0 && self.schedule_first < 1.0, "schedule_first", "must lie in (0, 1)")?;
        require(self.schedule_levels >= 1, "schedule_levels", "must be at least 1")?;
        if let Some(d) = &self.deltas {
            require(d.iter().all(|&x| x > 0.0 && x < 1.0), "deltas", "every scale must lie in (0, 1)")?;
            require(d.windows(2).all(|w| w[1] < w[0]), "deltas", "scales must be strictly decreasing")?;
        }
        require(self.delta > 0.0 && self.delta <= self.radius, "delta", "must lie in (0, radius]")?;
        require(self.k_max >= 1, "k_max", "must be at least 1")?;
        require(self.bridges >= 2, "bridges", "must be at least 2")?;
        require(self.root_radius > 0.0, "root_radius", "must be positive")?;
        require(self.h_radius > 0.0 && self.h_radius < self.radius, "h_radius", "must lie in (0, radius)")?;
        require(self.grid_n.is_none_or(|n| n >= 8), "grid_n", "must be at least 8")?;
        for (key, b) in [("beta_inner", self.beta_inner), ("beta_outer", self.beta_outer)] {
            require((0.0..2.0 * PI).contains(&b), key, "must lie in [0, 2π)")?;
        }
        require(self.beta_step_radius > 0.0, "beta_step_radius", "must be positive")?;
        if let Some(a) = self.exploratory_alpha {
            require(a > 0.0, "exploratory_alpha", "must be positive")?;
        }
        require(self.jackknife_groups >= 2, "jackknife_groups", "must be at least 2")?;
        require(self.r_values.iter().all(|&r| r > 0.0), "r_values", "radii must be positive")?;
        require(self.n_values.iter().all(|&n| n != 0), "n_values", "winding indices must be nonzero")?;
        require(
            self.fourier_betas.iter().all(|b| (0.0..2.0 * PI).contains(b)),
            "fourier_betas",
            "every β must lie in [0, 2π)",
        )?;
        require(self.fourier_terms >= 1, "fourier_terms", "must be at least 1")?;
        Ok(())
    }

    pub fn point(&self) -> PlanePoint {
        PlanePoint::new(self.point_re, self.point_im)
    }

    pub fn domain(&self) -> DiscDomain {
        DiscDomain::new(self.radius).expect("radius validated")
    }

    pub fn replicas_or(&self, default: usize) -> usize {
        self.replicas.unwrap_or(default)
    }

    pub fn alpha_or(&self, default: f64) -> f64 {
        self.alpha.unwrap_or(default)
    }

    /// The martingale schedule: explicit `deltas`, else `first · 2^{-n/2}`.
    pub fn schedule(&self) -> DeltaSchedule {
        match &self.deltas {
            Some(d) => DeltaSchedule::new(d.clone()),
            None => DeltaSchedule::geometric(self.schedule_first, self.schedule_levels),
        }
        .expect("schedule validated")
    }

    /// Soup parameters; `t_min` defaults to `(δ_min R)² / 100`.
    pub fn soup(&self, alpha: f64, smallest_scale: f64, replica_id: u64) -> SoupConfig {
        let reach = smallest_scale * self.radius;
        SoupConfig {
            alpha,
            domain: self.domain(),
            t_min: self.t_min.unwrap_or(reach * reach / 100.0),
            t_max: self.t_max,
            steps_per_unit_time: self.steps_per_unit_time,
            seed: self.seed,
            replica_id,
            exit_margin: self.exit_margin,
        }
    }

    pub fn beta_field(&self) -> BetaField {
        match self.beta_field {
            BetaFieldKind::Constant => BetaField::Constant(self.beta),
            BetaFieldKind::RadialStep => BetaField::RadialStep {
                inner: self.beta_inner,
                outer: self.beta_outer,
                radius: self.beta_step_radius,
            },
        }
    }

    /// A coarser grid turns the midpoint sum's diagonal terms, of size
    /// `cell² δ^{-2αa}`, into a spurious growth across the schedule.
    pub fn grid_size(&self) -> usize {
        self.grid_n
            .unwrap_or_else(|| (4.0 * self.h_radius / (self.schedule().smallest() * self.radius)).ceil() as usize)
            .max(8)
    }

    pub fn test_function(&self) -> windsoup_core::Result<TestFunction> {
        let n = self.grid_size();
        match self.test_function {
            TestFunctionKind::Indicator => TestFunction::indicator_disc(self.h_radius, n),
            TestFunctionKind::Bump => TestFunction::bump(self.h_radius, n),
        }
    }
}

/// Parses and validates configuration text; later lines override earlier ones.
pub fn parse_config(text: &str) -> Result<Config, UsageError> {
    let mut cfg = Config::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!("line {}: expected `key = value`, got `{line}`", lineno + 1));
        };
        let key = key.trim();
        cfg.set(key, value.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}
