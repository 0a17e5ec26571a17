//! The winding field `W_x`, its renormalized martingale and field integrals.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::geometry::PlanePoint;
use crate::sampler::LoopSoup;
use crate::stats::mc_mean_ci_complex;
use crate::winding::{analyze_point_at, PointWindings, WindingOptions};

/// Default containment margin, as a fraction of the ball scale.
pub const DEFAULT_MARGIN: f64 = 0.05;

/// `a(β) = β (2π - β) / 4π²`, the decay exponent of `E W` per unit intensity.
pub fn a_exponent(beta: f64) -> Result<f64> {
    if !(0.0..TAU).contains(&beta) {
        return Err(domain(format!("β must lie in [0, 2π), got {beta}")));
    }
    Ok(beta * (TAU - beta) / (4.0 * PI * PI))
}

/// A `[0, 2π)`-valued function on the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BetaField {
    Constant(f64),
    /// `inner` on `|x| < radius`, `outer` elsewhere.
    RadialStep { inner: f64, outer: f64, radius: f64 },
}

impl BetaField {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BetaField::Constant(b) => a_exponent(b).map(|_| ()),
            BetaField::RadialStep { inner, outer, radius } => {
                a_exponent(inner)?;
                a_exponent(outer)?;
                if !(radius > 0.0) {
                    return Err(domain("radial step radius must be positive"));
                }
                Ok(())
            }
        }
    }

    pub fn at(&self, x: PlanePoint) -> f64 {
        match *self {
            BetaField::Constant(b) => b,
            BetaField::RadialStep { inner, outer, radius } => {
                if x.norm() < radius {
                    inner
                } else {
                    outer
                }
            }
        }
    }
}

/// Strictly decreasing exclusion scales in `(0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaSchedule {
    scales: Vec<f64>,
}

impl DeltaSchedule {
    pub fn new(scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() {
            return Err(domain("schedule must contain at least one scale"));
        }
        if !(scales[0] < 1.0) || scales.iter().any(|&d| !(d > 0.0)) {
            return Err(domain("schedule scales must lie in (0, 1)"));
        }
        if scales.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(domain("schedule must be strictly decreasing"));
        }
        Ok(Self { scales })
    }

    /// `first * 2^{-n/2}` for `n = 0 .. levels`.
    pub fn geometric(first: f64, levels: usize) -> Result<Self> {
        Self::new((0..levels).map(|n| first * 2f64.powf(-(n as f64) / 2.0)).collect())
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn smallest(&self) -> f64 {
        *self.scales.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    /// Containment thresholds `δ_n (1 - margin)` on the pullback modulus.
    pub fn thresholds(&self, margin: f64) -> Vec<f64> {
        self.scales.iter().map(|d| d * (1.0 - margin)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }
}

impl Default for DeltaSchedule {
    fn default() -> Self {
        Self::geometric(0.5, 8).expect("default schedule is valid")
    }
}

/// Analysis settings for field quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldOptions {
    pub margin: f64,
    pub winding: WindingOptions,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self {
            margin: DEFAULT_MARGIN,
            winding: WindingOptions::default(),
        }
    }
}

/// `e^{iβ Σ k}` over the winding loops outside `B(x, δ)`.
pub fn w_from_windings(windings: &PointWindings, beta: f64, delta: f64, margin: f64) -> Complex64 {
    let turns = windings.total_turns(delta, margin);
    // Reduce before multiplying so large turn counts keep full phase accuracy.
    let phase = (beta * turns as f64) % TAU;
    Complex64::from_polar(1.0, phase)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("δ must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// `W_x^{β,δ,α}` for the soup realization.
pub fn w_at(soup: &LoopSoup, x: PlanePoint, beta: f64, delta: f64) -> Result<Complex64> {
    w_at_with(soup, x, beta, delta, &FieldOptions::default())
}

pub fn w_at_with(soup: &LoopSoup, x: PlanePoint, beta: f64, delta: f64, opts: &FieldOptions) -> Result<Complex64> {
    a_exponent(beta)?;
    check_delta(delta)?;
    let windings = analyze_point_at(soup, x, &opts.winding, &[delta * (1.0 - opts.margin)])?;
    Ok(w_from_windings(&windings, beta, delta, opts.margin))
}

/// `Z_{n,x} = δ_n^{-α a(β)} W_x^{β,δ_n,α}` along a schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleTrace {
    pub point: PlanePoint,
    pub beta: f64,
    pub alpha: f64,
    pub schedule: DeltaSchedule,
    pub z_values: Vec<Complex64>,
    pub ill_conditioned: usize,
}

impl MartingaleTrace {
    /// `z[n+1] / z[n]` for consecutive levels.
    pub fn ratios(&self) -> Vec<Complex64> {
        self.z_values.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

pub fn martingale_trace(
    soup: &LoopSoup,
    x: PlanePoint,
    beta: f64,
    alpha: f64,
    schedule: &DeltaSchedule,
) -> Result<MartingaleTrace> {
    martingale_trace_with(soup, x, beta, alpha, schedule, &FieldOptions::default())
}

pub fn martingale_trace_with(
    soup: &LoopSoup,
    x: PlanePoint,
    beta: f64,
    alpha: f64,
    schedule: &DeltaSchedule,
    opts: &FieldOptions,
) -> Result<MartingaleTrace> {
    if alpha != soup.config.alpha {
        return Err(domain(format!(
            "trace intensity {alpha} differs from the soup intensity {}",
            soup.config.alpha
        )));
    }
    let a = a_exponent(beta)?;
    let windings = analyze_point_at(soup, x, &opts.winding, &schedule.thresholds(opts.margin))?;
    let z_values = schedule
        .scales()
        .iter()
        .map(|&d| d.powf(-alpha * a) * w_from_windings(&windings, beta, d, opts.margin))
        .collect();
    Ok(MartingaleTrace {
        point: x,
        beta,
        alpha,
        schedule: schedule.clone(),
        z_values,
        ill_conditioned: windings.ill_conditioned,
    })
}

/// A bounded, compactly supported weight sampled on a square grid.
///
/// Each retained cell carries its centre and `∫_cell h dA`, obtained by an
/// 8×8 midpoint rule inside the cell, so discontinuous `h` keep an accurate
/// total mass.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub cells: Vec<(PlanePoint, f64)>,
    pub support_radius: f64,
    pub grid_n: usize,
}

const CELL_SUBSAMPLES: usize = 8;

impl TestFunction {
    /// Samples `h` on `grid_n × grid_n` cells covering `[-ρ, ρ]²`; `h` must vanish
    /// outside the disc of radius `ρ`.
    pub fn from_fn(support_radius: f64, grid_n: usize, h: impl Fn(PlanePoint) -> f64) -> Result<Self> {
        if grid_n < 8 {
            return Err(domain(format!("grid_n must be >= 8, got {grid_n}")));
        }
        if !(support_radius > 0.0) {
            return Err(domain("support radius must be positive"));
        }
        let side = 2.0 * support_radius / grid_n as f64;
        let sub = side / CELL_SUBSAMPLES as f64;
        let mut cells = Vec::new();
        for i in 0..grid_n {
            for j in 0..grid_n {
                let x0 = -support_radius + i as f64 * side;
                let y0 = -support_radius + j as f64 * side;
                let mut acc = 0.0;
                for a in 0..CELL_SUBSAMPLES {
                    for b in 0..CELL_SUBSAMPLES {
                        acc += h(PlanePoint::new(x0 + (a as f64 + 0.5) * sub, y0 + (b as f64 + 0.5) * sub));
                    }
                }
                let weight = acc * sub * sub;
                if weight != 0.0 {
                    cells.push((PlanePoint::new(x0 + 0.5 * side, y0 + 0.5 * side), weight));
                }
            }
        }
        Ok(Self {
            cells,
            support_radius,
            grid_n,
        })
    }

    /// Indicator of the centred disc of the given radius.
    pub fn indicator_disc(radius: f64, grid_n: usize) -> Result<Self> {
        Self::from_fn(radius, grid_n, |x| if x.norm() < radius { 1.0 } else { 0.0 })
    }

    /// `exp(1 - 1/(1 - |x|²/ρ²))` inside the disc of radius `ρ`, zero outside.
    pub fn bump(radius: f64, grid_n: usize) -> Result<Self> {
        Self::from_fn(radius, grid_n, |x| {
            let s = x.norm_sqr() / (radius * radius);
            if s < 1.0 {
                (1.0 - 1.0 / (1.0 - s)).exp()
            } else {
                0.0
            }
        })
    }

    /// `∫ h dA` by the same quadrature.
    pub fn mass(&self) -> f64 {
        self.cells.iter().map(|c| c.1).sum()
    }
}

fn field_cells(soup: &LoopSoup, h: &TestFunction, betafield: &BetaField, alpha: f64) -> Result<()> {
    betafield.validate()?;
    if !(h.support_radius < soup.config.domain.radius()) {
        return Err(domain(format!(
            "test function support radius {} reaches the domain boundary",
            h.support_radius
        )));
    }
    if alpha != soup.config.alpha {
        return Err(domain("field intensity differs from the soup intensity"));
    }
    Ok(())
}

/// `∫ h(x) δ^{-α a(β_x)} W_x dA(x)` on one soup realization.
pub fn field_integral(soup: &LoopSoup, h: &TestFunction, betafield: &BetaField, alpha: f64, delta: f64) -> Result<Complex64> {
    check_delta(delta)?;
    let schedule = DeltaSchedule::new(vec![delta])?;
    Ok(field_integral_schedule(soup, h, betafield, alpha, &schedule, &FieldOptions::default())?[0])
}

/// Field integrals at every level of a schedule, sharing one winding analysis per cell.
pub fn field_integral_schedule(
    soup: &LoopSoup,
    h: &TestFunction,
    betafield: &BetaField,
    alpha: f64,
    schedule: &DeltaSchedule,
    opts: &FieldOptions,
) -> Result<Vec<Complex64>> {
    field_cells(soup, h, betafield, alpha)?;
    let thresholds = schedule.thresholds(opts.margin);
    let per_cell: Vec<Vec<Complex64>> = h
        .cells
        .par_iter()
        .map(|&(x, weight)| {
            let beta = betafield.at(x);
            let a = a_exponent(beta)?;
            if beta == 0.0 {
                return Ok(vec![Complex64::new(weight, 0.0); schedule.len()]);
            }
            let windings = analyze_point_at(soup, x, &opts.winding, &thresholds)?;
            Ok(schedule
                .scales()
                .iter()
                .map(|&d| weight * d.powf(-alpha * a) * w_from_windings(&windings, beta, d, opts.margin))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut totals = vec![Complex64::new(0.0, 0.0); schedule.len()];
    for cell in per_cell {
        for (t, v) in totals.iter_mut().zip(cell) {
            *t += v;
        }
    }
    Ok(totals)
}

/// Replicate mean of a field integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldEstimate {
    pub value: Complex64,
    /// Standard error of the mean, combining both components.
    pub stderr: f64,
    pub n_grid: usize,
    pub n_replicas: usize,
}

impl FieldEstimate {
    pub fn from_replicas(values: &[Complex64], n_grid: usize) -> Result<Self> {
        let (re, im) = mc_mean_ci_complex(values)?;
        Ok(Self {
            value: Complex64::new(re.mean, im.mean),
            stderr: re.stderr.hypot(im.stderr),
            n_grid,
            n_replicas: values.len(),
        })
    }
}
