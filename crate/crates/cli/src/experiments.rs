//! The experiments behind each subcommand.
//!
//! Every experiment computes its replicas in parallel, collects them in
//! replica order and only then formats tables, so output bytes never depend
//! on the number of workers.

use std::f64::consts::PI;

use anyhow::Result;
use num_complex::Complex64;
use rayon::prelude::*;
use windsoup_core::exact::{
    contour_radial_kernel, expected_w, fourier_identity_partial, lemma1_value, lemma2_mean, radial_winding_mass,
    winding_pmf_contour, winding_pmf_fourier, Representation,
};
use windsoup_core::field::{a_exponent, field_integral_schedule, martingale_trace_with, w_from_windings, FieldOptions};
use windsoup_core::geometry::PlanePoint;
use windsoup_core::rng::RngStream;
use windsoup_core::sampler::{sample_bridge, sample_soup, sample_soup_focused, uniform_in_disc, Focus};
use windsoup_core::stats::{
    grouped_jackknife, independence_corr, linear_fit, loglog_slope_fit, mc_mean_ci, poisson_fit_test, EstimateWithError,
};
use windsoup_core::winding::{analyze_point_at, resolve_winding, ResolveOptions, WindingOptions};
use windsoup_core::{DiscDomain, Error, LoopSoup};

use crate::config::{BetaFieldKind, Config, Experiment};
use crate::report::{num, Check, Outcome, Provenance, Summary, Table, Z_THRESHOLD};

/// Runs `f` for replicas `0..n` on the current rayon pool, in replica order.
fn replicas<T: Send>(n: usize, f: impl Fn(u64) -> windsoup_core::Result<T> + Sync) -> Result<Vec<T>> {
    Ok((0..n as u64).into_par_iter().map(&f).collect::<windsoup_core::Result<Vec<T>>>()?)
}

pub fn run(experiment: Experiment, cfg: &Config) -> Result<Outcome> {
    match experiment {
        Experiment::VerifyLemma1 => verify_lemma1(cfg),
        Experiment::VerifyLemma2 => verify_lemma2(cfg),
        Experiment::VerifyLemma3 => verify_lemma3(cfg),
        Experiment::MartingaleScan => martingale_scan(cfg),
        Experiment::FieldMoments => field_moments(cfg),
        Experiment::ExactTables => exact_tables(cfg),
        Experiment::SoupDump => soup_dump(cfg),
    }
}

fn windings(k_max: i64) -> Vec<i64> {
    (-k_max..=k_max).filter(|&k| k != 0).collect()
}

struct BridgeBatch {
    bridges: u64,
    /// Counts for windings `-k_max..=k_max` without zero.
    counts: Vec<u64>,
    ill_conditioned: u64,
}

/// Unit-duration bridges rooted uniformly on a disc; counts windings around 0.
fn bridge_batch(cfg: &Config, batch: u64, n: u64) -> windsoup_core::Result<BridgeBatch> {
    let ks = windings(cfg.k_max);
    let mut rng = RngStream::for_replica(cfg.seed, batch);
    let steps = cfg.soup(1.0, 1.0, batch).steps_for(1.0);
    let origin = PlanePoint::ORIGIN;
    let roots = DiscDomain::new(cfg.root_radius)?;
    let resolve = ResolveOptions::default();
    let mut out = BridgeBatch {
        bridges: n,
        counts: vec![0; ks.len()],
        ill_conditioned: 0,
    };
    for _ in 0..n {
        let root = uniform_in_disc(&roots, &mut rng);
        let bridge = sample_bridge(root, 1.0, steps, &mut rng);
        // Far from the origin the polygon cannot wind around it and is never refined.
        if !bridge.bbox().contains_padded(origin, resolve.sigmas * bridge.max_step_sigma()) {
            continue;
        }
        let turns = match resolve_winding(&bridge, origin, &resolve, &mut rng) {
            Ok(w) => w.turns,
            Err(Error::PointOnPath { .. }) | Err(Error::Numerical(_)) => {
                out.ill_conditioned += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some(i) = ks.iter().position(|&k| k == turns) {
            out.counts[i] += 1;
        }
    }
    Ok(out)
}

fn verify_lemma1(cfg: &Config) -> Result<Outcome> {
    let batches = cfg.replicas_or(100);
    let per_batch = cfg.bridges.div_ceil(batches as u64);
    let results = replicas(batches, |b| bridge_batch(cfg, b, per_batch))?;
    let ks = windings(cfg.k_max);

    let mut table = Table::new("verify_lemma1.csv", &["replica_id", "k", "count", "bridges"]);
    for (b, r) in results.iter().enumerate() {
        for (k, c) in ks.iter().zip(&r.counts) {
            table.push(vec![b.to_string(), k.to_string(), c.to_string(), r.bridges.to_string()]);
        }
    }

    // Each bridge contributes (area / 2π) · 1{n = k}: uniform roots weighted by p_1(x, x).
    let total: u64 = results.iter().map(|r| r.bridges).sum();
    let weight = cfg.root_radius * cfg.root_radius / 2.0;
    let mut checks = Vec::new();
    for k in 1..=cfg.k_max {
        let i = ks.iter().position(|&j| j == k).expect("k in range");
        let hits: u64 = results.iter().map(|r| r.counts[i]).sum();
        let nf = total as f64;
        let p = hits as f64 / nf;
        let est = EstimateWithError {
            mean: weight * p,
            stderr: weight * (p * (1.0 - p) / (nf - 1.0)).sqrt(),
            n: total as usize,
        };
        checks.push(
            Check::statistical(format!("area mass of winding {k} vs 1/(2π²k²)"), est, lemma1_value(k)?, Provenance::PaperFormula)
                .with_relative_tolerance(0.05),
        );
        checks.push(Check::statistical(
            format!("area mass of winding {k} vs radial contour integral"),
            est,
            contour_radial_kernel(k)?,
            Provenance::DerivedOracle,
        ));
    }
    let ill: u64 = results.iter().map(|r| r.ill_conditioned).sum();
    let summary = Summary::new(Experiment::VerifyLemma1, cfg, batches, checks)
        .note(format!("{total} unit bridges, roots uniform on the disc of radius {}", cfg.root_radius))
        .note(format!("{ill} bridges dropped as ill-conditioned (origin on the refined path)"));
    Ok(Outcome {
        tables: vec![table],
        summary,
    })
}

fn soup_for(cfg: &Config, alpha: f64, smallest: f64, focus: &Focus, id: u64) -> windsoup_core::Result<LoopSoup> {
    let soup_cfg = cfg.soup(alpha, smallest, id);
    sample_soup_focused(&soup_cfg, focus, &mut soup_cfg.rng())
}

fn verify_lemma2(cfg: &Config) -> Result<Outcome> {
    let n = cfg.replicas_or(10_000);
    let alpha = cfg.alpha_or(2.0);
    let x = cfg.point();
    let scale = cfg.delta / cfg.radius;
    let ks = windings(cfg.k_max);
    let opts = WindingOptions::default();
    let spectra = replicas(n, |id| {
        let soup = soup_for(cfg, alpha, scale, &Focus::point(x), id)?;
        let spectrum = analyze_point_at(&soup, x, &opts, &[scale * (1.0 - cfg.margin)])?.spectrum(scale, cfg.margin);
        Ok((ks.iter().map(|&k| spectrum.count(k)).collect::<Vec<u64>>(), spectrum.ill_conditioned))
    })?;

    let mut table = Table::new("verify_lemma2.csv", &["replica_id", "k", "count"]);
    for (id, (counts, _)) in spectra.iter().enumerate() {
        for (k, c) in ks.iter().zip(counts) {
            table.push(vec![id.to_string(), k.to_string(), c.to_string()]);
        }
    }

    let mut checks = Vec::new();
    for k in 1..=cfg.k_max {
        let i = ks.iter().position(|&j| j == k).expect("k in range");
        let counts: Vec<u64> = spectra.iter().map(|s| s.0[i]).collect();
        let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let est = mc_mean_ci(&xs)?;
        let reference = lemma2_mean(alpha, cfg.radius, cfg.delta, k)?;
        checks.push(Check::statistical(
            format!("mean count of winding {k} loops"),
            est,
            reference,
            Provenance::PaperFormula,
        ));
        // Dispersion test: the variance of a Poisson count equals its mean.
        let fit = poisson_fit_test(&counts, est.mean.max(f64::MIN_POSITIVE))?;
        let stderr = if fit.variance_z != 0.0 {
            (fit.sample_variance - fit.sample_mean) / fit.variance_z
        } else {
            0.0
        };
        let mut c = Check::statistical(
            format!("Poisson variance of winding {k} counts"),
            EstimateWithError {
                mean: fit.sample_variance,
                stderr: stderr.abs(),
                n: counts.len(),
            },
            fit.sample_mean,
            Provenance::DerivedOracle,
        );
        c.z_score = Some(fit.variance_z);
        c.pass = fit.variance_z.abs() < Z_THRESHOLD;
        checks.push(c);
    }
    let ill: usize = spectra.iter().map(|s| s.1).sum();
    let summary = Summary::new(Experiment::VerifyLemma2, cfg, n, checks)
        .note(format!("alpha = {alpha}, R = {}, delta = {}", cfg.radius, cfg.delta))
        .note(format!("{ill} loop evaluations dropped as ill-conditioned"));
    Ok(Outcome {
        tables: vec![table],
        summary,
    })
}

fn lemma3_deltas(cfg: &Config) -> Vec<f64> {
    cfg.deltas.clone().unwrap_or_else(|| vec![0.5, 0.35, 0.25, 0.18, 0.125])
}

fn verify_lemma3(cfg: &Config) -> Result<Outcome> {
    let n = cfg.replicas_or(10_000);
    let alpha = cfg.alpha_or(1.0);
    let x = cfg.point();
    let deltas = lemma3_deltas(cfg);
    let smallest = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let thresholds: Vec<f64> = deltas.iter().map(|d| d * (1.0 - cfg.margin)).collect();
    let opts = FieldOptions {
        margin: cfg.margin,
        ..FieldOptions::default()
    };
    let ws = replicas(n, |id| {
        let soup = soup_for(cfg, alpha, smallest, &Focus::point(x), id)?;
        let pw = analyze_point_at(&soup, x, &opts.winding, &thresholds)?;
        Ok(deltas
            .iter()
            .map(|&d| w_from_windings(&pw, cfg.beta, d, opts.margin))
            .collect::<Vec<Complex64>>())
    })?;

    let mut table = Table::new("verify_lemma3.csv", &["replica_id", "delta", "re_w", "im_w"]);
    for (id, row) in ws.iter().enumerate() {
        for (d, w) in deltas.iter().zip(row) {
            table.push(vec![id.to_string(), num(*d), num(w.re), num(w.im)]);
        }
    }

    let mut checks = Vec::new();
    let mut means = Vec::new();
    for (j, &d) in deltas.iter().enumerate() {
        let re: Vec<f64> = ws.iter().map(|r| r[j].re).collect();
        let im: Vec<f64> = ws.iter().map(|r| r[j].im).collect();
        let re_est = mc_mean_ci(&re)?;
        checks.push(Check::statistical(
            format!("Re E[W] at delta = {d}"),
            re_est,
            expected_w(alpha, cfg.beta, d)?,
            Provenance::PaperFormula,
        ));
        checks.push(Check::statistical(
            format!("Im E[W] at delta = {d}"),
            mc_mean_ci(&im)?,
            0.0,
            Provenance::DerivedOracle,
        ));
        means.push((d, re_est.mean));
    }
    let exponent = alpha * a_exponent(cfg.beta)?;
    if deltas.len() >= 3 && means.iter().all(|m| m.1 > 0.0) {
        let fit = loglog_slope_fit(&means)?;
        let mut c = Check::statistical(
            "log-log slope of Re E[W] in delta",
            EstimateWithError {
                mean: fit.slope,
                stderr: fit.stderr,
                n: means.len(),
            },
            exponent,
            Provenance::PaperFormula,
        );
        c.tolerance = Some(0.05 * exponent);
        c.pass = (fit.slope - exponent).abs() <= 0.05 * exponent;
        checks.push(c);
    }
    let summary = Summary::new(Experiment::VerifyLemma3, cfg, n, checks)
        .note(format!("alpha = {alpha}, beta = {}, a(beta) = {}", cfg.beta, a_exponent(cfg.beta)?));
    Ok(Outcome {
        tables: vec![table],
        summary,
    })
}

fn martingale_scan(cfg: &Config) -> Result<Outcome> {
    let n = cfg.replicas_or(10_000);
    let alpha = cfg.alpha_or(1.0);
    let x = cfg.point();
    let schedule = cfg.schedule();
    let opts = FieldOptions {
        margin: cfg.margin,
        ..FieldOptions::default()
    };
    let traces = replicas(n, |id| {
        let soup = soup_for(cfg, alpha, schedule.smallest(), &Focus::point(x), id)?;
        martingale_trace_with(&soup, x, cfg.beta, alpha, &schedule, &opts)
    })?;

    let mut table = Table::new("martingale_scan.csv", &["replica_id", "level", "delta", "re_z", "im_z"]);
    for (id, tr) in traces.iter().enumerate() {
        for (level, (d, z)) in schedule.scales().iter().zip(&tr.z_values).enumerate() {
            table.push(vec![id.to_string(), level.to_string(), num(*d), num(z.re), num(z.im)]);
        }
    }

    let mut checks = Vec::new();
    for (level, &d) in schedule.scales().iter().enumerate() {
        let re: Vec<f64> = traces.iter().map(|t| t.z_values[level].re).collect();
        let im: Vec<f64> = traces.iter().map(|t| t.z_values[level].im).collect();
        checks.push(Check::statistical(
            format!("E[Z] at level {level} (delta = {d:.5})"),
            mc_mean_ci(&re)?,
            1.0,
            Provenance::PaperFormula,
        ));
        checks.push(
            Check::statistical(
                format!("Im E[Z] at level {level}"),
                mc_mean_ci(&im)?,
                0.0,
                Provenance::DerivedOracle,
            )
            .ungated(),
        );
    }
    // Increments over disjoint annuli are driven by disjoint loop sets.
    let increments: Vec<Vec<f64>> = traces.iter().map(|t| t.ratios().iter().map(|r| r.re).collect()).collect();
    for j in 0..schedule.len().saturating_sub(2) {
        let a: Vec<f64> = increments.iter().map(|r| r[j]).collect();
        let b: Vec<f64> = increments.iter().map(|r| r[j + 1]).collect();
        match independence_corr(&a, &b) {
            Ok(corr) => {
                let stderr = 1.0 / (n as f64 - 3.0).sqrt();
                let mut c = Check::statistical(
                    format!("correlation of increments {j}->{} and {}->{}", j + 1, j + 1, j + 2),
                    EstimateWithError {
                        mean: corr.r,
                        stderr,
                        n,
                    },
                    0.0,
                    Provenance::DerivedOracle,
                );
                c.z_score = Some(corr.z);
                c.pass = corr.z.abs() < Z_THRESHOLD;
                checks.push(c);
            }
            // A constant increment (no loop ever crossed the annulus) carries no correlation.
            Err(Error::Precision(msg)) if msg.contains("constant") => {}
            Err(e) => return Err(e.into()),
        }
    }
    let ill: usize = traces.iter().map(|t| t.ill_conditioned).sum();
    let summary = Summary::new(Experiment::MartingaleScan, cfg, n, checks)
        .note(format!("alpha = {alpha}, beta = {}", cfg.beta))
        .note("increments are Re(Z_{n+1} / Z_n); |Z_{n+1} / Z_n| is deterministic")
        .note(format!("{ill} loop evaluations dropped as ill-conditioned"));
    Ok(Outcome {
        tables: vec![table],
        summary,
    })
}

/// Replica variance `E|X - EX|²` of a complex sample.
fn complex_variance(values: &[Complex64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<Complex64>() / n;
    values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1.0)
}

fn variance_slope(rows: &[Vec<Complex64>]) -> f64 {
    let levels = rows[0].len();
    let xs: Vec<f64> = (0..levels).map(|l| l as f64).collect();
    let ys: Vec<f64> = (0..levels)
        .map(|l| complex_variance(&rows.iter().map(|r| r[l]).collect::<Vec<_>>()))
        .collect();
    linear_fit(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN)
}

fn field_run(cfg: &Config, alpha: f64, n: usize, file_name: &str, gated: bool) -> Result<(Table, Vec<Check>, Vec<String>)> {
    let schedule = cfg.schedule();
    let h = cfg.test_function()?;
    let beta = cfg.beta_field();
    let reach = h.cells.iter().map(|c| c.0.norm()).fold(0.0, f64::max);
    let focus = Focus::disc(PlanePoint::ORIGIN, reach);
    let opts = FieldOptions {
        margin: cfg.margin,
        ..FieldOptions::default()
    };
    let values = replicas(n, |id| {
        let soup = soup_for(cfg, alpha, schedule.smallest(), &focus, id)?;
        field_integral_schedule(&soup, &h, &beta, alpha, &schedule, &opts)
    })?;

    let mut table = Table::new(file_name, &["replica_id", "level", "delta", "re", "im"]);
    for (id, row) in values.iter().enumerate() {
        for (level, (d, v)) in schedule.scales().iter().zip(row).enumerate() {
            table.push(vec![id.to_string(), level.to_string(), num(*d), num(v.re), num(v.im)]);
        }
    }

    let tag = if gated { String::new() } else { format!(" [alpha = {alpha}]") };
    let mut checks = Vec::new();
    for (level, &d) in schedule.scales().iter().enumerate() {
        let re: Vec<f64> = values.iter().map(|r| r[level].re).collect();
        checks.push(
            Check::statistical(
                format!("E[∫hZ] at level {level} (delta = {d:.5}){tag}"),
                mc_mean_ci(&re)?,
                h.mass(),
                Provenance::PaperFormula,
            )
            .ungated(),
        );
    }
    if schedule.len() >= 3 {
        let (slope, stderr) = grouped_jackknife(&values, cfg.jackknife_groups, variance_slope);
        let mut c = Check::statistical(
            format!("slope of Var[∫hZ] across levels{tag}"),
            EstimateWithError {
                mean: slope,
                stderr,
                n,
            },
            0.0,
            Provenance::DerivedOracle,
        );
        // One-sided: only a significant increase counts against boundedness.
        c.pass = slope <= Z_THRESHOLD * stderr;
        c.gated = gated;
        checks.push(c);
    }
    let variances: Vec<String> = (0..schedule.len())
        .map(|level| num(complex_variance(&values.iter().map(|r| r[level]).collect::<Vec<_>>())))
        .collect();
    let mut notes = vec![format!("alpha = {alpha}: Var[∫hZ] by level = [{}]", variances.join(", "))];
    if let (BetaFieldKind::Constant, true) = (cfg.beta_field, schedule.len() >= 3) {
        // Near-diagonal pairs add increments of order δ^{2 - 2αa} per level.
        let p = 2.0 - 2.0 * alpha * a_exponent(cfg.beta)?;
        if p > 0.0 {
            let xs: Vec<f64> = schedule.scales().iter().map(|d| d.powf(p)).collect();
            let limit = |rows: &[Vec<Complex64>]| {
                let ys: Vec<f64> = (0..xs.len())
                    .map(|l| complex_variance(&rows.iter().map(|r| r[l]).collect::<Vec<_>>()))
                    .collect();
                linear_fit(&xs, &ys).map(|f| f.intercept).unwrap_or(f64::NAN)
            };
            let (v, se) = grouped_jackknife(&values, cfg.jackknife_groups, limit);
            notes.push(format!(
                "alpha = {alpha}: Var[∫hZ] extrapolated to delta -> 0, linear in delta^{p}: {v:.5} ± {se:.5}"
            ));
        }
    }
    Ok((table, checks, notes))
}

fn field_moments(cfg: &Config) -> Result<Outcome> {
    let n = cfg.replicas_or(1000);
    let alpha = cfg.alpha_or(2.0);
    let (table, mut checks, mut notes) = field_run(cfg, alpha, n, "field_moments.csv", true)?;
    let mut tables = vec![table];
    if let Some(a) = cfg.exploratory_alpha {
        let (t, c, more) = field_run(cfg, a, n, "field_moments_exploratory.csv", false)?;
        tables.push(t);
        checks.extend(c.into_iter().map(Check::ungated));
        notes.extend(more);
    }
    let h = cfg.test_function()?;
    let mut summary = Summary::new(Experiment::FieldMoments, cfg, n, checks)
        .note(format!("alpha = {alpha}; test function mass {} on a {}×{} grid", h.mass(), cfg.grid_size(), cfg.grid_size()))
        .note("variance trend standard error from a grouped jackknife over replicas");
    summary.notes.extend(notes);
    Ok(Outcome { tables, summary })
}

fn exact_tables(cfg: &Config) -> Result<Outcome> {
    let ks: Vec<i64> = cfg.n_values.iter().filter(|&&k| k > 0).copied().collect();
    let radial = ks
        .par_iter()
        .map(|&k| {
            Ok((
                k,
                lemma1_value(k)?,
                radial_winding_mass(Representation::Contour, k)?,
                radial_winding_mass(Representation::Fourier, k)?,
                contour_radial_kernel(k)?,
            ))
        })
        .collect::<windsoup_core::Result<Vec<_>>>()?;
    let mut lemma1 = Table::new(
        "lemma1.csv",
        &["k", "lemma1_value", "radial_contour", "radial_fourier", "radial_closed_form"],
    );
    let mut checks = Vec::new();
    for &(k, paper, contour, fourier, kernel) in &radial {
        lemma1.push(vec![k.to_string(), num(paper), num(contour), num(fourier), num(kernel)]);
        for (rep, v) in [("contour", contour), ("Fourier", fourier)] {
            checks.push(Check::deterministic(
                format!("2π∫r pmf({k}, r) dr ({rep}) vs 1/(2π²k²)"),
                v,
                paper,
                1e-5,
                Provenance::PaperFormula,
            ));
            checks.push(Check::deterministic(
                format!("2π∫r pmf({k}, r) dr ({rep}) vs closed-form radial kernel"),
                v,
                kernel,
                1e-8,
                Provenance::DerivedOracle,
            ));
        }
        checks.push(Check::deterministic(
            format!("closed-form radial kernel for k = {k} vs 1/(4π²k²)"),
            kernel,
            1.0 / (4.0 * PI * PI * (k * k) as f64),
            1e-10,
            Provenance::DerivedOracle,
        ));
    }

    let grid: Vec<(i64, f64)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| cfg.r_values.iter().map(move |&r| (n, r)))
        .collect();
    let pmfs = grid
        .par_iter()
        .map(|&(n, r)| Ok((winding_pmf_contour(n, r)?, winding_pmf_fourier(n, r)?)))
        .collect::<windsoup_core::Result<Vec<_>>>()?;
    let mut pmf_table = Table::new("winding_pmf.csv", &["n", "r", "contour", "fourier", "abs_diff"]);
    for (&(n, r), &(c, f)) in grid.iter().zip(&pmfs) {
        pmf_table.push(vec![n.to_string(), num(r), num(c), num(f), num((c - f).abs())]);
        checks.push(Check::deterministic(
            format!("contour vs Fourier pmf at n = {n}, r = {r}"),
            c,
            f,
            1e-6,
            Provenance::DerivedOracle,
        ));
    }

    let mut fourier = Table::new("fourier_identity.csv", &["beta", "terms", "partial_sum", "a_beta"]);
    for &b in &cfg.fourier_betas {
        let partial = fourier_identity_partial(b, cfg.fourier_terms);
        let a = a_exponent(b)?;
        fourier.push(vec![num(b), cfg.fourier_terms.to_string(), num(partial), num(a)]);
        checks.push(Check::deterministic(
            format!("Fourier series for a(β) at β = {b:.6}"),
            partial,
            a,
            1e-5,
            Provenance::PaperFormula,
        ));
    }
    let summary = Summary::new(Experiment::ExactTables, cfg, 1, checks)
        .note("radial masses integrate the rooted winding mass of the unit-duration bridge measure");
    Ok(Outcome {
        tables: vec![lemma1, pmf_table, fourier],
        summary,
    })
}

fn soup_dump(cfg: &Config) -> Result<Outcome> {
    let n = cfg.replicas_or(1);
    let alpha = cfg.alpha_or(1.0);
    let soups = replicas(n, |id| {
        let soup_cfg = cfg.soup(alpha, cfg.delta / cfg.radius, id);
        sample_soup(&soup_cfg, &mut soup_cfg.rng())
    })?;
    let mut loops = Table::new(
        "soup_loops.csv",
        &["replica_id", "loop_id", "root_re", "root_im", "duration", "steps"],
    );
    let mut vertices = Table::new("soup_dump.csv", &["replica_id", "loop_id", "vertex", "time", "re", "im"]);
    for (id, soup) in soups.iter().enumerate() {
        for (li, lp) in soup.loops.iter().enumerate() {
            loops.push(vec![
                id.to_string(),
                li.to_string(),
                num(lp.root().re),
                num(lp.root().im),
                num(lp.duration()),
                (lp.vertices().len() - 1).to_string(),
            ]);
            for (vi, (v, t)) in lp.vertices().iter().zip(lp.times()).enumerate() {
                vertices.push(vec![id.to_string(), li.to_string(), vi.to_string(), num(*t), num(v.re), num(v.im)]);
            }
        }
    }
    let drawn: u64 = soups.iter().map(|s| s.candidates_drawn).sum();
    let kept: usize = soups.iter().map(|s| s.accepted()).sum();
    let summary = Summary::new(Experiment::SoupDump, cfg, n, Vec::new())
        .note(format!("{drawn} candidates drawn, {kept} loops kept inside the domain"));
    Ok(Outcome {
        tables: vec![vertices, loops],
        summary,
    })
}
