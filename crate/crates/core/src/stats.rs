//! Estimators, Poisson goodness of fit, slope fits and correlation tests.

use num_complex::Complex64;

use crate::error::{domain, precision, Result};

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateWithError<T> {
    pub mean: T,
    pub stderr: f64,
    pub n: usize,
}

impl EstimateWithError<f64> {
    /// `(mean - reference) / stderr`; infinite when the stderr vanishes and the mean differs.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = self.mean - reference;
        if diff == 0.0 {
            0.0
        } else {
            diff / self.stderr
        }
    }
}

/// Streaming sums for mean and variance; merges are associative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(mut self, other: Moments) -> Moments {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn variance(&self) -> f64 {
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }
}

/// Mean and `sd / sqrt(n)` of a real sample (two-pass).
pub fn mc_mean_ci(samples: &[f64]) -> Result<EstimateWithError<f64>> {
    let n = samples.len();
    if n < 2 {
        return Err(precision(format!("need at least 2 samples, got {n}")));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    Ok(EstimateWithError {
        mean,
        stderr: sd / (n as f64).sqrt(),
        n,
    })
}

/// Mean of a complex sample with the standard error of each component.
pub fn mc_mean_ci_complex(samples: &[Complex64]) -> Result<(EstimateWithError<f64>, EstimateWithError<f64>)> {
    let re: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let im: Vec<f64> = samples.iter().map(|z| z.im).collect();
    Ok((mc_mean_ci(&re)?, mc_mean_ci(&im)?))
}

/// Standardized deviations of a count sample from a Poisson law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonFit {
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub mean_z: f64,
    pub variance_z: f64,
}

/// Compares the sample mean and variance with Poisson(`mean`).
///
/// Under the hypothesis the sample variance has variance
/// `(μ₄ - σ⁴ (n-3)/(n-1)) / n` with `σ² = λ`, `μ₄ = λ + 3λ²`.
pub fn poisson_fit_test(counts: &[u64], mean: f64) -> Result<PoissonFit> {
    let n = counts.len();
    if n < 100 {
        return Err(precision(format!("need at least 100 counts, got {n}")));
    }
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(precision(format!("hypothesized mean must be positive, got {mean}")));
    }
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let est = mc_mean_ci(&xs)?;
    let nf = n as f64;
    let sample_variance = est.stderr * est.stderr * nf;
    let lambda = mean;
    let var_of_var = (lambda + 3.0 * lambda * lambda - lambda * lambda * (nf - 3.0) / (nf - 1.0)) / nf;
    Ok(PoissonFit {
        sample_mean: est.mean,
        sample_variance,
        mean_z: (est.mean - lambda) / (lambda / nf).sqrt(),
        variance_z: (sample_variance - lambda) / var_of_var.sqrt(),
    })
}

/// Least-squares line through `(log scale, log value)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

pub fn loglog_slope_fit(pairs: &[(f64, f64)]) -> Result<SlopeFit> {
    if pairs.len() < 3 {
        return Err(precision(format!("need at least 3 points, got {}", pairs.len())));
    }
    if let Some(&(s, v)) = pairs.iter().find(|&&(s, v)| !(s > 0.0 && v > 0.0)) {
        return Err(domain(format!("log-log fit needs positive data, got ({s}, {v})")));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    linear_fit(&xs, &ys)
}

/// Ordinary least squares `y = a + b x` with the usual slope standard error.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return Err(precision("linear fit needs at least 3 paired points"));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(precision("linear fit needs distinct abscissae"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    Ok(SlopeFit {
        slope,
        stderr: (ssr / (nf - 2.0) / sxx).sqrt(),
        intercept,
    })
}

/// Pearson correlation with its Fisher-z significance `atanh(r) sqrt(n - 3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub z: f64,
}

pub fn independence_corr(x: &[f64], y: &[f64]) -> Result<Correlation> {
    let n = x.len();
    if n != y.len() {
        return Err(precision("correlation needs samples of equal length"));
    }
    if n < 100 {
        return Err(precision(format!("need at least 100 pairs, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(precision("correlation undefined for a constant sample"));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(Correlation {
        r,
        z: r.atanh() * (nf - 3.0).sqrt(),
    })
}

/// Leave-one-out jackknife of a statistic of a sample.
pub fn jackknife<T: Clone>(samples: &[T], stat: impl Fn(&[T]) -> f64) -> (f64, f64) {
    let n = samples.len();
    let full = stat(samples);
    let mut buf: Vec<T> = Vec::with_capacity(n.saturating_sub(1));
    let leave_out: Vec<f64> = (0..n)
        .map(|i| {
            buf.clear();
            buf.extend_from_slice(&samples[..i]);
            buf.extend_from_slice(&samples[i + 1..]);
            stat(&buf)
        })
        .collect();
    let mean = leave_out.iter().sum::<f64>() / n as f64;
    let var = leave_out.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() * (n - 1) as f64 / n as f64;
    (full, var.sqrt())
}

/// Delete-a-group jackknife: `groups` contiguous blocks are left out in turn.
pub fn grouped_jackknife<T: Clone>(samples: &[T], groups: usize, stat: impl Fn(&[T]) -> f64) -> (f64, f64) {
    let n = samples.len();
    let g = groups.clamp(2, n);
    let full = stat(samples);
    let bounds: Vec<usize> = (0..=g).map(|i| i * n / g).collect();
    let mut buf: Vec<T> = Vec::with_capacity(n);
    let leave_out: Vec<f64> = bounds
        .windows(2)
        .map(|w| {
            buf.clear();
            buf.extend_from_slice(&samples[..w[0]]);
            buf.extend_from_slice(&samples[w[1]..]);
            stat(&buf)
        })
        .collect();
    let gf = g as f64;
    let mean = leave_out.iter().sum::<f64>() / gf;
    let var = leave_out.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() * (gf - 1.0) / gf;
    (full, var.sqrt())
}

/// Empirical `E|v|^{2p}` with its jackknife standard error.
pub fn moment_estimate(values: &[Complex64], p: u32) -> Result<(f64, f64)> {
    if p < 1 {
        return Err(domain("moment order p must be >= 1"));
    }
    if values.len() < 100 {
        return Err(precision(format!("need at least 100 replicas, got {}", values.len())));
    }
    let powers: Vec<f64> = values.iter().map(|z| z.norm_sqr().powi(p as i32)).collect();
    Ok(jackknife(&powers, |s| s.iter().sum::<f64>() / s.len() as f64))
}
