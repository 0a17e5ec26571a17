//! Closed forms and quadrature oracles for rooted winding laws.
//!
//! Masses here are with respect to the unnormalized bridge measure
//! `M_1^{r,r}`: the Brownian bridge law of duration 1 from a point at
//! distance `r` from the origin back to itself, weighted by the heat-kernel
//! diagonal `p_1(z, z) = 1/(2π)`. With this convention the winding angle has
//! the skew-product transform `e^{-r²} I_{|u|}(r²) / (2π)`, which yields
//!
//! ```text
//! M_1^{r,r}(n_0 = n) = (1/π) ∫_0^∞ e^{-r²} I_u(r²) cos(2π n u) du           (Fourier)
//!                    = (1/2π) ∫_0^∞ e^{-r² (1 + cosh t)} B_n(t) dt           (contour)
//! B_n(t) = (2n-1)/(t² + (2n-1)²π²) - (2n+1)/(t² + (2n+1)²π²)
//! ```

pub mod bessel;
pub mod quad;

use std::f64::consts::PI;

use rayon::prelude::*;

pub use bessel::{bessel_i, bessel_i_scaled};
use quad::{integrate, integrate_pieces, Tolerance};

use crate::error::{domain, Result};
use crate::field::a_exponent;

/// Heat-kernel diagonal `p_1(z, z)` of standard planar Brownian motion.
pub const HEAT_KERNEL_DIAGONAL: f64 = 1.0 / (2.0 * PI);

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(domain(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

fn contour_bracket(n: i64, t: f64) -> f64 {
    let lo = (2 * n - 1) as f64;
    let hi = (2 * n + 1) as f64;
    let t2 = t * t;
    lo / (t2 + lo * lo * PI * PI) - hi / (t2 + hi * hi * PI * PI)
}

/// Rooted mass of winding `n ≠ 0` at distance `r`, from the contour form.
pub fn winding_pmf_contour(n: i64, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(domain("the contour form holds for nonzero windings only"));
    }
    check_radius(r)?;
    let r2 = r * r;
    // e^{-r² (cosh t - 1)} < e^{-40} beyond this point.
    let upper = (1.0 + 40.0 / r2).acosh();
    let mut breaks = vec![0.0];
    breaks.extend([1.0, 4.0, 12.0, 30.0].into_iter().filter(|&b| b < upper));
    breaks.push(upper);
    let q = integrate_pieces(
        |t| (-r2 * (1.0 + t.cosh())).exp() * contour_bracket(n, t),
        &breaks,
        &Tolerance::absolute(1e-13),
    )?;
    Ok(q.value / (2.0 * PI))
}

/// Probability that a planar Brownian bridge between two points `a`, `b`
/// (neither at the origin) sweeps the angle `θ0 + 2πm` around the origin,
/// where `θ0 ∈ (-π, π)` is the principal angle from `a` to `b` and
/// `z = |a||b| / Δt`.
///
/// The swept angle of the bridge has density proportional to
/// `∫_0^∞ cos(νφ) I_ν(z) dν`; with the integral form of `I_ν` this becomes
/// `1{m = 0} - (1/π) ∫_0^∞ e^{-z (cosh t + cos θ0)} [u/(t² + u²) + v/(t² + v²)] dt`
/// with `u = π + φ`, `v = π - φ`.
pub fn bridge_sheet_probability(z: f64, theta0: f64, m: i64) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(domain(format!("z must be positive, got {z}")));
    }
    if !(theta0.abs() < PI) {
        return Err(domain(format!("principal angle must lie in (-π, π), got {theta0}")));
    }
    let base = z * (1.0 + theta0.cos());
    if base > 700.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    let phi = theta0 + 2.0 * PI * m as f64;
    let (u, v) = (PI + phi, PI - phi);
    // Beyond `upper`, z (cosh t - 1) > 40.
    let upper = 2.0 * (20.0 / z).sqrt().asinh();
    let width = u.abs().min(v.abs());
    let mut breaks = vec![0.0];
    let mut b = width;
    while b < upper.min(1.0) {
        breaks.push(b);
        b *= 4.0;
    }
    let last = b.min(1.0);
    breaks.extend([1.0, 4.0, 12.0, 30.0, 100.0, 300.0].into_iter().filter(|&b| b < upper && b >= last));
    breaks.push(upper);
    let q = integrate_pieces(
        |t| {
            let s = (0.5 * t).sinh();
            (-base - 2.0 * z * s * s).exp() * (u / (t * t + u * u) + v / (t * t + v * v))
        },
        &breaks,
        &Tolerance::absolute(1e-13),
    )?;
    Ok(f64::from(u8::from(m == 0)) - q.value / PI)
}

/// First order `u` (on an integer grid) past which `e^{-z} I_u(z)` is negligible.
fn fourier_cutoff(z: f64) -> Result<f64> {
    let mut u = 1.0;
    while bessel_i_scaled(u, z)? > 1e-19 {
        u += 1.0;
    }
    Ok(u)
}

/// Rooted mass of winding `n` at distance `r`, from the Fourier form.
///
/// Also valid for `n = 0`, where it gives the mass of loops that do not wind.
pub fn winding_pmf_fourier(n: i64, r: f64) -> Result<f64> {
    check_radius(r)?;
    let z = r * r;
    let upper = fourier_cutoff(z)?;
    let freq = 2.0 * PI * n as f64;
    let mut breaks: Vec<f64> = (0..=upper as usize).step_by(2).map(|u| u as f64).collect();
    if *breaks.last().unwrap() < upper {
        breaks.push(upper);
    }
    let mut failure = None;
    let q = integrate_pieces(
        |u| match bessel_i_scaled(u, z) {
            Ok(v) => v * (freq * u).cos(),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        &breaks,
        &Tolerance::absolute(1e-12),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(q?.value / PI)
}

/// Which closed form to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Contour,
    Fourier,
}

pub fn winding_pmf(rep: Representation, n: i64, r: f64) -> Result<f64> {
    match rep {
        Representation::Contour => winding_pmf_contour(n, r),
        Representation::Fourier => winding_pmf_fourier(n, r),
    }
}

/// `2π ∫_0^∞ r M_1^{r,r}(n_0 = k) dr`, the area integral of the rooted
/// winding mass, by nested quadrature of the chosen representation.
pub fn radial_winding_mass(rep: Representation, k: i64) -> Result<f64> {
    if k == 0 {
        return Err(domain("winding index must be nonzero"));
    }
    // e^{-2 r²} < 1e-18 beyond r = 4.6.
    let breaks = [0.0, 0.05, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.6];
    let mut failure = None;
    let q = integrate_pieces(
        |r| {
            if r == 0.0 {
                return 0.0;
            }
            match winding_pmf(rep, k, r) {
                Ok(v) => r * v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        &breaks,
        &Tolerance::absolute(1e-11),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(2.0 * PI * q?.value)
}

/// `1 / (2π² k²)`, the constant attached to winding index `k`.
pub fn lemma1_value(k: i64) -> Result<f64> {
    if k == 0 {
        return Err(domain("winding index must be nonzero"));
    }
    Ok(1.0 / (2.0 * PI * PI * (k * k) as f64))
}

/// Mean number of soup loops in `D_R`, not contained in `D_δ`, winding `k` times
/// around the origin: `α log(R/δ) / (2π² k²)`.
pub fn lemma2_mean(alpha: f64, outer: f64, delta: f64, k: i64) -> Result<f64> {
    if !(delta > 0.0 && delta <= outer) {
        return Err(domain(format!("need 0 < δ <= R, got δ = {delta}, R = {outer}")));
    }
    Ok(alpha * (outer / delta).ln() * lemma1_value(k)?)
}

/// `E W_x = δ^{α a(β)}`.
pub fn expected_w(alpha: f64, beta: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("δ must lie in (0, 1), got {delta}")));
    }
    Ok(delta.powf(alpha * a_exponent(beta)?))
}

/// Truncated Poisson product for `E W_x`: `exp(α log δ Σ_{k=1}^N (1 - cos kβ)/(π² k²))`.
pub fn expected_w_truncated(alpha: f64, beta: f64, delta: f64, terms: u64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("δ must lie in (0, 1), got {delta}")));
    }
    Ok((alpha * delta.ln() * fourier_identity_partial(beta, terms)).exp())
}

/// `Σ_{k=1}^N (1 - cos kβ) / (π² k²)`, summed from the smallest terms up.
pub fn fourier_identity_partial(beta: f64, terms: u64) -> f64 {
    (1..=terms)
        .rev()
        .map(|k| {
            let k = k as f64;
            (1.0 - (k * beta).cos()) / (PI * PI * k * k)
        })
        .sum()
}

/// Rooted winding masses on an `(r, n)` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WindingPmfTable {
    pub r_values: Vec<f64>,
    pub n_values: Vec<i64>,
    /// `pmf[i][j]` is the mass at `r_values[i]`, `n_values[j]`.
    pub pmf: Vec<Vec<f64>>,
}

impl WindingPmfTable {
    pub fn build(rep: Representation, r_values: &[f64], n_values: &[i64]) -> Result<Self> {
        let pmf = r_values
            .par_iter()
            .map(|&r| n_values.iter().map(|&n| winding_pmf(rep, n, r)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            r_values: r_values.to_vec(),
            n_values: n_values.to_vec(),
            pmf,
        })
    }
}

/// The radial integral after doing the `r`-integral in closed form:
/// `∫_0^∞ r e^{-r²(1+cosh t)} dr = 1 / (2 (1 + cosh t))`, leaving
/// `(1/2) ∫_0^∞ B_k(t) / (1 + cosh t) dt`.
pub fn contour_radial_kernel(k: i64) -> Result<f64> {
    if k == 0 {
        return Err(domain("winding index must be nonzero"));
    }
    let q = integrate(
        |t| contour_bracket(k, t) / (1.0 + t.cosh()),
        0.0,
        80.0,
        &Tolerance::absolute(1e-14),
    )?;
    Ok(0.5 * q.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma1_constants() {
        assert!((lemma1_value(1).unwrap() - 0.050_660_591_821_168_9).abs() < 1e-15);
        assert!((lemma1_value(2).unwrap() - 0.012_665_147_955_292_2).abs() < 1e-15);
        assert!((lemma1_value(-3).unwrap() - 0.005_628_954_646_796_5).abs() < 1e-15);
        let c = lemma1_value(1).unwrap();
        for k in 1..20 {
            let scaled = lemma1_value(k).unwrap() * (k * k) as f64;
            assert!((scaled - c).abs() <= 4.0 * f64::EPSILON * c);
        }
        assert!(lemma1_value(0).is_err());
    }

    #[test]
    fn lemma2_examples() {
        assert_eq!(lemma2_mean(2.0, 1.0, 1.0, 1).unwrap(), 0.0);
        let m = lemma2_mean(2.0, 1.0, 0.2, 1).unwrap();
        assert!((m - 5f64.ln() / (PI * PI)).abs() < 1e-15);
        assert!((m - 0.163_070_154_286_676_2).abs() < 1e-15);
        let split = lemma2_mean(1.0, 1.0, 0.5, 2).unwrap() + lemma2_mean(1.0, 0.5, 0.1, 2).unwrap();
        assert!((split - lemma2_mean(1.0, 1.0, 0.1, 2).unwrap()).abs() < 1e-15);
        assert!(lemma2_mean(1.0, 1.0, 1.5, 1).is_err());
    }

    #[test]
    fn expected_w_examples() {
        assert_eq!(expected_w(3.0, 0.0, 0.3).unwrap(), 1.0);
        assert!((expected_w(1.0, PI, 0.5).unwrap() - 0.840_896_4).abs() < 1e-7);
        for beta in [PI / 2.0, PI, 1.3] {
            let exact = expected_w(1.0, beta, 0.5).unwrap();
            let series = expected_w_truncated(1.0, beta, 0.5, 1_000_000).unwrap();
            assert!((exact - series).abs() < 1e-4);
        }
        assert!(expected_w(1.0, PI, 1.0).is_err());
    }

    #[test]
    fn fourier_partial_sums() {
        assert_eq!(fourier_identity_partial(0.0, 1000), 0.0);
        let mut prev = 0.0;
        for n in [1u64, 10, 100, 1000, 10_000] {
            let s = fourier_identity_partial(PI, n);
            assert!(s >= prev);
            assert!((0.25 - s).abs() <= 2.0 / (PI * PI * n as f64));
            prev = s;
        }
        let s = fourier_identity_partial(PI / 2.0, 1_000_000);
        assert!((s - 3.0 / 16.0).abs() < 1e-5);
    }

    #[test]
    fn contour_is_symmetric_in_n() {
        for r in [0.3, 1.0, 2.5] {
            for n in 1..4 {
                let a = winding_pmf_contour(n, r).unwrap();
                let b = winding_pmf_contour(-n, r).unwrap();
                assert!((a - b).abs() < 1e-15);
                assert!(a > 0.0);
            }
        }
        assert!(winding_pmf_contour(0, 1.0).is_err());
        assert!(winding_pmf_contour(1, 0.0).is_err());
    }

    #[test]
    fn masses_sum_to_heat_kernel_diagonal() {
        // The pmf has a ~c/n² tail, so sum far out and add the tail estimate N p(N).
        let cutoff = 2000;
        for r in [0.5, 1.0, 2.0] {
            let mut total = winding_pmf_fourier(0, r).unwrap();
            let mut last = 0.0;
            for n in 1..=cutoff {
                last = winding_pmf_contour(n, r).unwrap();
                total += 2.0 * last;
            }
            total += 2.0 * last * cutoff as f64;
            assert!((total - HEAT_KERNEL_DIAGONAL).abs() < 1e-6, "r = {r}: {total}");
        }
    }

    #[test]
    fn nonzero_winding_vanishes_near_the_origin() {
        let values: Vec<f64> = [1e-1, 1e-3, 1e-6, 1e-12]
            .iter()
            .map(|&r| winding_pmf_contour(1, r).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
        // The decay is logarithmic: about 1 / (π log(1/r²)) for small r.
        let r = 1e-12f64;
        let approx = 1.0 / (PI * (1.0 / (r * r)).ln());
        assert!((values[3] - approx).abs() < 0.2 * approx, "{} vs {approx}", values[3]);
    }

    #[test]
    fn radial_kernel_matches_nested_quadrature() {
        for k in 1..=3 {
            let nested = radial_winding_mass(Representation::Contour, k).unwrap();
            let collapsed = contour_radial_kernel(k).unwrap();
            assert!((nested - collapsed).abs() < 1e-9, "k = {k}: {nested} vs {collapsed}");
        }
    }

    #[test]
    fn table_shape() {
        let t = WindingPmfTable::build(Representation::Contour, &[0.5, 1.0], &[1, 2, 3]).unwrap();
        assert_eq!(t.pmf.len(), 2);
        assert_eq!(t.pmf[0].len(), 3);
        assert!(t.pmf.iter().flatten().all(|&v| v >= 0.0));
    }
}
