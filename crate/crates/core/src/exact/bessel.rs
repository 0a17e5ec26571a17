//! Modified Bessel function of the first kind for real order.
//!
//! Power series up to `x = 30`; beyond that the Schläfli integral
//! representation, which is well conditioned once `e^{-x}` is factored out:
//!
//! ```text
//! e^{-x} I_ν(x) = (1/π) ∫_0^π e^{x (cos θ - 1)} cos(νθ) dθ
//!               - (sin νπ / π) ∫_0^∞ e^{-x (1 + cosh t) - ν t} dt
//! ```

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use super::quad::{integrate, integrate_pieces, Tolerance};
use crate::error::{domain, Error, Result};

const SERIES_LIMIT: f64 = 30.0;

fn check_args(order: f64, x: f64) -> Result<()> {
    if !(order >= 0.0 && order.is_finite()) {
        return Err(domain(format!("Bessel order must be finite and >= 0, got {order}")));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(domain(format!("Bessel argument must be finite and >= 0, got {x}")));
    }
    Ok(())
}

fn series_scaled(order: f64, x: f64) -> f64 {
    let log_first = order * (0.5 * x).ln() - ln_gamma(order + 1.0) - x;
    let mut term = log_first.exp();
    let q = 0.25 * x * x;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + order));
        sum += term;
        if term <= sum * 1e-17 && k > 0.5 * x {
            break;
        }
    }
    sum
}

fn integral_scaled(order: f64, x: f64) -> Result<f64> {
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-13,
        max_intervals: 2000,
    };
    // The θ-integrand has width ~ 1/sqrt(x) at the origin and is below e^{-745}
    // once x (1 - cos θ) exceeds 745.
    let width = x.sqrt().recip();
    let cut = if 745.0 / x >= 2.0 {
        PI
    } else {
        (1.0 - 745.0 / x).acos()
    };
    let mut breaks = vec![0.0];
    for m in [2.0, 6.0, 16.0] {
        if m * width < cut {
            breaks.push(m * width);
        }
    }
    breaks.push(cut);
    let main = integrate_pieces(|t| (x * (t.cos() - 1.0)).exp() * (order * t).cos(), &breaks, &tol)?.value / PI;

    let s = (order * PI).sin();
    if s == 0.0 {
        return Ok(main);
    }
    let upper = (1.0 + 745.0 / x).acosh();
    let tail = integrate(
        |t| (-x * (1.0 + t.cosh()) - order * t).exp(),
        0.0,
        upper,
        &Tolerance::absolute(1e-300),
    )
    .or_else(|_| integrate(|t| (-x * (1.0 + t.cosh()) - order * t).exp(), 0.0, upper, &Tolerance::default()))?
    .value;
    Ok(main - s / PI * tail)
}

/// `e^{-x} I_ν(x)`, finite for every admissible argument.
pub fn bessel_i_scaled(order: f64, x: f64) -> Result<f64> {
    check_args(order, x)?;
    if x == 0.0 {
        return Ok(if order == 0.0 { 1.0 } else { 0.0 });
    }
    if x <= SERIES_LIMIT {
        Ok(series_scaled(order, x))
    } else {
        integral_scaled(order, x)
    }
}

/// `I_ν(x)` for real `ν >= 0`, `x >= 0`, relative accuracy about `1e-12`.
pub fn bessel_i(order: f64, x: f64) -> Result<f64> {
    let scaled = bessel_i_scaled(order, x)?;
    let value = scaled * x.exp();
    if !value.is_finite() {
        return Err(Error::Range(format!("I_{order}({x}) overflows")));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1.5, 0.0).unwrap(), 0.0);
        let x = 1.0f64;
        let half = (2.0 / (PI * x)).sqrt() * x.sinh();
        assert!(rel(bessel_i(0.5, x).unwrap(), half) < 1e-13);
        assert!((bessel_i(0.5, 1.0).unwrap() - 0.937_674_888).abs() < 1e-9);
        for x in [0.1, 3.0, 12.0, 29.0, 31.0, 60.0, 200.0] {
            let i12 = (2.0 / (PI * x)).sqrt() * x.sinh();
            assert!(rel(bessel_i(0.5, x).unwrap(), i12) < 1e-11, "x = {x}");
            // I_{3/2}(x) = sqrt(2/(πx)) (cosh x - sinh x / x)
            let i32 = (2.0 / (PI * x)).sqrt() * (x.cosh() - x.sinh() / x);
            assert!(rel(bessel_i(1.5, x).unwrap(), i32) < 1e-11, "x = {x}");
        }
    }

    #[test]
    fn integer_order_reference_values() {
        // Abramowitz & Stegun table 9.8 / standard references.
        assert!(rel(bessel_i(0.0, 1.0).unwrap(), 1.266_065_877_752_008_4) < 1e-14);
        assert!(rel(bessel_i(1.0, 1.0).unwrap(), 0.565_159_103_992_485) < 1e-14);
        assert!(rel(bessel_i(0.0, 10.0).unwrap(), 2_815.716_628_466_254) < 1e-13);
        assert!(rel(bessel_i_scaled(0.0, 100.0).unwrap(), 0.039_944_379_299_096_68) < 1e-11);
    }

    #[test]
    fn series_and_integral_agree_near_the_switch() {
        for order in [0.0, 0.3, 1.7, 4.25, 10.0] {
            for x in [20.0, 30.0, 45.0] {
                let a = series_scaled(order, x);
                let b = integral_scaled(order, x).unwrap();
                assert!(rel(a, b) < 1e-11, "order {order}, x {x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn recurrence_holds() {
        // I_{ν-1}(x) - I_{ν+1}(x) = (2ν/x) I_ν(x)
        for (nu, x) in [(1.0, 0.5), (2.3, 8.0), (1.1, 40.0), (5.5, 120.0)] {
            let lhs = bessel_i_scaled(nu - 1.0, x).unwrap() - bessel_i_scaled(nu + 1.0, x).unwrap();
            let rhs = 2.0 * nu / x * bessel_i_scaled(nu, x).unwrap();
            assert!(rel(lhs, rhs) < 1e-10, "nu {nu}, x {x}");
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(bessel_i(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_i(0.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_i(0.0, 800.0), Err(Error::Range(_))));
        assert!(bessel_i_scaled(0.0, 800.0).unwrap() > 0.0);
    }
}
