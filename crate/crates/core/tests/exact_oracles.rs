//! The closed forms checked against each other and against independent values.

use std::f64::consts::PI;

use windsoup_core::exact::quad::{integrate, integrate_pieces, Tolerance};
use windsoup_core::exact::{
    bessel_i, bessel_i_scaled, bridge_sheet_probability, contour_radial_kernel, expected_w, expected_w_truncated, fourier_identity_partial, lemma1_value,
    lemma2_mean, radial_winding_mass, winding_pmf_contour, winding_pmf_fourier, Representation,
};
use windsoup_core::field::a_exponent;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn scaled_bessel_matches_high_precision_values() {
    // e^{-x} I_ν(x), computed at 25 digits with an arbitrary-precision library.
    let table = [
        (0.3, 2.0, 0.294_711_254_103_063),
        (2.5, 0.7, 0.011_213_197_099_833_277),
        (7.25, 40.0, 0.032_589_476_883_983_76),
        (0.0, 0.01, 0.990_074_585_149_707_5),
        (12.5, 3.0, 5.458_782_715_404_531e-9),
    ];
    for (nu, x, want) in table {
        let got = bessel_i_scaled(nu, x).unwrap();
        assert!(((got - want) / want).abs() < 1e-12, "I_{nu}({x}): {got} vs {want}");
    }
}

#[test]
fn bessel_matches_its_integral_representation() {
    // I_ν(x) = (1/π)∫_0^π e^{x cos θ} cos νθ dθ − (sin νπ/π)∫_0^∞ e^{−x cosh t − νt} dt
    let tol = Tolerance::absolute(1e-13);
    for (nu, x) in [(0.3, 2.0), (1.7, 0.5), (4.5, 6.0)] {
        let head = integrate(|th: f64| (x * th.cos()).exp() * (nu * th).cos(), 0.0, PI, &tol).unwrap().value / PI;
        let tail = integrate_pieces(|t: f64| (-x * t.cosh() - nu * t).exp(), &[0.0, 1.0, 3.0, 8.0], &tol)
            .unwrap()
            .value;
        let want = head - (nu * PI).sin() / PI * tail;
        let got = bessel_i(nu, x).unwrap();
        assert!(close(got, want, 1e-8 * want.abs().max(1.0)), "I_{nu}({x}): {got} vs {want}");
    }
}

#[test]
fn contour_and_fourier_forms_agree_on_the_grid() {
    for n in [1, 2, 3] {
        for r in [0.5, 1.0, 2.0] {
            let c = winding_pmf_contour(n, r).unwrap();
            let f = winding_pmf_fourier(n, r).unwrap();
            assert!(close(c, f, 1e-6), "n={n} r={r}: {c} vs {f}");
            assert!(c >= 0.0);
        }
    }
}

#[test]
fn winding_masses_are_symmetric_in_orientation() {
    for r in [0.2, 0.9, 1.6] {
        for n in 1..5 {
            let a = winding_pmf_fourier(n, r).unwrap();
            let b = winding_pmf_fourier(-n, r).unwrap();
            assert!(close(a, b, 1e-14), "{a} {b}");
        }
    }
}

#[test]
fn winding_masses_decrease_away_from_the_root_distance_zero_limit() {
    // A far root makes winding around the origin rare.
    let near = winding_pmf_contour(1, 0.3).unwrap();
    let far = winding_pmf_contour(1, 3.0).unwrap();
    assert!(far < near * 1e-3, "{near} {far}");
}

#[test]
fn radial_integrals_equal_one_over_four_pi_squared_k_squared() {
    for k in [1, 2, 3] {
        let want = 1.0 / (4.0 * PI * PI * (k * k) as f64);
        let kernel = contour_radial_kernel(k).unwrap();
        assert!(close(kernel, want, 1e-10), "kernel k={k}: {kernel} vs {want}");
        for rep in [Representation::Contour, Representation::Fourier] {
            let q = radial_winding_mass(rep, k).unwrap();
            assert!(close(q, want, 1e-8), "{rep:?} k={k}: {q} vs {want}");
            // Half of the stated constant.
            assert!(close(2.0 * q, lemma1_value(k).unwrap(), 1e-7));
        }
    }
}

#[test]
fn fourier_series_identity() {
    for beta in [PI / 2.0, PI, 1.5 * PI] {
        let partial = fourier_identity_partial(beta, 1_000_000);
        assert!(close(partial, a_exponent(beta).unwrap(), 1e-5), "{beta}: {partial}");
    }
    assert!(close(fourier_identity_partial(PI, 1_000_000), 0.25, 1e-6));
}

#[test]
fn truncated_poisson_product_matches_the_power_law() {
    for delta in [0.5, 0.25, 0.125] {
        let exact = expected_w(1.0, PI, delta).unwrap();
        let truncated = expected_w_truncated(1.0, PI, delta, 1_000_000).unwrap();
        assert!(close(exact, truncated, 1e-4));
    }
    assert!(close(expected_w(1.0, PI, 0.5).unwrap(), 0.840_896_415_253_714_5, 1e-12));
}

#[test]
fn poisson_means_are_additive_in_scale() {
    let whole = lemma2_mean(2.0, 1.0, 0.2, 1).unwrap();
    let split = lemma2_mean(2.0, 1.0, 0.5, 1).unwrap() + lemma2_mean(2.0, 0.5, 0.2, 1).unwrap();
    assert!(close(whole, split, 1e-15));
    assert!(close(whole, 5f64.ln() / (PI * PI), 1e-15));
    assert_eq!(lemma2_mean(2.0, 1.0, 1.0, 1).unwrap(), 0.0);
}

#[test]
fn bridge_sheet_law_is_a_probability_distribution() {
    for (z, theta0) in [(0.5, 0.3), (3.0, 3.1), (20.0, -2.9), (1e-3, 1.0)] {
        let p: Vec<f64> = (-400..=400).map(|m| bridge_sheet_probability(z, theta0, m).unwrap()).collect();
        assert!(p.iter().all(|&q| q >= 0.0));
        let total: f64 = p.iter().sum();
        // The sheets beyond |m| = 400 carry mass of order 1/400.
        assert!(total < 1.0 && total > 0.99, "{total}");
        // Reversing the orientation mirrors the law.
        for m in [0, 1, 2, 5] {
            let a = bridge_sheet_probability(z, theta0, m).unwrap();
            let b = bridge_sheet_probability(z, -theta0, -m).unwrap();
            assert!(close(a, b, 1e-12));
        }
    }
}

#[test]
fn bridge_sheet_law_at_the_extremes() {
    // A piece passing right through the origin goes round either side evenly.
    let left = bridge_sheet_probability(2.0, PI - 1e-9, 0).unwrap();
    let right = bridge_sheet_probability(2.0, PI - 1e-9, -1).unwrap();
    assert!(close(left, right, 1e-6), "{left} {right}");
    // A short piece far from the origin sweeps its principal angle.
    assert!(close(bridge_sheet_probability(400.0, 0.1, 0).unwrap(), 1.0, 1e-12));
}

#[test]
fn bridge_sheet_law_closes_to_the_rooted_winding_mass() {
    // A unit bridge from r to r, viewed as a single piece, winds n times with
    // probability pmf(n, r) / p_1(r, r); the piece has z = r², θ0 = 0.
    for r in [0.5, 1.0, 2.0] {
        for n in [1, 2, 3] {
            let sheet = bridge_sheet_probability(r * r, 0.0, n).unwrap();
            let rooted = winding_pmf_contour(n, r).unwrap() * 2.0 * PI;
            assert!(close(sheet, rooted, 1e-10), "r={r} n={n}: {sheet} vs {rooted}");
        }
    }
}
