//! Distributional checks of the bridge sampler and the soup.

use rayon::prelude::*;
use windsoup_core::exact::{winding_pmf_contour, HEAT_KERNEL_DIAGONAL};
use windsoup_core::sampler::{
    refine_max_with, refine_near, sample_bridge, segment_distance, sample_soup, sample_soup_focused, ExtremumOptions, Focus,
};
use windsoup_core::stats::{mc_mean_ci, poisson_fit_test};
use windsoup_core::winding::{resolve_winding, winding_number, ResolveOptions};
use windsoup_core::{DiscDomain, PlanePoint, RngStream, SoupConfig};

fn z(est: f64, reference: f64, stderr: f64) -> f64 {
    (est - reference) / stderr
}

#[test]
fn bridge_midpoint_has_variance_t_over_4() {
    let t = 0.8;
    let mut rng = RngStream::for_replica(101, 0);
    let x = PlanePoint::new(0.2, -0.1);
    let mids: Vec<f64> = (0..100_000)
        .map(|_| {
            let lp = sample_bridge(x, t, 16, &mut rng);
            lp.vertices()[8].re - x.re
        })
        .collect();
    let squares: Vec<f64> = mids.iter().map(|m| m * m).collect();
    let var = mc_mean_ci(&squares).unwrap();
    assert!(z(var.mean, t / 4.0, var.stderr).abs() < 4.0, "{var:?}");
    let mean = mc_mean_ci(&mids).unwrap();
    assert!(mean.mean.abs() < 4.0 * mean.stderr);
}

#[test]
fn brownian_scaling_of_the_quarter_point() {
    // A bridge of duration 4t rescaled by 1/2 has the law of one of duration t:
    // Var B(t/4) = (t/4)(3/4) for duration t.
    let t = 0.5;
    let mut rng = RngStream::for_replica(102, 0);
    let long: Vec<f64> = (0..50_000)
        .map(|_| {
            let lp = sample_bridge(PlanePoint::ORIGIN, 4.0 * t, 32, &mut rng);
            let v = lp.vertices()[8].im * 0.5;
            v * v
        })
        .collect();
    let est = mc_mean_ci(&long).unwrap();
    let reference = t * 0.25 * 0.75;
    assert!(z(est.mean, reference, est.stderr).abs() < 4.0, "{est:?} vs {reference}");
}

fn small_config(seed: u64, replica_id: u64) -> SoupConfig {
    SoupConfig {
        alpha: 1.0,
        t_min: 0.01,
        t_max: 10.0,
        steps_per_unit_time: 256,
        seed,
        replica_id,
        ..SoupConfig::default()
    }
}

#[test]
fn candidate_count_is_poisson_with_mean_alpha_m() {
    let counts: Vec<u64> = (0..2000)
        .map(|r| {
            let cfg = small_config(5, r);
            sample_soup(&cfg, &mut cfg.rng()).unwrap().candidates_drawn
        })
        .collect();
    let mean = small_config(5, 0).intensity_mass();
    assert!((mean - 49.95).abs() < 1e-12);
    let fit = poisson_fit_test(&counts, mean).unwrap();
    assert!(fit.mean_z.abs() < 4.0, "{fit:?}");
    assert!(fit.variance_z.abs() < 4.0, "{fit:?}");
}

#[test]
fn kept_loops_are_poisson_and_inside_the_domain() {
    let mut kept = Vec::new();
    for r in 0..1000 {
        let cfg = small_config(6, r);
        let soup = sample_soup(&cfg, &mut cfg.rng()).unwrap();
        assert!(soup.loops.iter().all(|l| l.vertices().iter().all(|v| v.norm() < 1.0)));
        kept.push(soup.accepted() as u64);
    }
    let mean = kept.iter().sum::<u64>() as f64 / kept.len() as f64;
    // Thinning a Poisson process leaves a Poisson process.
    let fit = poisson_fit_test(&kept, mean).unwrap();
    assert!(fit.variance_z.abs() < 4.0, "{fit:?}");
    assert!(mean < 49.95 && mean > 30.0, "{mean}");
}

#[test]
fn restriction_to_a_smaller_disc_matches_sampling_there() {
    // Loops of the D_1 soup staying in D_{1/2} have the law of the D_{1/2} soup.
    let n = 1500;
    let restricted: Vec<f64> = (0..n)
        .map(|r| {
            let cfg = small_config(7, r);
            let soup = sample_soup(&cfg, &mut cfg.rng()).unwrap();
            soup.restricted_to(0.5).len() as f64
        })
        .collect();
    let direct: Vec<f64> = (0..n)
        .map(|r| {
            let cfg = SoupConfig {
                domain: DiscDomain::new(0.5).unwrap(),
                ..small_config(8, r)
            };
            sample_soup(&cfg, &mut cfg.rng()).unwrap().accepted() as f64
        })
        .collect();
    let a = mc_mean_ci(&restricted).unwrap();
    let b = mc_mean_ci(&direct).unwrap();
    let zz = (a.mean - b.mean) / a.stderr.hypot(b.stderr);
    assert!(zz.abs() < 4.0, "{a:?} vs {b:?}");
}

#[test]
fn shrinking_the_accepted_region_only_removes_loops() {
    for r in 0..200 {
        let wide = small_config(15, r);
        let narrow = SoupConfig {
            exit_margin: 0.4,
            ..wide.clone()
        };
        let a = sample_soup(&wide, &mut wide.rng()).unwrap();
        let b = sample_soup(&narrow, &mut narrow.rng()).unwrap();
        assert_eq!(a.candidates_drawn, b.candidates_drawn);
        let key = |l: &windsoup_core::Loop| (l.root().re.to_bits(), l.root().im.to_bits(), l.duration().to_bits());
        let kept: std::collections::HashSet<_> = a.loops.iter().map(key).collect();
        assert!(b.loops.iter().all(|l| kept.contains(&key(l))), "replica {r}");
        assert!(b.accepted() <= a.accepted());
    }
}

#[test]
fn soups_do_not_depend_on_the_thread_count() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            (0..16u64)
                .into_par_iter()
                .map(|r| {
                    let cfg = small_config(9, r);
                    let soup = sample_soup(&cfg, &mut cfg.rng()).unwrap();
                    soup.loops.iter().map(|l| l.vertices().to_vec()).collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn focused_sampling_preserves_the_winding_law() {
    let cfg = small_config(10, 0);
    let everything = Focus::disc(PlanePoint::ORIGIN, 10.0);
    let full = sample_soup(&cfg, &mut cfg.rng()).unwrap();
    let wide = sample_soup_focused(&cfg, &everything, &mut cfg.rng()).unwrap();
    assert_eq!(wide.skipped, 0);
    assert_eq!(full.loops, wide.loops);

    let x = PlanePoint::new(0.3, 0.1);
    let winding = |soup: &windsoup_core::LoopSoup| {
        soup.loops
            .iter()
            .filter_map(|l| winding_number(l, x).ok())
            .filter(|w| w.turns != 0)
            .count() as f64
    };
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for r in 0..1500 {
        let cfg = small_config(10, r);
        a.push(winding(&sample_soup(&cfg, &mut cfg.rng()).unwrap()));
        let focused = sample_soup_focused(&cfg, &Focus::point(x), &mut cfg.rng()).unwrap();
        b.push(winding(&focused));
    }
    let (a, b) = (mc_mean_ci(&a).unwrap(), mc_mean_ci(&b).unwrap());
    assert!(((a.mean - b.mean) / a.stderr.hypot(b.stderr)).abs() < 4.0, "{a:?} vs {b:?}");
}

#[test]
fn winding_ignores_the_time_parametrization() {
    let mut rng = RngStream::for_replica(11, 0);
    for _ in 0..200 {
        let lp = sample_bridge(PlanePoint::new(0.05, 0.0), 0.3, 64, &mut rng);
        let n = lp.times().len();
        let warped: Vec<f64> = (0..n).map(|i| 0.3 * ((i as f64) / (n - 1) as f64).powi(2)).collect();
        let other = lp.reparametrized(warped).unwrap();
        let a = winding_number(&lp, PlanePoint::ORIGIN);
        let b = winding_number(&other, PlanePoint::ORIGIN);
        assert_eq!(a.map(|w| w.turns).ok(), b.map(|w| w.turns).ok());
    }
}

#[test]
fn refinement_keeps_well_conditioned_windings() {
    let mut rng = RngStream::for_replica(12, 0);
    let x = PlanePoint::ORIGIN;
    let (mut compared, mut nonzero) = (0, 0);
    for _ in 0..3000 {
        let lp = sample_bridge(PlanePoint::new(0.15, 0.05), 1.0, 2048, &mut rng);
        let refined = refine_near(&lp, x, 1e-6, &mut rng).unwrap();
        // Well conditioned: x stays four step deviations away from every segment.
        let sigma = lp.max_step_sigma();
        let clearance = lp
            .vertices()
            .windows(2)
            .map(|s| segment_distance(x, s[0], s[1]))
            .fold(f64::INFINITY, f64::min);
        if clearance < 4.0 * sigma {
            continue;
        }
        compared += 1;
        let a = winding_number(&lp, x).unwrap();
        let b = winding_number(&refined, x).unwrap();
        assert_eq!(a.turns, b.turns);
        nonzero += usize::from(a.turns != 0);
    }
    assert!(compared > 150 && nonzero > 5, "{compared} {nonzero}");
}

#[test]
fn rooted_winding_frequency_matches_the_exact_mass() {
    // P(n = 1) for a unit bridge rooted at distance 1 is 2π M_1^{1,1}(1).
    let x = PlanePoint::new(1.0, 0.0);
    let hits: Vec<f64> = (0..8u64)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = RngStream::for_replica(13, chunk);
            (0..10_000).map(move |_| {
                let lp = sample_bridge(x, 1.0, 256, &mut rng);
                let turns = resolve_winding(&lp, PlanePoint::ORIGIN, &ResolveOptions::default(), &mut rng)
                    .map(|w| w.turns)
                    .unwrap_or(0);
                f64::from(u8::from(turns == 1))
            })
        })
        .collect();
    let est = mc_mean_ci(&hits).unwrap();
    let reference = winding_pmf_contour(1, 1.0).unwrap() / HEAT_KERNEL_DIAGONAL;
    assert!(z(est.mean, reference, est.stderr).abs() < 3.5, "{est:?} vs {reference}");
}

#[test]
fn cutting_the_path_off_at_a_fixed_scale_overcounts_single_turns() {
    // Near misses below the refinement scale lose their turns, which piles
    // mass onto small windings; the exact sheet law does not.
    let x = PlanePoint::new(0.3, 0.0);
    let reference = winding_pmf_contour(1, 0.3).unwrap() / HEAT_KERNEL_DIAGONAL;
    let (truncated, exact): (Vec<f64>, Vec<f64>) = (0..8u64)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = RngStream::for_replica(16, chunk);
            (0..5000).map(move |_| {
                let lp = sample_bridge(x, 1.0, 256, &mut rng);
                let coarse = refine_near(&lp, PlanePoint::ORIGIN, 1e-3, &mut rng)
                    .and_then(|r| winding_number(&r, PlanePoint::ORIGIN))
                    .map_or(0, |w| w.turns);
                let fine = resolve_winding(&lp, PlanePoint::ORIGIN, &ResolveOptions::default(), &mut rng).map_or(0, |w| w.turns);
                (f64::from(u8::from(coarse == 1)), f64::from(u8::from(fine == 1)))
            })
        })
        .unzip();
    let coarse = mc_mean_ci(&truncated).unwrap();
    let fine = mc_mean_ci(&exact).unwrap();
    assert!(z(fine.mean, reference, fine.stderr).abs() < 3.5, "{fine:?} vs {reference}");
    assert!(z(coarse.mean, reference, coarse.stderr) > 4.0, "{coarse:?} vs {reference}");
}

#[test]
fn max_refinement_resolves_threshold_crossings() {
    let mut rng = RngStream::for_replica(14, 0);
    let opts = ExtremumOptions::default();
    let fine = ExtremumOptions {
        resolution: 1e-7,
        sigmas: 6.0,
        max_depth: 60,
    };
    for _ in 0..300 {
        let lp = sample_bridge(PlanePoint::ORIGIN, 0.1, 32, &mut rng);
        let vertex_max = lp.vertices().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let theta = vertex_max + 0.02;
        let (refined, m) = refine_max_with(&lp, PlanePoint::norm, |_| 1.0, &[theta], &opts, &mut rng);
        assert!(m >= vertex_max);
        // Resolving the refined path fully never flips the comparison with θ.
        let (_, exact) = refine_max_with(&refined, PlanePoint::norm, |_| 1.0, &[], &fine, &mut rng);
        assert!(exact >= m);
        assert!(m >= theta || exact < theta + 2e-5, "{m} {exact} {theta}");
    }
}
