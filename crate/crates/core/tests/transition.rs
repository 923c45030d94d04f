use std::f64::consts::PI;

use postexp::roots::log_grid;
use postexp::source_model::{evaluate_pole, evaluate_saddle, pole_crossed, SourceParams, SpaceTimePoint};
use postexp::transition::{
    critical_density_curve, critical_distance, jittoh_criterion, ratio_r, transition_time, TransitionMethod,
};
use proptest::prelude::*;

fn pt(x: f64, t: f64) -> SpaceTimePoint {
    SpaceTimePoint::new(x, t).unwrap()
}

fn params(k: f64) -> SourceParams {
    SourceParams::new(k).unwrap()
}

#[test]
fn valid_points_sit_on_the_unit_ratio() {
    for k in [-0.1, -0.3, -0.6] {
        let p = params(k);
        let x_max = critical_distance(&p).unwrap().x_max;
        for x in log_grid(0.01, 0.95 * x_max, 12) {
            let tp = transition_time(&p, x, TransitionMethod::ExactRatio).unwrap();
            assert!(tp.valid, "k0I={k} x={x}");
            let q = pt(x, tp.t_p);
            assert!((ratio_r(&p, q).unwrap() - 1.0).abs() < 1e-6);
            assert!(pole_crossed(&p, q));
        }
    }
}

#[test]
fn ratio_near_mid_distance_crossing() {
    let r = ratio_r(&params(-0.3), pt(2.5, 7.0)).unwrap();
    assert!((r - 1.0).abs() < 0.2, "{r}");
}

#[test]
fn ratio_vanishes_late() {
    let p = params(-0.3);
    let r: Vec<f64> = [50.0, 200.0, 1000.0].iter().map(|&t| ratio_r(&p, pt(2.0, t)).unwrap()).collect();
    assert!(r[0] > r[1] && r[1] > r[2] && r[2] < 1e-100);
}

#[test]
fn large_time_root_satisfies_its_equation() {
    let p = params(-0.3);
    let k0 = p.k0();
    for x in [0.1, 1.0, 5.0] {
        let tp = transition_time(&p, x, TransitionMethod::LargeTime).unwrap();
        assert!(tp.valid);
        let t = tp.t_p;
        let rhs = x * (-(p.omega0() * t - k0 * x).im).exp() / (2.0 * PI.sqrt() * k0.norm_sqr());
        assert!((t.powf(1.5) / rhs - 1.0).abs() < 1e-6, "x={x}");
    }
}

#[test]
fn methods_agree_at_late_transitions() {
    let mut compared = 0;
    for k in [-0.1, -0.3, -0.5] {
        let p = params(k);
        for x in log_grid(0.01, 5.0, 15) {
            let exact = transition_time(&p, x, TransitionMethod::ExactRatio).unwrap();
            if !exact.valid || exact.t_p <= 10.0 * p.traversal_time(x).norm() {
                continue;
            }
            let approx = transition_time(&p, x, TransitionMethod::LargeTime).unwrap();
            assert!((exact.t_p - approx.t_p).abs() / exact.t_p < 0.05, "k0I={k} x={x}");
            compared += 1;
        }
    }
    assert!(compared > 10);
}

#[test]
fn transition_curve_is_single_valued_and_ends_at_critical_distance() {
    let p = params(-0.3);
    let c = critical_distance(&p).unwrap();
    let xs = log_grid(1e-4, 13.0, 60);
    let tps: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let tp = transition_time(&p, x, TransitionMethod::ExactRatio).unwrap();
            assert!(tp.valid, "x={x}");
            tp.t_p
        })
        .collect();
    // neighbouring points of the curve stay close: no branch jumps
    for w in tps.windows(2) {
        assert!((w[1] / w[0] - 1.0).abs() < 0.2, "{w:?}");
    }
    assert!(c.x_max > 13.0);
    assert!(!transition_time(&p, 1.05 * c.x_max, TransitionMethod::ExactRatio).unwrap().valid);
}

#[test]
fn critical_distance_band_at_moderate_width() {
    let c = critical_distance(&params(-0.3)).unwrap();
    assert!((11.0..=15.0).contains(&c.x_max), "{}", c.x_max);
}

#[test]
fn critical_distance_shrinks_with_decay_width() {
    let xs: Vec<f64> = [-0.2, -0.3, -0.5, -0.7]
        .iter()
        .map(|&k| critical_distance(&params(k)).unwrap().x_max)
        .collect();
    for w in xs.windows(2) {
        assert!(w[1] < w[0], "{xs:?}");
    }
}

#[test]
fn jittoh_threshold_at_half() {
    assert!(!jittoh_criterion(&params(-0.49)).1);
    assert!(jittoh_criterion(&params(-0.5)).1);
    assert_eq!(jittoh_criterion(&params(-0.25)).0, 1.0);
}

#[test]
fn critical_density_fades_as_decay_vanishes() {
    let grid: Vec<SourceParams> = [-0.1, -0.05, -0.02].iter().map(|&k| params(k)).collect();
    let d: Vec<f64> = critical_density_curve(&grid, true).iter().map(|c| c.density_exact).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

#[test]
fn approximate_critical_density_within_a_fifth() {
    let grid: Vec<SourceParams> = (0..14).map(|i| params(-(75.0 - 5.0 * i as f64) / 100.0)).collect();
    for c in critical_density_curve(&grid, true) {
        assert!(c.error.is_none());
        let rel = (c.density_approx - c.density_exact).abs() / c.density_exact;
        assert!(rel < 0.2, "k0I={}: {rel}", c.k0_im);
    }
}

#[test]
fn approximate_critical_density_degrades_for_wide_resonances() {
    let grid = [params(-0.8), params(-0.9)];
    let errs: Vec<f64> = critical_density_curve(&grid, true)
        .iter()
        .map(|c| (c.density_approx - c.density_exact).abs() / c.density_exact)
        .collect();
    assert!(errs[0] > 0.2 && errs[1] > errs[0], "{errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ratio_is_component_quotient(k in -0.95..-0.05f64, x in 0.01..30.0f64, t in 0.05..100.0f64) {
        let p = params(k);
        let q = pt(x, t);
        prop_assume!((t - p.traversal_time(x).norm()).abs() > 1e-3 * t);
        let direct = evaluate_pole(&p, q).norm() / evaluate_saddle(&p, q).unwrap().norm();
        prop_assert!((ratio_r(&p, q).unwrap() / direct - 1.0).abs() < 1e-10);
    }
}
