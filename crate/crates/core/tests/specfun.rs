mod common;

use num_complex::Complex64;
use postexp::specfun::{faddeeva, faddeeva_asymptotic, faddeeva_derivative};
use proptest::prelude::*;

use common::faddeeva_integral;

fn disc(r: f64, a: f64) -> Complex64 {
    Complex64::from_polar(5.0 * r.sqrt(), a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn reflection(r in 0.0..1.0f64, a in -3.2..3.2f64) {
        let z = disc(r, a);
        let (wm, wp, e) = (faddeeva(-z).unwrap(), faddeeva(z).unwrap(), 2.0 * (-z * z).exp());
        let scale = wm.norm().max(wp.norm()).max(e.norm());
        prop_assert!((wm + wp - e).norm() / scale < 1e-12);
    }

    #[test]
    fn conjugation(r in 0.0..1.0f64, a in -3.2..3.2f64) {
        let z = disc(r, a);
        let lhs = faddeeva((-z).conj()).unwrap();
        let rhs = faddeeva(z).unwrap().conj();
        prop_assert!((lhs - rhs).norm() / lhs.norm() < 1e-12);
    }

    #[test]
    fn real_axis_real_part(x in -8.0..8.0f64) {
        let w = faddeeva(Complex64::new(x, 0.0)).unwrap();
        prop_assert!((w.re - (-x * x).exp()).abs() < 1e-12);
    }

    #[test]
    fn matches_integral_oracle(re in -6.0..6.0f64, im in 0.05..6.0f64) {
        let z = Complex64::new(re, im);
        let a = faddeeva(z).unwrap();
        let b = faddeeva_integral(z);
        prop_assert!((a - b).norm() / b.norm() < 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn derivative_matches_finite_difference(re in -5.0..5.0f64, im in -1.5..5.0f64) {
        let z = Complex64::new(re, im);
        let h = 1e-5;
        let fd = (faddeeva(z + h).unwrap() - faddeeva(z - h).unwrap()) / (2.0 * h);
        let d = faddeeva_derivative(z).unwrap();
        prop_assert!((d - fd).norm() / d.norm().max(1e-3) < 1e-6);
    }
}

#[test]
fn asymptotic_series_improves_with_order() {
    let sample: Vec<Complex64> = (0..40)
        .map(|i| Complex64::from_polar(5.0 + 0.25 * i as f64, -1.4 + 0.07 * i as f64))
        .collect();
    let err = |m: usize| -> f64 {
        sample
            .iter()
            .map(|&z| {
                let w = faddeeva(z).unwrap();
                (faddeeva_asymptotic(z, m).unwrap() - w).norm() / w.norm()
            })
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = (0..=3).map(err).collect();
    for pair in errs.windows(2) {
        assert!(pair[1] < pair[0], "{errs:?}");
    }
}

#[test]
fn overflow_is_rejected() {
    assert!(faddeeva(Complex64::new(0.0, -30.0)).is_err());
    assert!(faddeeva(Complex64::new(30.0, 0.0)).is_ok());
}
