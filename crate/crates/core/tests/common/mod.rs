//! Independent reference values for the integration tests.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use postexp::quad::{integrate, integrate_with_points, Tolerance};
use postexp::source_model::SourceParams;

fn tight() -> Tolerance {
    Tolerance {
        abs: 0.0,
        rel: 1e-12,
        max_intervals: 50_000,
    }
}

/// `psi(x, t)` straight from its contour-integral form
/// `-(1/2 pi i) int exp(-i(k^2 t - k x)) (1/(k + k0) + 1/(k - k0)) dk`,
/// along a ray from `inf e^{3 i pi/4}` to 0 and a ray from 0 at angle
/// `-|arg k0|/2` out to infinity. Neither pole lies between this path and
/// the original one, and no error-function identities are involved.
pub fn contour_psi(p: &SourceParams, x: f64, t: f64) -> Complex64 {
    let k0 = p.k0();
    let f = |k: Complex64| {
        let phase = -Complex64::i() * (k * k * t - k * x);
        phase.exp() * (1.0 / (k + k0) + 1.0 / (k - k0))
    };
    let theta = 0.5 * k0.arg().abs();
    let d1 = Complex64::from_polar(1.0, 3.0 * FRAC_PI_4);
    let d2 = Complex64::from_polar(1.0, -theta);
    // leg 1 decays like exp(-r^2 t); leg 2 like exp(-r^2 t sin 2theta + r x sin theta)
    let r1 = (60.0 / t).sqrt();
    let peak = x * theta.sin() / (2.0 * t * (2.0 * theta).sin());
    let r2 = peak + (80.0 / (t * (2.0 * theta).sin())).sqrt();
    let leg1 = integrate(|r: f64| f(d1 * r) * d1, 0.0, r1, tight()).unwrap().value;
    let marks: Vec<f64> = (1..64).map(|i| r2 * i as f64 / 64.0).collect();
    let leg2 = integrate_with_points(|r: f64| f(d2 * r) * d2, 0.0, r2, &marks, tight())
        .unwrap()
        .value;
    -(leg2 - leg1) / (2.0 * PI * Complex64::i())
}

/// `w(z) = (i/pi) int exp(-s^2)/(z - s) ds` for `Im z > 0`.
pub fn faddeeva_integral(z: Complex64) -> Complex64 {
    assert!(z.im > 0.0);
    let f = |s: f64| Complex64::new((-s * s).exp(), 0.0) / (z - s);
    let marks = [z.re - 3.0 * z.im, z.re - z.im, z.re, z.re + z.im, z.re + 3.0 * z.im];
    let v = integrate_with_points(f, -12.0, 12.0, &marks, tight()).unwrap().value;
    Complex64::i() / PI * v
}

/// `J_1(x) = (1/pi) int_0^pi cos(s - x sin s) ds`, trapezoid rule on a
/// periodic integrand, so convergence is geometric.
pub fn bessel_j1(x: f64) -> f64 {
    let n = 4 * (x.abs() as usize) + 200;
    let h = PI / n as f64;
    let f = |s: f64| (s - x * s.sin()).cos();
    let mut sum = 0.5 * (f(0.0) + f(PI));
    for i in 1..n {
        sum += f(i as f64 * h);
    }
    sum * h / PI
}

/// Deterministic low-discrepancy points in `[0, 1)`.
pub fn weyl(i: usize, dim: usize) -> f64 {
    const A: [f64; 3] = [0.618_033_988_749_895, 0.414_213_562_373_095, 0.732_050_807_568_877];
    ((i as f64 + 1.0) * A[dim % 3]).fract()
}
