//! Faddeeva function `w(z) = exp(-z^2) erfc(-iz)` and friends.
//!
//! The upper half-plane is evaluated with a region split: a Laplace continued
//! fraction for large `|z|` and the exponentially convergent sums of
//! Zaghloul & Ali (ACM TOMS 916) elsewhere. The lower half-plane goes through
//! the reflection `w(z) = 2 exp(-z^2) - w(-z)`, which refuses to run once
//! `exp(-z^2)` would overflow.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const SQRT_PI: f64 = 1.772_453_850_905_516_f64;
pub const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3_f64;

/// Smallest `|z|` for which [`faddeeva_asymptotic`] is accepted.
pub const ASYMPTOTIC_FLOOR: f64 = 3.0;

/// `Re(-z^2)` above this is rejected in the lower half-plane.
pub fn overflow_threshold() -> f64 {
    0.9 * f64::MAX.ln()
}

/// Faddeeva function `w(z)`.
pub fn faddeeva(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite argument {z}")));
    }
    if z.im >= 0.0 {
        return Ok(w_upper(z));
    }
    let e = exp_neg_sq(z)?;
    Ok(2.0 * e - w_upper(-z))
}

/// Truncated large-`|z|` expansion
/// `i/(sqrt(pi) z) [1 + sum_{m=1}^{m_max} (2m-1)!!/(2z^2)^m] + 2 exp(-z^2) Theta(-Im z)`.
///
/// On the real axis the step function is taken as 1/2.
pub fn faddeeva_asymptotic(z: Complex64, m_max: usize) -> Result<Complex64> {
    let modulus = z.norm();
    if !(modulus >= ASYMPTOTIC_FLOOR) || !modulus.is_finite() {
        return Err(Error::AsymptoticDomain {
            modulus,
            floor: ASYMPTOTIC_FLOOR,
        });
    }
    let inv_2z2 = 1.0 / (2.0 * z * z);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for m in 1..=m_max {
        term *= (2 * m - 1) as f64 * inv_2z2;
        sum += term;
    }
    let mut w = Complex64::i() * FRAC_1_SQRT_PI / z * sum;
    let step = if z.im < 0.0 {
        1.0
    } else if z.im == 0.0 {
        0.5
    } else {
        0.0
    };
    if step > 0.0 {
        w += 2.0 * step * exp_neg_sq(z)?;
    }
    Ok(w)
}

/// `dw/dz`.
///
/// Uses `w'(z) = -2z w(z) + 2i/sqrt(pi)` at moderate `|z|`. Far out the
/// identity cancels catastrophically, so the derivative of the asymptotic
/// series is used instead (plus the reflected exponential below the axis).
pub fn faddeeva_derivative(z: Complex64) -> Result<Complex64> {
    const FAR: f64 = 30.0;
    if z.norm() > FAR && z.norm().is_finite() {
        if z.im >= 0.0 {
            return Ok(asymptotic_derivative_upper(z));
        }
        // w(z) = 2e^{-z^2} - w(-z)  =>  w'(z) = -4z e^{-z^2} + w'(-z)
        let e = exp_neg_sq(z)?;
        return Ok(-4.0 * z * e + asymptotic_derivative_upper(-z));
    }
    let w = faddeeva(z)?;
    Ok(-2.0 * z * w + Complex64::new(0.0, 2.0 * FRAC_1_SQRT_PI))
}

/// Scaled complementary error function `exp(y^2) erfc(y)` for real `y >= 0`.
pub fn erfcx(y: f64) -> f64 {
    if y < 26.0 {
        (y * y).exp() * libm::erfc(y)
    } else {
        // asymptotic series, terms shrink by at least 40/(2y^2) < 0.03
        let inv = -1.0 / (2.0 * y * y);
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..20 {
            term *= (2 * m - 1) as f64 * inv;
            sum += term;
        }
        FRAC_1_SQRT_PI / y * sum
    }
}

fn exp_neg_sq(z: Complex64) -> Result<Complex64> {
    // -z^2 = (y - x)(x + y) - 2ixy
    let re = (z.im - z.re) * (z.re + z.im);
    if re > overflow_threshold() {
        return Err(Error::FaddeevaOverflow { re: z.re, im: z.im });
    }
    Ok(Complex64::new(re, -2.0 * z.re * z.im).exp())
}

fn asymptotic_derivative_upper(z: Complex64) -> Complex64 {
    // d/dz of i/sqrt(pi) sum_m (2m-1)!!/(2^m z^{2m+1})
    // = -i/sqrt(pi) sum_m (2m+1)!!/(2^m z^{2m+2})
    let inv_z2 = 1.0 / (z * z);
    let mut term = inv_z2;
    let mut sum = term;
    for m in 1..40 {
        term *= (2 * m + 1) as f64 * 0.5 * inv_z2;
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    -Complex64::i() * FRAC_1_SQRT_PI * sum
}

/// w(z) for Im z >= 0.
fn w_upper(z: Complex64) -> Complex64 {
    let x = z.re.abs();
    let y = z.im;
    if y > 7.0 || (x > 6.0 && (y > 0.1 || (x > 8.0 && y > 1e-10) || x > 28.0)) {
        return continued_fraction(z);
    }
    if x < 10.0 {
        exponential_sums(z)
    } else {
        exponential_sums_large_x(z)
    }
}

/// Laplace continued fraction `w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...))))`.
///
/// The depth fit follows Johnson's Faddeeva package.
fn continued_fraction(z: Complex64) -> Complex64 {
    let x = z.re.abs();
    let ya = z.im;
    let i_over_sqrt_pi = Complex64::new(0.0, FRAC_1_SQRT_PI);
    if x + ya > 1e7 {
        return i_over_sqrt_pi / z;
    }
    if x + ya > 4000.0 {
        return i_over_sqrt_pi * z / (z * z - 0.5);
    }
    const C0: f64 = 3.9;
    const C1: f64 = 11.398;
    const C2: f64 = 0.08254;
    const C3: f64 = 0.1421;
    const C4: f64 = 0.2023;
    let depth = (C0 + C1 / (C2 * x + C3 * ya + C4)).floor();
    let mut nu = 0.5 * (depth - 1.0);
    let mut w = z;
    while nu > 0.4 {
        w = z - nu / w;
        nu -= 0.5;
    }
    i_over_sqrt_pi / w
}

// Parameters of the sums for full double precision:
// a = pi / sqrt(-ln(eps/2)), c = 2a/pi.
const A: f64 = 0.518_321_480_430_085_929_872;
const A2: f64 = 0.268_657_157_075_235_951_582;
const C: f64 = 0.329_973_702_884_629_072_537;

fn sinc(x: f64, sin_x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        sin_x / x
    }
}

fn sinh_taylor(x: f64) -> f64 {
    x * (1.0 + x * x * (1.0 / 6.0 + x * x / 120.0))
}

/// Zaghloul & Ali sums for |Re z| < 10, 0 <= Im z <= 7.
fn exponential_sums(z: Complex64) -> Complex64 {
    let eps = f64::EPSILON;
    let x = z.re.abs();
    let y = z.im;
    let y2 = y * y;

    let mut sum1 = 0.0;
    let mut sum2 = 0.0;
    let mut sum3 = 0.0;
    let mut sum4 = 0.0;
    let mut sum5 = 0.0;
    let mut prod2ax = 1.0;
    let mut prodm2ax = 1.0;

    let expx2 = if x < 5e-4 {
        // sum5 accumulates (sum5 - sum4) directly to avoid cancellation
        let x2 = x * x;
        let expx2 = 1.0 - x2 * (1.0 - 0.5 * x2);
        let ax2 = 2.0 * A * x;
        let exp2ax = 1.0 + ax2 * (1.0 + ax2 * (0.5 + ax2 / 6.0));
        let expm2ax = 1.0 - ax2 * (1.0 - ax2 * (0.5 - ax2 / 6.0));
        let mut n = 1.0_f64;
        loop {
            let coef = (-A2 * n * n).exp() * expx2 / (A2 * n * n + y2);
            prod2ax *= exp2ax;
            prodm2ax *= expm2ax;
            sum1 += coef;
            sum2 += coef * prodm2ax;
            sum3 += coef * prod2ax;
            sum5 += coef * (2.0 * A) * n * sinh_taylor(2.0 * A * n * x);
            if coef * prod2ax < eps * sum3 {
                break;
            }
            n += 1.0;
        }
        expx2
    } else {
        let expx2 = (-x * x).exp();
        let exp2ax = (2.0 * A * x).exp();
        let expm2ax = 1.0 / exp2ax;
        let mut n = 1.0_f64;
        loop {
            let coef = (-A2 * n * n).exp() * expx2 / (A2 * n * n + y2);
            prod2ax *= exp2ax;
            prodm2ax *= expm2ax;
            sum1 += coef;
            sum2 += coef * prodm2ax;
            sum4 += coef * prodm2ax * (A * n);
            sum3 += coef * prod2ax;
            sum5 += coef * prod2ax * (A * n);
            if coef * prod2ax * (A * n) < eps * sum5 {
                break;
            }
            n += 1.0;
        }
        expx2
    };

    let expx2_erfcx = expx2 * erfcx(y);
    let base = if y > 5.0 {
        // the imaginary parts of these terms cancel
        let sinxy = (x * y).sin();
        Complex64::new(
            (expx2_erfcx - C * y * sum1) * (2.0 * x * y).cos()
                + (C * x * expx2) * sinxy * sinc(x * y, sinxy),
            0.0,
        )
    } else {
        let xs = z.re;
        let sinxy = (xs * y).sin();
        let sin2xy = (2.0 * xs * y).sin();
        let cos2xy = (2.0 * xs * y).cos();
        let coef1 = expx2_erfcx - C * y * sum1;
        let coef2 = C * xs * expx2;
        Complex64::new(
            coef1 * cos2xy + coef2 * sinxy * sinc(xs * y, sinxy),
            coef2 * sinc(2.0 * xs * y, sin2xy) - coef1 * sin2xy,
        )
    };
    base + Complex64::new(
        0.5 * C * y * (sum2 + sum3),
        0.5 * C * (sum5 - sum4).copysign(z.re),
    )
}

/// Sums for 10 <= |Re z| <= 28 and Im z <= 1e-10, where only sum3 and sum5
/// survive. The series is summed outwards from its peak at n0 ~ x/a.
fn exponential_sums_large_x(z: Complex64) -> Complex64 {
    let eps = f64::EPSILON;
    let x = z.re.abs();
    let y = z.im;
    let y2 = y * y;

    let n0 = (x / A + 0.5).floor();
    let dx = A * n0 - x;
    let mut sum3 = (-dx * dx).exp() / (A2 * n0 * n0 + y2);
    let mut sum5 = A * n0 * sum3;
    let exp1 = (4.0 * A * dx).exp();
    let mut exp1dn = 1.0;
    let mut dn = 1.0_f64;
    let mut converged = false;
    while dn < n0 {
        let np = n0 + dn;
        let nm = n0 - dn;
        let mut tp = (-(A * dn + dx) * (A * dn + dx)).exp();
        exp1dn *= exp1;
        let mut tm = tp * exp1dn;
        tp /= A2 * np * np + y2;
        tm /= A2 * nm * nm + y2;
        sum3 += tp + tm;
        sum5 += A * (np * tp + nm * tm);
        if A * (np * tp + nm * tm) < eps * sum5 {
            converged = true;
            break;
        }
        dn += 1.0;
    }
    if !converged {
        loop {
            let np = n0 + dn;
            let tp = (-(A * dn + dx) * (A * dn + dx)).exp() / (A2 * np * np + y2);
            sum3 += tp;
            sum5 += A * np * tp;
            if A * np * tp < eps * sum5 {
                break;
            }
            dn += 1.0;
        }
    }
    Complex64::new((-x * x).exp(), 0.0)
        + Complex64::new(0.5 * C * y * sum3, (0.5 * C * sum5).copysign(z.re))
}
