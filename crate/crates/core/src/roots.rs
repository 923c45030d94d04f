//! Bracketing root finding and one-dimensional minimisation.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct BisectOptions {
    /// Stop once the bracket is narrower than `x_rel * |x|`.
    pub x_rel: f64,
    /// Stop once `|f(x)|` drops below this.
    pub f_abs: f64,
    pub max_iter: usize,
}

impl Default for BisectOptions {
    fn default() -> Self {
        Self {
            x_rel: 1e-14,
            f_abs: 0.0,
            max_iter: 200,
        }
    }
}

/// Bisection on `[lo, hi]`; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    opts: BisectOptions,
) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::NoBracket { lo, hi });
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..opts.max_iter {
        mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.abs() <= opts.f_abs || f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= opts.x_rel * mid.abs() {
            break;
        }
    }
    Ok(mid)
}

/// `n` points from `a` to `b` inclusive, evenly spaced in log.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > 0.0);
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                a
            } else if i == n - 1 {
                b
            } else {
                (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// `n` points from `a` to `b` inclusive, evenly spaced.
pub fn lin_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_cube_root_of_two() {
        let r = bisect(|x| x * x * x - 2.0, 0.0, 2.0, BisectOptions::default()).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_needs_sign_change() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, BisectOptions::default()),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn grids_hit_endpoints() {
        let g = log_grid(1e-4, 13.0, 100);
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[99], 13.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let l = lin_grid(-0.9, -0.05, 35);
        assert_eq!(l[34], -0.05);
    }

    #[test]
    fn golden_section_parabola() {
        let (x, fx) = golden_section_min(|x| (x - 1.3).powi(2) + 0.5, -4.0, 7.0, 1e-9);
        assert!((x - 1.3).abs() < 1e-8);
        assert!((fx - 0.5).abs() < 1e-15);
    }
}
