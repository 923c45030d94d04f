//! Flux normalization: the current through the source point, integrated over
//! all time, counts the particles emitted into `x >= 0`. Dividing by it fixes
//! the total emission to one particle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_with_points, Tolerance};
use crate::source_model::{density, u_values, SourceParams, SpaceTimePoint};
use crate::specfun::{faddeeva, FRAC_1_SQRT_PI};

/// Lower quadrature limit in time; `[0, T_HEAD]` is handled by a power-law fit.
pub const T_HEAD: f64 = 1e-8;
/// Upper quadrature limit in units of the lifetime.
pub const CUT_LIFETIMES: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationResult {
    pub n_total: f64,
    pub t_cut: f64,
    pub head_estimate: f64,
    pub tail_estimate: f64,
    /// Fitted `p` of the `C t^-p` tail model over the final decade.
    pub tail_exponent: f64,
    pub abs_error_estimate: f64,
    /// Set when the tail exceeds 1% of the total.
    pub tail_flagged: bool,
}

impl NormalizationResult {
    pub fn normalize(&self, raw_density: f64) -> f64 {
        raw_density / self.n_total
    }
}

/// Current `J(0, t)` through the source point.
///
/// At `x = 0` the two Faddeeva arguments are negatives of each other, so the
/// sum is rewritten with the reflection identity and only `w` in the upper
/// half-plane is evaluated. This keeps full relative accuracy after the
/// exponential signal has fallen below rounding level.
pub fn source_current(p: &SourceParams, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let pt = SpaceTimePoint::new(0.0, t)?;
    let (u, _) = u_values(p, pt);
    let psi = (-Complex64::i() * p.omega0() * t).exp();
    let w = faddeeva(u).map_err(|e| Error::EvaluationDomain {
        x: 0.0,
        t,
        reason: e.to_string(),
    })?;
    let du = Complex64::new(1.0, 1.0) / (2.0 * (2.0 * t).sqrt());
    let bracket = 4.0 * u * psi - 4.0 * u * w + Complex64::new(0.0, 4.0 * FRAC_1_SQRT_PI);
    let dpsi = 0.5 * du * bracket;
    Ok(2.0 * (psi.conj() * dpsi).im)
}

fn tol() -> Tolerance {
    Tolerance {
        abs: 0.0,
        rel: 1e-13,
        max_intervals: 20_000,
    }
}

/// `int_a^b J(0,t) dt` through `t = s^2`, which removes the `t^-1/2` edge.
fn current_integral(p: &SourceParams, a: f64, b: f64, lifetime_marks: bool) -> Result<(f64, f64)> {
    let mut failure = None;
    let f = |s: f64| match source_current(p, s * s) {
        Ok(j) => 2.0 * s * j,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let (sa, sb) = (a.sqrt(), b.sqrt());
    let marks: Vec<f64> = if lifetime_marks {
        (1..=CUT_LIFETIMES as usize)
            .map(|k| (k as f64 * p.lifetime()).sqrt())
            .collect()
    } else {
        Vec::new()
    };
    let r = integrate_with_points(f, sa, sb, &marks, tol())?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((r.value, r.abs_error))
}

/// Power law `C t^q` through the currents at `T_HEAD` and `T_HEAD/10`,
/// integrated over `[0, T_HEAD]`. Returns the estimate and its spread against
/// a fit through `T_HEAD/100`.
fn head_contribution(p: &SourceParams) -> Result<(f64, f64)> {
    let j0 = source_current(p, T_HEAD)?;
    let fit = |t_lo: f64| -> Result<f64> {
        let j1 = source_current(p, t_lo)?;
        let q = (j0 / j1).ln() / (T_HEAD / t_lo).ln();
        if !(q > -1.0) {
            return Err(Error::Inconsistent(format!(
                "source current exponent {q} near t = 0 is not integrable"
            )));
        }
        Ok(j0 * T_HEAD / (q + 1.0))
    };
    let a = fit(T_HEAD / 10.0)?;
    let b = fit(T_HEAD / 100.0)?;
    Ok((a, (a - b).abs()))
}

/// Least-squares slope and intercept of `ln y` against `ln x`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// `int_cut^inf C x^-p dx` from a fit of `f` on `[cut/10, cut]`.
fn algebraic_tail<F: FnMut(f64) -> Result<f64>>(mut f: F, cut: f64) -> Result<(f64, f64)> {
    let xs = crate::roots::log_grid(cut / 10.0, cut, 11);
    let ys = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    // the current may flow back into the source late on; fit the magnitude
    let sign = if ys.iter().all(|&y| y < 0.0) { -1.0 } else { 1.0 };
    let mags: Vec<f64> = ys.iter().map(|y| sign * y).collect();
    let (slope, intercept) = loglog_fit(&xs, &mags)
        .ok_or_else(|| Error::InsufficientWindow("tail decade changes sign".into()))?;
    let p = -slope;
    if !(p > 1.0) {
        return Err(Error::Inconsistent(format!("tail exponent {p} is not integrable")));
    }
    let tail = sign * intercept.exp() * cut.powf(1.0 - p) / (p - 1.0);
    Ok((tail, p))
}

/// Total number of particles emitted, `int_0^inf J(0,t) dt`.
pub fn total_emitted(p: &SourceParams) -> Result<NormalizationResult> {
    let t_cut = CUT_LIFETIMES * p.lifetime();
    let (head, head_err) = head_contribution(p)?;
    let (body, body_err) = current_integral(p, T_HEAD, t_cut, true)?;
    let (tail, tail_exponent) = algebraic_tail(|t| source_current(p, t), t_cut)?;
    let n_total = head + body + tail;
    if !(n_total > 0.0) {
        return Err(Error::Inconsistent(format!("emitted particle number {n_total} is not positive")));
    }
    Ok(NormalizationResult {
        n_total,
        t_cut,
        head_estimate: head,
        tail_estimate: tail,
        tail_exponent,
        abs_error_estimate: head_err + body_err + tail.abs(),
        tail_flagged: tail.abs() > 0.01 * n_total,
    })
}

/// Particles emitted up to time `t`, `N+(t) = int_0^t J(0,t') dt'`.
pub fn emitted_until(p: &SourceParams, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let (head, _) = head_contribution(p)?;
    if t <= T_HEAD {
        // rescale the fitted power law
        let q = (source_current(p, T_HEAD)? / source_current(p, T_HEAD / 10.0)?).log10();
        return Ok(head * (t / T_HEAD).powf(q + 1.0));
    }
    Ok(head + current_integral(p, T_HEAD, t, false)?.0)
}

/// Density of the wave normalized to one emitted particle.
pub fn normalized_density(p: &SourceParams, pt: SpaceTimePoint, n: &NormalizationResult) -> Result<f64> {
    Ok(n.normalize(density(p, pt)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialNorm {
    pub value: f64,
    pub x_cut: f64,
    pub tail_estimate: f64,
    pub tail_exponent: f64,
    pub abs_error_estimate: f64,
}

/// `int_0^inf |psi(x,t)|^2 dx`, with an algebraic tail beyond `x_cut`.
pub fn spatial_norm(p: &SourceParams, t: f64) -> Result<SpatialNorm> {
    let front = 2.0 * t;
    let x_cut = 100.0 * front + 50.0;
    let mut failure = None;
    let f = |x: f64| match SpaceTimePoint::new(x, t).and_then(|pt| density(p, pt)) {
        Ok(r) => r,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let marks = [0.5 * front, front, 2.0 * front, 5.0 * front, 20.0 * front];
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-10,
        max_intervals: 20_000,
    };
    let body = integrate_with_points(f, 0.0, x_cut, &marks, tol)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let (tail, tail_exponent) =
        algebraic_tail(|x| density(p, SpaceTimePoint::new(x, t)?), x_cut)?;
    Ok(SpatialNorm {
        value: body.value + tail,
        x_cut,
        tail_estimate: tail,
        tail_exponent,
        abs_error_estimate: body.abs_error + 0.1 * tail.abs(),
    })
}

/// Fixed-rule cross-check of the body integral, for comparing schemes.
pub fn total_emitted_fixed_rule(p: &SourceParams, panels: usize) -> Result<f64> {
    let t_cut = CUT_LIFETIMES * p.lifetime();
    let (head, _) = head_contribution(p)?;
    let mut failure = None;
    let body = crate::quad::gauss_legendre_composite(
        |s: f64| match source_current(p, s * s) {
            Ok(j) => 2.0 * s * j,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        T_HEAD.sqrt(),
        t_cut.sqrt(),
        panels,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(head + body)
}
