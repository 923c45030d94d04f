//! Where and when the exponential pole signal gives way to the algebraic
//! saddle tail.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalization::{total_emitted, NormalizationResult};
use crate::roots::{bisect, golden_section_min, log_grid, BisectOptions};
use crate::source_model::{
    density, evaluate_approx, pole_crossed, SourceParams, SpaceTimePoint, SINGULAR_GAP,
};

/// Accepted `|R - 1|` at a reported transition.
pub const RATIO_TOL: f64 = 1e-6;
const SCAN_POINTS: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionMethod {
    /// Root of the full pole/saddle modulus ratio.
    ExactRatio,
    /// Root of the large-time form `t^3/2 = x exp(-Im(omega0 t - k0 x)) / (2 sqrt(pi) |k0|^2)`.
    LargeTime,
}

impl TransitionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ExactRatio => "exact_ratio",
            Self::LargeTime => "large_time",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionPoint {
    pub x: f64,
    pub t_p: f64,
    pub density_raw: f64,
    pub density_normalized: Option<f64>,
    pub method: TransitionMethod,
    pub valid: bool,
    pub note: Option<String>,
}

/// `|psi_0| / |psi_s|` in closed form.
pub fn ratio_r(p: &SourceParams, pt: SpaceTimePoint) -> Result<f64> {
    let tau = p.traversal_time(pt.x);
    let gap = pt.t * pt.t - tau * tau;
    if gap.norm() < SINGULAR_GAP {
        return Err(Error::SingularConfiguration {
            x: pt.x,
            t: pt.t,
            gap: gap.norm(),
        });
    }
    if pt.x == 0.0 {
        return Err(Error::InvalidParameter("ratio undefined at x = 0".into()));
    }
    let k0 = p.k0();
    let (t, x) = (pt.t, pt.x);
    let exponent = (p.omega0() * t - k0 * x).im;
    let q = tau * tau / (t * t);
    let factor = (1.0 + q.norm_sqr() - 2.0 * q.re).max(0.0).sqrt();
    Ok(2.0 * PI.sqrt() * k0.norm_sqr() * t.powf(1.5) / x * exponent.exp() * factor)
}

/// `t^3/2 / RHS - 1` for the large-time transition equation; shares its sign
/// convention with `R - 1`.
fn large_time_residual(p: &SourceParams, x: f64, t: f64) -> f64 {
    let k0 = p.k0();
    let log_rhs = x.ln() - (p.omega0() * t - k0 * x).im - (2.0 * PI.sqrt() * k0.norm_sqr()).ln();
    (1.5 * t.ln() - log_rhs).exp() - 1.0
}

/// Time at which the `k0` pole is crossed at position `x`.
pub fn pole_crossing_time(p: &SourceParams, x: f64) -> f64 {
    x / (2.0 * (1.0 + p.k0_im()))
}

/// Scan window `[max(x/2, 0.01)/10, 1000/decay_rate]`.
pub fn scan_window(p: &SourceParams, x: f64) -> (f64, f64) {
    ((0.5 * x).max(0.01) * 0.1, 1e3 / p.decay_rate())
}

fn residual(p: &SourceParams, x: f64, t: f64, method: TransitionMethod) -> Option<f64> {
    match method {
        TransitionMethod::ExactRatio => SpaceTimePoint::new(x, t)
            .and_then(|pt| ratio_r(p, pt))
            .ok()
            .map(|r| r - 1.0),
        TransitionMethod::LargeTime => Some(large_time_residual(p, x, t)),
    }
}

/// First downward crossing of `R = 1` after the pole has been crossed.
pub fn transition_time(p: &SourceParams, x: f64, method: TransitionMethod) -> Result<TransitionPoint> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!("x must be positive, got {x}")));
    }
    let (lo, hi) = scan_window(p, x);
    let t_c = pole_crossing_time(p, x);
    let mut grid = log_grid(lo, hi, SCAN_POINTS);
    let onset = t_c * (1.0 + 1e-9);
    if onset > lo && onset < hi {
        grid.push(onset);
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let samples: Vec<(f64, f64)> = grid
        .into_iter()
        .filter(|&t| t > t_c)
        .filter_map(|t| residual(p, x, t, method).map(|g| (t, g)))
        .collect();

    let invalid = |note: &str| TransitionPoint {
        x,
        t_p: f64::NAN,
        density_raw: f64::NAN,
        density_normalized: None,
        method,
        valid: false,
        note: Some(note.to_string()),
    };

    let Some(w) = samples.windows(2).find(|w| w[0].1 > 0.0 && w[1].1 <= 0.0) else {
        return Ok(invalid("no downward crossing of R = 1 with the pole crossed"));
    };
    let (a, b) = (w[0].0, w[1].0);
    let opts = BisectOptions {
        x_rel: 1e-15,
        f_abs: 0.1 * RATIO_TOL,
        max_iter: 200,
    };
    let t_p = bisect(|t| residual(p, x, t, method).unwrap_or(f64::NAN), a, b, opts)?;
    let pt = SpaceTimePoint::new(x, t_p)?;
    let achieved = residual(p, x, t_p, method).unwrap_or(f64::NAN);
    let crossed = pole_crossed(p, pt);
    let density_raw = density(p, pt)?;
    let valid = crossed && achieved.abs() < RATIO_TOL;
    let note = if !crossed {
        Some("root found but pole not crossed".to_string())
    } else if !valid {
        Some(format!("root tolerance not reached: residual {achieved:e}"))
    } else {
        None
    };
    Ok(TransitionPoint {
        x,
        t_p,
        density_raw,
        density_normalized: None,
        method,
        valid,
        note,
    })
}

/// `transition_time` with the density also divided by the emitted number.
pub fn transition_time_normalized(
    p: &SourceParams,
    x: f64,
    method: TransitionMethod,
    n: &NormalizationResult,
) -> Result<TransitionPoint> {
    let mut tp = transition_time(p, x, method)?;
    if tp.valid {
        tp.density_normalized = Some(n.normalize(tp.density_raw));
    }
    Ok(tp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    pub x: f64,
    pub t_p: f64,
    /// False when the scanned curve was not unimodal and the grid argmin is returned.
    pub unimodal: bool,
}

fn tp_or_inf(p: &SourceParams, x: f64) -> f64 {
    match transition_time(p, x, TransitionMethod::ExactRatio) {
        Ok(tp) if tp.valid => tp.t_p,
        _ => f64::INFINITY,
    }
}

/// Grid on which the turning point is searched: `[0.05, 3] / |k0I|`.
pub fn turning_point_grid(p: &SourceParams) -> Vec<f64> {
    let s = 1.0 / p.k0_im().abs();
    log_grid(0.05 * s, 3.0 * s, 30)
}

/// Position where `t_p(x)` stops falling and starts rising.
pub fn tp_turning_point(p: &SourceParams) -> Result<TurningPoint> {
    let xs = turning_point_grid(p);
    let ts: Vec<f64> = xs.iter().map(|&x| tp_or_inf(p, x)).collect();
    let (i, &t_min) = ts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .ok_or_else(|| Error::Inconsistent("empty turning-point grid".into()))?;
    if !t_min.is_finite() {
        return Err(Error::Inconsistent("no valid transition on the turning-point grid".into()));
    }
    let falling = ts[..=i].windows(2).all(|w| w[1] < w[0]);
    let rising = ts[i..].windows(2).all(|w| w[1] > w[0]);
    if !(falling && rising) || i == 0 || i == xs.len() - 1 {
        return Ok(TurningPoint {
            x: xs[i],
            t_p: t_min,
            unimodal: false,
        });
    }
    let (x, t_p) = golden_section_min(|x| tp_or_inf(p, x), xs[i - 1], xs[i + 1], 1e-6 * xs[i]);
    Ok(TurningPoint { x, t_p, unimodal: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x_max: f64,
    pub t_p: f64,
}

/// Scan ceiling for the critical distance, `100/|k0I|`.
pub fn critical_ceiling(p: &SourceParams) -> f64 {
    100.0 / p.k0_im().abs()
}

fn has_transition(p: &SourceParams, x: f64) -> Result<bool> {
    Ok(transition_time(p, x, TransitionMethod::ExactRatio)?.valid)
}

/// Largest `x` with a valid transition.
pub fn critical_distance(p: &SourceParams) -> Result<CriticalPoint> {
    let ceiling = critical_ceiling(p);
    let xs = log_grid(1e-3, ceiling, 200);
    let mut last_valid = None;
    let mut first_invalid = None;
    for &x in &xs {
        if has_transition(p, x)? {
            last_valid = Some(x);
        } else if last_valid.is_some() {
            first_invalid = Some(x);
            break;
        }
    }
    let Some(mut lo) = last_valid else {
        return Err(Error::Inconsistent("no transition found at any scanned x".into()));
    };
    let Some(mut hi) = first_invalid else {
        return Err(Error::RangeExhausted { ceiling });
    };
    while (hi - lo) > 1e-3 * lo {
        let mid = 0.5 * (lo + hi);
        if has_transition(p, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tp = transition_time(p, lo, TransitionMethod::ExactRatio)?;
    Ok(CriticalPoint { x_max: lo, t_p: tp.t_p })
}

/// `(Gamma/epsilon, purely non-exponential)` with `Gamma/epsilon = 4|k0I|`.
pub fn jittoh_criterion(p: &SourceParams) -> (f64, bool) {
    let ratio = 4.0 * p.k0_im().abs();
    (ratio, ratio >= 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalDensityPoint {
    pub k0_im: f64,
    pub x_max: f64,
    pub t_p: f64,
    pub density_exact: f64,
    pub density_approx: f64,
    pub normalized: bool,
    pub error: Option<String>,
}

fn critical_density(p: &SourceParams, normalized: bool) -> Result<CriticalDensityPoint> {
    let c = critical_distance(p)?;
    let pt = SpaceTimePoint::new(c.x_max, c.t_p)?;
    let scale = if normalized {
        1.0 / total_emitted(p)?.n_total
    } else {
        1.0
    };
    Ok(CriticalDensityPoint {
        k0_im: p.k0_im(),
        x_max: c.x_max,
        t_p: c.t_p,
        density_exact: density(p, pt)? * scale,
        density_approx: evaluate_approx(p, pt)?.norm_sqr() * scale,
        normalized,
        error: None,
    })
}

/// Density at `(x_max, t_p)` for each resonance; failing points are flagged.
pub fn critical_density_curve(grid: &[SourceParams], normalized: bool) -> Vec<CriticalDensityPoint> {
    grid.par_iter()
        .map(|p| {
            critical_density(p, normalized).unwrap_or_else(|e| CriticalDensityPoint {
                k0_im: p.k0_im(),
                x_max: f64::NAN,
                t_p: f64::NAN,
                density_exact: f64::NAN,
                density_approx: f64::NAN,
                normalized,
                error: Some(e.to_string()),
            })
        })
        .collect()
}
