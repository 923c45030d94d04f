//! Wave emitted into `x >= 0` by a source whose amplitude at the origin decays
//! as `exp(-i omega0 t)` after being switched on at `t = 0`.
//!
//! Dimensionless units throughout: lengths in `1/Re K0`, the free equation is
//! `i psi_t = -psi_xx`, so `omega0 = k0^2` with `k0 = 1 + i k0I`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{faddeeva, faddeeva_derivative};

/// `|t^2 - tau^2|` below this is treated as the saddle-pole coincidence.
pub const SINGULAR_GAP: f64 = 1e-12;

/// A decaying resonance, fixed by the imaginary part of `k0 = 1 + i k0I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    k0_im: f64,
}

impl SourceParams {
    pub fn new(k0_im: f64) -> Result<Self> {
        if !(k0_im > -1.0 && k0_im < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "k0I must lie in (-1, 0), got {k0_im}"
            )));
        }
        Ok(Self { k0_im })
    }

    pub fn k0_im(&self) -> f64 {
        self.k0_im
    }

    pub fn k0(&self) -> Complex64 {
        Complex64::new(1.0, self.k0_im)
    }

    pub fn omega0(&self) -> Complex64 {
        let k0 = self.k0();
        k0 * k0
    }

    /// Density lifetime at the source, `1/(4|k0I|)`.
    pub fn lifetime(&self) -> f64 {
        1.0 / (4.0 * self.k0_im.abs())
    }

    pub fn decay_rate(&self) -> f64 {
        4.0 * self.k0_im.abs()
    }

    /// Complex traversal time `x/(2 k0)`.
    pub fn traversal_time(&self, x: f64) -> Complex64 {
        x / (2.0 * self.k0())
    }
}

/// `k = sqrt(omega)` with the branch cut just below the negative real axis,
/// so points on the axis itself map to the positive imaginary half-line.
pub fn wavenumber_from_frequency(omega: Complex64) -> Complex64 {
    let omega = if omega.im == 0.0 {
        Complex64::new(omega.re, 0.0)
    } else {
        omega
    };
    omega.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: f64,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: f64, t: f64) -> Result<Self> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::InvalidParameter(format!("x must be finite and >= 0, got {x}")));
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidParameter(format!("t must be finite and > 0, got {t}")));
        }
        Ok(Self { x, t })
    }
}

/// Exact wave and its asymptotic pieces at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveDecomposition {
    pub psi_exact: Complex64,
    /// `None` on the saddle-pole coincidence where the saddle term diverges.
    pub psi_saddle: Option<Complex64>,
    pub psi_pole: Complex64,
    pub pole_crossed: bool,
    pub u_plus: Complex64,
    pub u_minus: Complex64,
    pub tau: Complex64,
    pub k_saddle: f64,
}

fn one_plus_i() -> Complex64 {
    Complex64::new(1.0, 1.0)
}

/// `(u0+, u0-)`, the images of the poles `+k0` and `-k0` in the variable that
/// is real along the steepest-descent line through `k_s = x/(2t)`.
pub fn u_values(p: &SourceParams, pt: SpaceTimePoint) -> (Complex64, Complex64) {
    let k0 = p.k0();
    let ks = pt.x / (2.0 * pt.t);
    let scale = one_plus_i() * (pt.t / 2.0).sqrt();
    (scale * (k0 - ks), -scale * (k0 + ks))
}

/// Pole term enters once `Im u0+ > 0`.
pub fn pole_crossed(p: &SourceParams, pt: SpaceTimePoint) -> bool {
    u_values(p, pt).0.im > 0.0
}

fn saddle_phase(pt: SpaceTimePoint) -> Complex64 {
    // exp(i k_s^2 t) = exp(i x^2 / (4t))
    Complex64::new(0.0, pt.x * pt.x / (4.0 * pt.t)).exp()
}

pub(crate) fn psi_with<W>(p: &SourceParams, pt: SpaceTimePoint, w: W) -> Result<Complex64>
where
    W: Fn(Complex64) -> Result<Complex64>,
{
    let (up, um) = u_values(p, pt);
    let domain = |e: Error| Error::EvaluationDomain {
        x: pt.x,
        t: pt.t,
        reason: e.to_string(),
    };
    let wp = w(-up).map_err(domain)?;
    let wm = w(-um).map_err(domain)?;
    Ok(0.5 * saddle_phase(pt) * (wp + wm))
}

/// Exact wave function together with its saddle/pole split.
pub fn evaluate_exact(p: &SourceParams, pt: SpaceTimePoint) -> Result<WaveDecomposition> {
    let (u_plus, u_minus) = u_values(p, pt);
    let psi_exact = psi_with(p, pt, faddeeva)?;
    Ok(WaveDecomposition {
        psi_exact,
        psi_saddle: evaluate_saddle(p, pt).ok(),
        psi_pole: evaluate_pole(p, pt),
        pole_crossed: u_plus.im > 0.0,
        u_plus,
        u_minus,
        tau: p.traversal_time(pt.x),
        k_saddle: pt.x / (2.0 * pt.t),
    })
}

/// `psi(x, t)`, zero before the source is switched on.
pub fn wave_function(p: &SourceParams, x: f64, t: f64) -> Result<Complex64> {
    if t <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    psi_with(p, SpaceTimePoint::new(x, t)?, faddeeva)
}

/// Leading saddle-point contribution
/// `sqrt(2t/pi) tau exp(i k_s^2 t) / ((i - 1) k0 (t^2 - tau^2))`.
pub fn evaluate_saddle(p: &SourceParams, pt: SpaceTimePoint) -> Result<Complex64> {
    let tau = p.traversal_time(pt.x);
    let gap = pt.t * pt.t - tau * tau;
    if gap.norm() < SINGULAR_GAP {
        return Err(Error::SingularConfiguration {
            x: pt.x,
            t: pt.t,
            gap: gap.norm(),
        });
    }
    let denom = Complex64::new(-1.0, 1.0) * p.k0() * gap;
    Ok((2.0 * pt.t / PI).sqrt() * tau * saddle_phase(pt) / denom)
}

/// Residue of the pole at `k0`, `exp(-i omega0 t) exp(i k0 x)`.
pub fn evaluate_pole(p: &SourceParams, pt: SpaceTimePoint) -> Complex64 {
    let phase = -Complex64::i() * p.omega0() * pt.t + Complex64::i() * p.k0() * pt.x;
    phase.exp()
}

/// Saddle term plus the pole term once the descent path has crossed it.
pub fn evaluate_approx(p: &SourceParams, pt: SpaceTimePoint) -> Result<Complex64> {
    let saddle = evaluate_saddle(p, pt)?;
    if pole_crossed(p, pt) {
        Ok(saddle + evaluate_pole(p, pt))
    } else {
        Ok(saddle)
    }
}

/// `(|u0+|, |u0-|)` from the closed form in `x`, `t`, `|tau|`, `|k0|`.
///
/// At `x = 0` the closed form degenerates and the moduli are taken directly.
pub fn u_moduli(p: &SourceParams, pt: SpaceTimePoint) -> (f64, f64) {
    if pt.x == 0.0 {
        let (up, um) = u_values(p, pt);
        return (up.norm(), um.norm());
    }
    let k0 = p.k0().norm();
    let tau = p.traversal_time(pt.x).norm();
    let t = pt.t;
    let base = pt.t / (2.0 * tau) + tau / (2.0 * t);
    let scale = (pt.x * k0).sqrt();
    // the k0 pole sits on the near side of the saddle, hence the minus for u0+
    let plus = scale * (base - 1.0 / k0).max(0.0).sqrt();
    let minus = scale * (base + 1.0 / k0).sqrt();
    (plus, minus)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityCurrent {
    pub density: f64,
    pub dpsi_dx: Complex64,
    pub current: f64,
}

/// Density `|psi|^2`, analytic `d psi/dx`, and current `2 Im(psi* psi_x)`.
pub fn density_and_current(p: &SourceParams, pt: SpaceTimePoint) -> Result<DensityCurrent> {
    let (up, um) = u_values(p, pt);
    let domain = |e: Error| Error::EvaluationDomain {
        x: pt.x,
        t: pt.t,
        reason: e.to_string(),
    };
    let phase = saddle_phase(pt);
    let psi = 0.5 * phase * (faddeeva(-up).map_err(domain)? + faddeeva(-um).map_err(domain)?);
    let dw = faddeeva_derivative(-up).map_err(domain)? + faddeeva_derivative(-um).map_err(domain)?;
    // d(-u0±)/dx = (1 + i) / (2 sqrt(2t)) for both signs
    let du = one_plus_i() / (2.0 * (2.0 * pt.t).sqrt());
    let ks = pt.x / (2.0 * pt.t);
    let dpsi_dx = Complex64::i() * ks * psi + 0.5 * phase * dw * du;
    Ok(DensityCurrent {
        density: psi.norm_sqr(),
        dpsi_dx,
        current: 2.0 * (psi.conj() * dpsi_dx).im,
    })
}

/// Probability density from the exact wave.
pub fn density(p: &SourceParams, pt: SpaceTimePoint) -> Result<f64> {
    Ok(psi_with(p, pt, faddeeva)?.norm_sqr())
}
