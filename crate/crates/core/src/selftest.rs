//! Fast invariant checks run by `postexp selftest`.

use num_complex::Complex64;

use crate::error::Result;
use crate::lattice::{evolve, LatticeParams};
use crate::roots::log_grid;
use crate::source_model::{density_and_current, psi_with, SourceParams, SpaceTimePoint};
use crate::specfun::faddeeva;

/// Faddeeva implementation under test.
pub type FaddeevaFn = fn(Complex64) -> Result<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Scale `w` by `1 + 1e-6`.
    Faddeeva,
}

fn corrupted_faddeeva(z: Complex64) -> Result<Complex64> {
    faddeeva(z).map(|w| w * (1.0 + 1e-6))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    /// Stable one-line verdict.
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] {} ({})", self.name, self.detail)
    }
}

fn outcome(name: &'static str, value: Result<f64>, limit: f64) -> CheckOutcome {
    match value {
        Ok(v) => CheckOutcome {
            name,
            passed: v < limit,
            detail: format!("max deviation {v:.3e}, limit {limit:.0e}"),
        },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn boundary_identity(w: FaddeevaFn) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in [-0.1, -0.3, -0.5, -0.9] {
        let p = SourceParams::new(k)?;
        for t in log_grid(0.01, 100.0, 200) {
            let psi = psi_with(&p, SpaceTimePoint::new(0.0, t)?, w)?;
            let want = (-Complex64::i() * p.omega0() * t).exp();
            worst = worst.max((psi - want).norm());
        }
    }
    Ok(worst)
}

fn sample_points() -> Vec<Complex64> {
    // deterministic spread over |z| <= 5 in all quadrants
    (0..100)
        .map(|i| {
            let r = 5.0 * ((i as f64 + 0.5) / 100.0).sqrt();
            let a = 2.399_963_229_728_653 * i as f64;
            Complex64::from_polar(r, a)
        })
        .collect()
}

fn reflection_identity(w: FaddeevaFn) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in sample_points() {
        let (wm, wp, e) = (w(-z)?, w(z)?, 2.0 * (-z * z).exp());
        // measured against the largest term, since the sum cancels for Im z < 0
        let scale = wm.norm().max(wp.norm()).max(e.norm());
        worst = worst.max((wm + wp - e).norm() / scale);
    }
    Ok(worst)
}

fn conjugation_identity(w: FaddeevaFn) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in sample_points() {
        let lhs = w((-z).conj())?;
        let rhs = w(z)?.conj();
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1e-300));
    }
    Ok(worst)
}

fn continuity_residual() -> Result<f64> {
    let mut worst: f64 = 0.0;
    let h = 1e-4;
    for (k, x, t) in [(-0.3, 0.7, 2.0), (-0.5, 2.0, 5.0), (-0.15, 4.0, 9.0), (-0.8, 0.3, 1.1)] {
        let p = SourceParams::new(k)?;
        let at = |x: f64, t: f64| density_and_current(&p, SpaceTimePoint::new(x, t)?);
        let drho = (at(x, t + h)?.density - at(x, t - h)?.density) / (2.0 * h);
        let dj = (at(x + h, t)?.current - at(x - h, t)?.current) / (2.0 * h);
        let scale = drho.abs().max(dj.abs()).max(1e-300);
        worst = worst.max((drho + dj).abs() / scale);
    }
    Ok(worst)
}

fn lattice_norm() -> Result<f64> {
    let p = LatticeParams::for_horizon(0.3, 40.0)?;
    let times: Vec<f64> = (0..=8).map(|i| 5.0 * i as f64).collect();
    Ok(evolve(&p, &times)?
        .iter()
        .map(|s| (s.norm() - 1.0).abs())
        .fold(0.0, f64::max))
}

/// Run every check, optionally with a deliberately broken Faddeeva function.
pub fn run(fault: Option<Fault>) -> Vec<CheckOutcome> {
    let w: FaddeevaFn = match fault {
        Some(Fault::Faddeeva) => corrupted_faddeeva,
        None => faddeeva,
    };
    vec![
        outcome("boundary-identity", boundary_identity(w), 1e-10),
        outcome("faddeeva-reflection", reflection_identity(w), 1e-12),
        outcome("faddeeva-conjugation", conjugation_identity(w), 1e-12),
        outcome("continuity-residual", continuity_residual(), 1e-3),
        outcome("lattice-norm", lattice_norm(), 1e-10),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes() {
        for c in run(None) {
            assert!(c.passed, "{}", c.line());
        }
    }

    #[test]
    fn fault_is_caught_by_boundary_check() {
        let out = run(Some(Fault::Faddeeva));
        let boundary = out.iter().find(|c| c.name == "boundary-identity").unwrap();
        assert!(!boundary.passed);
        assert!(boundary.line().starts_with("[FAIL] boundary-identity"));
    }
}
