//! Conversion between SI quantities and the dimensionless model, and the
//! cold-atom scenario estimate.
//!
//! Lengths are measured in `L = hbar / (m v)`, with `v` the release velocity,
//! and times in `t_unit = 2 m L^2 / hbar`.
//!
//! | constant          | value                    | source                  |
//! |-------------------|--------------------------|-------------------------|
//! | `HBAR`            | 1.054571817e-34 J s      | CODATA 2018 (exact)     |
//! | `ATOMIC_MASS_UNIT`| 1.66053906660e-27 kg     | CODATA 2018             |
//! | `RB87_MASS_U`     | 86.909180527 u           | AME 2016 atomic mass    |

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalization::{total_emitted, NormalizationResult};
use crate::quad::{integrate, Tolerance};
use crate::source_model::{density, SourceParams, SpaceTimePoint};
use crate::transition::{critical_distance, transition_time, TransitionMethod};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const RB87_MASS_U: f64 = 86.909_180_527;

/// Pixel widths above this many length units are integrated over rather than point-sampled.
pub const COARSE_PIXEL_RATIO: f64 = 100.0;

/// Atomic species with compiled-in masses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    #[serde(rename = "Rb87")]
    Rb87,
}

impl Species {
    pub fn mass(&self) -> f64 {
        match self {
            Species::Rb87 => RB87_MASS_U * ATOMIC_MASS_UNIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScenario {
    /// kg
    pub mass: f64,
    /// s
    pub lifetime: f64,
    /// m/s
    pub release_velocity: f64,
    pub atom_number: f64,
    /// m
    pub pixel_size: f64,
}

impl PhysicalScenario {
    pub fn new(mass: f64, lifetime: f64, release_velocity: f64, atom_number: f64, pixel_size: f64) -> Result<Self> {
        for (name, v) in [
            ("mass", mass),
            ("lifetime", lifetime),
            ("release_velocity", release_velocity),
            ("atom_number", atom_number),
            ("pixel_size", pixel_size),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            mass,
            lifetime,
            release_velocity,
            atom_number,
            pixel_size,
        })
    }

    /// `L = hbar / (m v)`.
    pub fn length_unit(&self) -> f64 {
        HBAR / (self.mass * self.release_velocity)
    }

    /// `t_unit = 2 m L^2 / hbar`.
    pub fn time_unit(&self) -> f64 {
        let l = self.length_unit();
        2.0 * self.mass * l * l / HBAR
    }

    /// `k0I = -t_unit / (4 lifetime)`, required to lie in `(-1, 0)`.
    pub fn source_params(&self) -> Result<SourceParams> {
        let k0_im = -self.time_unit() / (4.0 * self.lifetime);
        if !(k0_im > -1.0) {
            return Err(Error::ScenarioUnrepresentable(format!(
                "k0I = {k0_im} is below -1: lifetime shorter than t_unit/4 = {} s",
                self.time_unit() / 4.0
            )));
        }
        if !(k0_im < 0.0) {
            return Err(Error::ScenarioUnrepresentable(format!("k0I = {k0_im} is not below 0")));
        }
        SourceParams::new(k0_im)
    }

    pub fn to_dimensionless(&self, x_m: f64, t_s: f64) -> Result<(SpaceTimePoint, SourceParams)> {
        let p = self.source_params()?;
        let pt = SpaceTimePoint::new(x_m / self.length_unit(), t_s / self.time_unit())?;
        Ok((pt, p))
    }

    /// `(X, T)` in metres and seconds.
    pub fn to_physical(&self, pt: SpaceTimePoint) -> (f64, f64) {
        (pt.x * self.length_unit(), pt.t * self.time_unit())
    }
}

/// Flat key-value scenario file. Give either `species` or `mass`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub species: Option<Species>,
    /// kg
    pub mass: Option<f64>,
    /// s
    pub lifetime: f64,
    /// m/s
    pub release_velocity: f64,
    pub atom_number: f64,
    /// m
    pub pixel_size: f64,
    /// m
    pub detector_distance: f64,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("scenario file: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn scenario(&self) -> Result<PhysicalScenario> {
        let mass = match (self.species, self.mass) {
            (Some(s), None) => s.mass(),
            (None, Some(m)) => m,
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter("give either species or mass, not both".into()))
            }
            (None, None) => return Err(Error::InvalidParameter("species or mass is required".into())),
        };
        if !(self.detector_distance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "detector_distance must be positive, got {}",
                self.detector_distance
            )));
        }
        PhysicalScenario::new(mass, self.lifetime, self.release_velocity, self.atom_number, self.pixel_size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PixelMethod {
    PointSample,
    PixelIntegral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub length_unit_m: f64,
    pub time_unit_s: f64,
    pub k0_im: f64,
    pub x_detector: f64,
    pub x_detector_m: f64,
    pub valid: bool,
    pub t_p: Option<f64>,
    pub t_p_s: Option<f64>,
    pub density_normalized: Option<f64>,
    pub atoms_per_pixel_point: Option<f64>,
    pub atoms_per_pixel_integral: Option<f64>,
    pub atoms_per_pixel: Option<f64>,
    pub primary_method: PixelMethod,
    pub x_max: Option<f64>,
    pub x_max_m: Option<f64>,
    pub t_p_at_x_max_s: Option<f64>,
    pub normalization: NormalizationResult,
    pub notes: Vec<String>,
}

/// Transition time and atom count at a detector `x_detector_m` metres away.
pub fn scenario_transition_report(s: &PhysicalScenario, x_detector_m: f64) -> Result<ScenarioReport> {
    if !(x_detector_m > 0.0) {
        return Err(Error::InvalidParameter(format!("detector distance must be positive, got {x_detector_m}")));
    }
    let p = s.source_params()?;
    let l = s.length_unit();
    let tu = s.time_unit();
    let x = x_detector_m / l;
    let width = s.pixel_size / l;
    let norm = total_emitted(&p)?;
    let tp = transition_time(&p, x, TransitionMethod::ExactRatio)?;
    let primary_method = if width > COARSE_PIXEL_RATIO {
        PixelMethod::PixelIntegral
    } else {
        PixelMethod::PointSample
    };
    let mut notes = Vec::new();

    let (mut t_p, mut density_normalized, mut point, mut integral) = (None, None, None, None);
    if tp.valid {
        let rho = norm.normalize(tp.density_raw);
        t_p = Some(tp.t_p);
        density_normalized = Some(rho);
        point = Some(s.atom_number * rho * width);
        let lo = (x - 0.5 * width).max(0.0);
        let hi = x + 0.5 * width;
        let mut failure = None;
        let r = integrate(
            |xi: f64| match SpaceTimePoint::new(xi, tp.t_p).and_then(|q| density(&p, q)) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            lo,
            hi,
            Tolerance {
                abs: 0.0,
                rel: 1e-8,
                max_intervals: 20_000,
            },
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        integral = Some(s.atom_number * norm.normalize(r.value));
    } else {
        notes.push(tp.note.clone().unwrap_or_else(|| "no transition".into()));
    }

    let (x_max, t_p_at_x_max_s) = match critical_distance(&p) {
        Ok(c) => (Some(c.x_max), Some(c.t_p * tu)),
        Err(Error::RangeExhausted { ceiling }) => {
            notes.push(format!("transition persists up to the scan ceiling x = {ceiling}"));
            (None, None)
        }
        Err(e) => return Err(e),
    };

    Ok(ScenarioReport {
        length_unit_m: l,
        time_unit_s: tu,
        k0_im: p.k0_im(),
        x_detector: x,
        x_detector_m,
        valid: tp.valid,
        t_p,
        t_p_s: t_p.map(|t| t * tu),
        density_normalized,
        atoms_per_pixel_point: point,
        atoms_per_pixel_integral: integral,
        atoms_per_pixel: match primary_method {
            PixelMethod::PointSample => point,
            PixelMethod::PixelIntegral => integral,
        },
        primary_method,
        x_max,
        x_max_m: x_max.map(|v| v * l),
        t_p_at_x_max_s,
        normalization: norm,
        notes,
    })
}
