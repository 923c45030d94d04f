//! Globally adaptive 15-point Gauss-Kronrod quadrature over real or complex
//! integrands, plus a fixed composite Gauss-Legendre rule used as a second
//! opinion.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 0.0,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<V> {
    pub value: V,
    pub abs_error: f64,
    pub intervals: usize,
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

fn kronrod15<V: QuadValue, F: FnMut(f64) -> V>(f: &mut F, a: f64, b: f64) -> (V, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let pair = f1 + f2;
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).magnitude();
    (value, error)
}

/// Integrate `f` over `[a, b]`, splitting first at the given interior points.
pub fn integrate_with_points<V, F>(
    mut f: F,
    a: f64,
    b: f64,
    points: &[f64],
    tol: Tolerance,
) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    let mut edges = vec![a];
    let mut inner: Vec<f64> = points
        .iter()
        .copied()
        .filter(|&p| p > a.min(b) && p < a.max(b))
        .collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if b < a {
        inner.reverse();
    }
    edges.extend(inner);
    edges.push(b);

    let mut panels: Vec<Panel<V>> = edges
        .windows(2)
        .map(|w| {
            let (value, error) = kronrod15(&mut f, w[0], w[1]);
            Panel {
                a: w[0],
                b: w[1],
                value,
                error,
            }
        })
        .collect();

    loop {
        let total = panels.iter().fold(V::zero(), |acc, p| acc + p.value);
        let err: f64 = panels.iter().map(|p| p.error).sum();
        let target = tol.abs.max(tol.rel * total.magnitude());
        if err <= target {
            return Ok(QuadResult {
                value: total,
                abs_error: err,
                intervals: panels.len(),
            });
        }
        if panels.len() >= tol.max_intervals {
            return Err(Error::QuadratureNonConvergence {
                estimate: total.magnitude(),
                error: err,
                intervals: panels.len(),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, p)| {
                if p.error > best.1 {
                    (i, p.error)
                } else {
                    best
                }
            });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid == p.a || mid == p.b {
            // interval exhausted at machine resolution
            return Err(Error::QuadratureNonConvergence {
                estimate: total.magnitude(),
                error: err,
                intervals: panels.len() + 1,
            });
        }
        for (lo, hi) in [(p.a, mid), (mid, p.b)] {
            let (value, error) = kronrod15(&mut f, lo, hi);
            panels.push(Panel {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
    }
}

pub fn integrate<V, F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    integrate_with_points(f, a, b, &[], tol)
}

/// Composite 7-point Gauss-Legendre rule on `panels` equal sub-intervals.
pub fn gauss_legendre_composite<V, F>(mut f: F, a: f64, b: f64, panels: usize) -> V
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    let h = (b - a) / panels as f64;
    let mut sum = V::zero();
    for k in 0..panels {
        let lo = a + h * k as f64;
        let center = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut s = f(center) * WG[3];
        for j in 0..3 {
            let dx = half * XGK[2 * j + 1];
            s = s + (f(center - dx) + f(center + dx)) * WG[j];
        }
        sum = sum + s * half;
    }
    sum
}
