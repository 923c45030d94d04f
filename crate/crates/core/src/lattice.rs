//! Semi-infinite tight-binding chain whose first link is weakened to `delta`.
//! Site 1 is occupied at `t = 0` and leaks into the rest of the chain.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalization::loglog_fit;
use crate::roots::{bisect, log_grid, BisectOptions};

/// Sampling step used for envelopes and fits.
pub const SAMPLE_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub delta: f64,
    pub n_sites: usize,
    pub t_max: f64,
}

/// Smallest chain length that keeps reflections off the observed sites up to `t_max`.
pub fn required_sites(t_max: f64) -> usize {
    (2.0 * t_max).ceil() as usize + 20
}

impl LatticeParams {
    /// `delta` in `(0, 1]`; the uniform chain `delta = 1` is accepted for testing.
    pub fn new(delta: f64, n_sites: usize, t_max: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {delta}")));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_max must be positive, got {t_max}")));
        }
        if n_sites < 10 {
            return Err(Error::InvalidParameter(format!("need at least 10 sites, got {n_sites}")));
        }
        let required = required_sites(t_max);
        if n_sites < required {
            return Err(Error::TruncationUnsound {
                n_sites,
                t_max,
                required,
            });
        }
        Ok(Self {
            delta,
            n_sites,
            t_max,
        })
    }

    /// Shortest admissible chain for `t_max`.
    pub fn for_horizon(delta: f64, t_max: f64) -> Result<Self> {
        Self::new(delta, required_sites(t_max), t_max)
    }

    pub fn alpha_sq(&self) -> f64 {
        1.0 - self.delta * self.delta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_sq().sqrt()
    }

    /// Exponential decay rate of `|c_1|^2`, `2 delta^2 / alpha`.
    pub fn gamma(&self) -> f64 {
        2.0 * self.delta * self.delta / self.alpha()
    }
}

/// Eigenvalues of the chain and the eigenvector components on selected sites.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    /// Site numbers (1-based) whose components are stored.
    pub sites: Vec<usize>,
    /// `rows[j][k]`: component of eigenvector `k` on `sites[j]`.
    pub rows: Vec<Vec<f64>>,
}

impl Spectrum {
    /// Diagonalize the chain, keeping eigenvector rows for `sites` only.
    pub fn compute(p: &LatticeParams, sites: &[usize]) -> Result<Self> {
        let n = p.n_sites;
        for &s in sites {
            if s == 0 || s > n {
                return Err(Error::InvalidParameter(format!("site {s} outside 1..={n}")));
            }
        }
        let mut d = vec![0.0; n];
        let mut e: Vec<f64> = (0..n)
            .map(|i| match i {
                0 => -p.delta,
                i if i + 1 < n => -1.0,
                _ => 0.0,
            })
            .collect();
        let mut rows: Vec<Vec<f64>> = sites
            .iter()
            .map(|&s| {
                let mut r = vec![0.0; n];
                r[s - 1] = 1.0;
                r
            })
            .collect();
        tql2(&mut d, &mut e, &mut rows)?;
        Ok(Self {
            energies: d,
            sites: sites.to_vec(),
            rows,
        })
    }

    /// Every site retained.
    pub fn full(p: &LatticeParams) -> Result<Self> {
        let sites: Vec<usize> = (1..=p.n_sites).collect();
        Self::compute(p, &sites)
    }

    fn row(&self, site: usize) -> Option<&[f64]> {
        self.sites.iter().position(|&s| s == site).map(|j| self.rows[j].as_slice())
    }

    /// `<site| exp(-iHt) |1>`; both rows must be stored.
    pub fn amplitude(&self, site: usize, t: f64) -> Result<Complex64> {
        let (a, b) = self
            .row(site)
            .zip(self.row(1))
            .ok_or_else(|| Error::InvalidParameter(format!("site {site} or 1 not retained")))?;
        Ok(a.iter()
            .zip(b)
            .zip(&self.energies)
            .map(|((x, y), lam)| x * y * Complex64::from_polar(1.0, -lam * t))
            .sum())
    }

    /// `exp(-iH dt) psi` for a full-spectrum decomposition.
    pub fn propagate(&self, psi: &[Complex64], dt: f64) -> Result<Vec<Complex64>> {
        let n = self.energies.len();
        if self.sites.len() != n || psi.len() != n {
            return Err(Error::InvalidParameter("propagation needs the full spectrum".into()));
        }
        // sites are 1..=n in order for a full spectrum
        let coeff: Vec<Complex64> = (0..n)
            .map(|k| {
                let proj: Complex64 = (0..n).map(|j| psi[j] * self.rows[j][k]).sum();
                proj * Complex64::from_polar(1.0, -self.energies[k] * dt)
            })
            .collect();
        Ok((0..n)
            .map(|j| (0..n).map(|k| coeff[k] * self.rows[j][k]).sum())
            .collect())
    }
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
///
/// `d` holds the diagonal, `e[i]` couples `i` and `i + 1` with `e[n-1] = 0`.
/// On return `d` holds eigenvalues and each row in `rows` has been multiplied
/// by the eigenvector matrix, so identity rows become eigenvector components.
fn tql2(d: &mut [f64], e: &mut [f64], rows: &mut [Vec<f64>]) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::Inconsistent(format!("QL iteration stalled at index {l}")));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in rows.iter_mut() {
                        let h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub t: f64,
    /// `amplitudes[j]` belongs to site `j + 1`.
    pub amplitudes: Vec<Complex64>,
}

impl LatticeState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }
}

fn check_times(p: &LatticeParams, times: &[f64]) -> Result<()> {
    if times.iter().any(|&t| !(0.0..=p.t_max).contains(&t)) {
        return Err(Error::InvalidParameter(format!("times must lie in [0, {}]", p.t_max)));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("times must be sorted".into()));
    }
    Ok(())
}

/// Full chain state `exp(-iHt)|1>` at each requested time.
pub fn evolve(p: &LatticeParams, times: &[f64]) -> Result<Vec<LatticeState>> {
    check_times(p, times)?;
    let spectrum = Spectrum::full(p)?;
    let first = &spectrum.rows[0];
    Ok(times
        .par_iter()
        .map(|&t| {
            let phase: Vec<Complex64> = spectrum
                .energies
                .iter()
                .zip(first)
                .map(|(lam, v1)| v1 * Complex64::from_polar(1.0, -lam * t))
                .collect();
            let amplitudes = spectrum
                .rows
                .iter()
                .map(|row| row.iter().zip(&phase).map(|(v, ph)| ph * v).sum())
                .collect();
            LatticeState { t, amplitudes }
        })
        .collect())
}

/// `|c_n(t)|^2` for each site over `times`; `result[j][i]` is site `sites[j]` at `times[i]`.
pub fn site_densities(p: &LatticeParams, sites: &[usize], times: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_times(p, times)?;
    let mut keep = vec![1];
    keep.extend(sites.iter().copied().filter(|&s| s != 1));
    let spectrum = Spectrum::compute(p, &keep)?;
    let per_time: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            sites
                .iter()
                .map(|&s| spectrum.amplitude(s, t).map(|c| c.norm_sqr()).unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    Ok((0..sites.len())
        .map(|j| per_time.iter().map(|row| row[j]).collect())
        .collect())
}

/// Uniform sampling grid `0, step, 2 step, ...` up to `t_max`.
pub fn sample_times(t_max: f64, step: f64) -> Vec<f64> {
    let n = (t_max / step).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

/// Local maxima of a sampled curve, then only those not exceeded later on.
pub fn envelope(ts: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    let mut peaks: Vec<(f64, f64)> = (1..ys.len().saturating_sub(1))
        .filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1])
        .map(|i| (ts[i], ys[i]))
        .collect();
    if peaks.len() < 3 {
        peaks = ts.iter().copied().zip(ys.iter().copied()).collect();
    }
    let mut hull = Vec::with_capacity(peaks.len());
    let mut running = f64::NEG_INFINITY;
    for &(t, y) in peaks.iter().rev() {
        if y >= running {
            hull.push((t, y));
            running = y;
        }
    }
    hull.reverse();
    hull
}

fn window<'a>(ts: &'a [f64], ys: &'a [f64], lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    ts.iter()
        .zip(ys)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, y)| (*t, *y))
        .unzip()
}

/// Straight-line fit `ln y = a - rate t`, returning `(rate, a)`.
pub fn exponential_fit(ts: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0)
        .map(|(t, y)| (*t, y.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientWindow(format!("{} usable samples", pts.len())));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = sty / stt;
    Ok((-slope, my - slope * mt))
}

/// Decay rate of `|c_n|^2` fitted over `[lo, hi]`.
pub fn fit_decay_rate(p: &LatticeParams, site: usize, lo: f64, hi: f64) -> Result<f64> {
    if hi > p.t_max || hi <= lo {
        return Err(Error::InsufficientWindow(format!("[{lo}, {hi}] with t_max = {}", p.t_max)));
    }
    let ts: Vec<f64> = sample_times(hi, SAMPLE_STEP).into_iter().filter(|&t| t >= lo).collect();
    let ys = site_densities(p, &[site], &ts)?.remove(0);
    Ok(exponential_fit(&ts, &ys)?.0)
}

/// Window `[2/gamma, 12/gamma]`: long enough to average the oscillation,
/// short enough to end before the power law takes over at site 1.
pub fn rate_window(p: &LatticeParams) -> (f64, f64) {
    let g = p.gamma();
    (2.0 / g, 12.0 / g)
}

/// Log-log slope of the envelope of `ys` over `[lo, hi]`.
pub fn envelope_slope(ts: &[f64], ys: &[f64], lo: f64, hi: f64) -> Result<(f64, f64)> {
    let (wt, wy) = window(ts, ys, lo, hi);
    if wt.len() < 10 {
        return Err(Error::InsufficientWindow(format!("tail window [{lo}, {hi}] has {} samples", wt.len())));
    }
    let env = envelope(&wt, &wy);
    let (et, ey): (Vec<f64>, Vec<f64>) = env.into_iter().unzip();
    loglog_fit(&et, &ey).ok_or_else(|| Error::InsufficientWindow("degenerate envelope".into()))
}

/// Window `[0.6 t_max, t_max - 5]` used for the late-time power law.
pub fn tail_window(p: &LatticeParams) -> (f64, f64) {
    (0.6 * p.t_max, p.t_max - 5.0)
}

/// Late-time power-law exponent of `|c_n(t)|^2` (expected near -3).
pub fn tail_exponent(p: &LatticeParams, site: usize) -> Result<f64> {
    let (lo, hi) = tail_window(p);
    if hi - lo < 20.0 {
        return Err(Error::InsufficientWindow(format!("t_max = {} leaves no tail window", p.t_max)));
    }
    let ts: Vec<f64> = sample_times(hi, SAMPLE_STEP).into_iter().filter(|&t| t >= lo).collect();
    let ys = site_densities(p, &[site], &ts)?.remove(0);
    Ok(envelope_slope(&ts, &ys, lo, hi)?.0)
}

/// Grouping of the `alpha^(n+1)` factor in the transition formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reading {
    /// `F = 2 alpha^(n+1)`.
    AlphaInNumerator,
    /// `F = 1 / (2 alpha^(n+1))`.
    AlphaInDenominator,
}

impl Reading {
    pub const ALL: [Reading; 2] = [Reading::AlphaInNumerator, Reading::AlphaInDenominator];

    fn factor(&self, alpha: f64, n: usize) -> f64 {
        let a = alpha.powi(n as i32 + 1);
        match self {
            Reading::AlphaInNumerator => 2.0 * a,
            Reading::AlphaInDenominator => 1.0 / (2.0 * a),
        }
    }
}

/// `t^3/2 - RHS(t)`, positive while the exponential dominates.
fn lattice_residual(p: &LatticeParams, n: usize, reading: Reading, t: f64) -> f64 {
    let a2 = p.alpha_sq();
    let pre = (n as f64 + a2 * (n as f64 - 2.0)) / (PI.sqrt() * (1.0 + a2).powi(3));
    let rhs = pre * reading.factor(p.alpha(), n) * (0.5 * p.gamma() * t).exp();
    t.powf(1.5) - rhs
}

/// Transition time at site `n` from the closed-form estimate, or `None` if
/// the exponential does not give way to the power law before `t_max`.
///
/// The root taken is where the exponential stops dominating. A second root
/// close to `t = 0`, where both asymptotic forms are meaningless, is skipped.
pub fn lattice_transition_time(p: &LatticeParams, n: usize, reading: Reading) -> Result<Option<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("site index must be >= 2, got {n}")));
    }
    if p.delta >= 1.0 {
        return Err(Error::InvalidParameter("the uniform chain has no exponential stage".into()));
    }
    let grid = log_grid(1e-3, p.t_max, 2000);
    let g: Vec<f64> = grid.iter().map(|&t| lattice_residual(p, n, reading, t)).collect();
    let Some(i) = (0..grid.len() - 1).find(|&i| g[i] > 0.0 && g[i + 1] <= 0.0) else {
        return Ok(None);
    };
    let opts = BisectOptions {
        x_rel: 1e-13,
        ..Default::default()
    };
    bisect(|t| lattice_residual(p, n, reading, t), grid[i], grid[i + 1], opts).map(Some)
}

/// Exponential fit window before the transition at site `n`.
pub fn exponential_window(p: &LatticeParams, n: usize) -> (f64, f64) {
    let lo = n as f64 + 10.0;
    (lo, lo + 9.5 / p.gamma())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCrossing {
    pub site: usize,
    pub rate: f64,
    pub tail_slope: f64,
    pub t_cross: f64,
    /// Density of the fitted exponential at the crossing.
    pub density: f64,
}

/// Time where the fitted exponential and the fitted late power law meet.
pub fn envelope_crossing(p: &LatticeParams, site: usize) -> Result<EnvelopeCrossing> {
    let (e_lo, e_hi) = exponential_window(p, site);
    let (t_lo, t_hi) = tail_window(p);
    if e_hi >= t_lo {
        return Err(Error::InsufficientWindow(format!(
            "exponential window ends at {e_hi}, after the tail window starts at {t_lo}"
        )));
    }
    let ts = sample_times(t_hi, SAMPLE_STEP);
    let ys = site_densities(p, &[site], &ts)?.remove(0);
    let (et, ey) = window(&ts, &ys, e_lo, e_hi);
    let (rate, a) = exponential_fit(&et, &ey)?;
    let (slope, b) = envelope_slope(&ts, &ys, t_lo, t_hi)?;
    // a - rate t = b + slope ln t
    let diff = |t: f64| a - rate * t - b - slope * t.ln();
    let t_cross = bisect(diff, e_lo, t_hi, BisectOptions::default())?;
    Ok(EnvelopeCrossing {
        site,
        rate,
        tail_slope: slope,
        t_cross,
        density: (a - rate * t_cross).exp(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadingComparison {
    pub site: usize,
    pub measured: f64,
    pub alpha_in_numerator: Option<f64>,
    pub alpha_in_denominator: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadingResolution {
    pub selected: Reading,
    /// Largest relative deviation of the selected reading from the measurements.
    pub max_rel_deviation: f64,
    pub comparisons: Vec<ReadingComparison>,
}

fn max_deviation(cmp: &[ReadingComparison], reading: Reading) -> f64 {
    cmp.iter()
        .map(|c| {
            let predicted = match reading {
                Reading::AlphaInNumerator => c.alpha_in_numerator,
                Reading::AlphaInDenominator => c.alpha_in_denominator,
            };
            predicted.map_or(f64::INFINITY, |t| (t - c.measured).abs() / c.measured)
        })
        .fold(0.0, f64::max)
}

/// Pick the formula grouping that best matches measured envelope crossings.
pub fn resolve_reading(p: &LatticeParams, sites: &[usize]) -> Result<ReadingResolution> {
    let comparisons = sites
        .par_iter()
        .map(|&n| {
            Ok(ReadingComparison {
                site: n,
                measured: envelope_crossing(p, n)?.t_cross,
                alpha_in_numerator: lattice_transition_time(p, n, Reading::AlphaInNumerator)?,
                alpha_in_denominator: lattice_transition_time(p, n, Reading::AlphaInDenominator)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    select_reading(comparisons)
        .ok_or_else(|| Error::InsufficientWindow("no sites to compare readings on".into()))
}

/// The reading with the smallest worst-case deviation, if there is anything to compare.
pub fn select_reading(comparisons: Vec<ReadingComparison>) -> Option<ReadingResolution> {
    if comparisons.is_empty() {
        return None;
    }
    let (selected, max_rel_deviation) = Reading::ALL
        .iter()
        .map(|&r| (r, max_deviation(&comparisons, r)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())?;
    Some(ReadingResolution {
        selected,
        max_rel_deviation,
        comparisons,
    })
}
