//! Command-line front end. Every command writes plot-ready rows as CSV or JSON.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::lattice::{
    envelope_crossing, fit_decay_rate, lattice_transition_time, rate_window, required_sites,
    sample_times, select_reading, site_densities, tail_exponent, LatticeParams, Reading,
    ReadingComparison, ReadingResolution,
};
use crate::normalization::{total_emitted, NormalizationResult};
use crate::roots::{lin_grid, log_grid};
use crate::selftest::{self, Fault};
use crate::source_model::{
    density, evaluate_approx, evaluate_pole, evaluate_saddle, pole_crossed, SourceParams, SpaceTimePoint,
};
use crate::transition::{
    critical_distance, ratio_r, transition_time_normalized, TransitionMethod,
};
use crate::units::{scenario_transition_report, ScenarioFile};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "postexp", version, about = "Decay of a source wave from exponential to algebraic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Root of the full pole/saddle modulus ratio.
    Exact,
    /// Root of the large-time equation.
    LargeTime,
}

impl From<MethodArg> for TransitionMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => TransitionMethod::ExactRatio,
            MethodArg::LargeTime => TransitionMethod::LargeTime,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    pub parallelism: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact, saddle and pole densities over an (x, t) grid.
    Density {
        /// Imaginary part of k0, in (-1, 0).
        #[arg(long = "k0i", allow_hyphen_values = true)]
        k0_im: f64,
        /// Comma-separated positions.
        #[arg(long, conflicts_with = "x_grid", allow_hyphen_values = true)]
        x: Option<String>,
        /// Position grid, `lin:a:b:n` or `log:a:b:n`.
        #[arg(long)]
        x_grid: Option<String>,
        /// Time grid, `lin:a:b:n` or `log:a:b:n`.
        #[arg(long)]
        t_grid: String,
        #[command(flatten)]
        common: Common,
    },
    /// Transition time and density at the transition for each position.
    Transition {
        /// Imaginary part of k0, in (-1, 0).
        #[arg(long = "k0i", allow_hyphen_values = true)]
        k0_im: f64,
        /// Comma-separated detector positions.
        #[arg(long, conflicts_with = "x_grid", allow_hyphen_values = true)]
        x: Option<String>,
        /// Position grid, `lin:a:b:n` or `log:a:b:n`.
        #[arg(long)]
        x_grid: Option<String>,
        #[arg(long, value_enum, default_value = "exact")]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// Largest detector distance with a transition, and the density there.
    Critical {
        /// Grid of k0I values, e.g. `lin:-0.9:-0.05:35`.
        #[arg(long = "k0i-grid", allow_hyphen_values = true)]
        k0_im_grid: String,
        #[command(flatten)]
        common: Common,
    },
    /// Tight-binding chain: site densities over time plus a fitted summary.
    Lattice {
        /// Weakened first hopping, in (0, 1].
        #[arg(long)]
        delta: f64,
        /// Comma-separated site numbers (1-based).
        #[arg(long)]
        sites: String,
        /// Last sampled time.
        #[arg(long)]
        t_max: f64,
        /// Chain length; the shortest reflection-free length when omitted.
        #[arg(long)]
        n_sites: Option<usize>,
        /// Sampling step of the output series.
        #[arg(long, default_value_t = 0.05)]
        t_step: f64,
        /// Summary file for CSV output; `<output>.summary.json` by default.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Transition estimate for a physical cold-atom scenario.
    Scenario {
        /// Scenario file (flat key = value, SI units).
        config: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Fast invariant checks.
    Selftest {
        #[arg(long, hide = true, value_parser = ["faddeeva"])]
        inject_fault: Option<String>,
    },
}

/// Failure categories mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(e) => write!(f, "error: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::TruncationUnsound { .. } | Error::ScenarioUnrepresentable(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Compute(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parse `lin:a:b:n`, `log:a:b:n` or a comma-separated list.
pub fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = |m: &str| CliError::Usage(format!("grid `{text}`: {m}"));
    let values = if let Some(rest) = text.strip_prefix("lin:").or_else(|| text.strip_prefix("log:")) {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected kind:a:b:n"));
        }
        let a: f64 = parts[0].parse().map_err(|_| bad("start is not a number"))?;
        let b: f64 = parts[1].parse().map_err(|_| bad("end is not a number"))?;
        let n: usize = parts[2].parse().map_err(|_| bad("count is not a positive integer"))?;
        if n == 0 {
            return Err(bad("grid is empty"));
        }
        if text.starts_with("log:") {
            if !(a > 0.0 && b > 0.0) {
                return Err(bad("log grid needs positive ends"));
            }
            log_grid(a, b, n)
        } else {
            lin_grid(a, b, n)
        }
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad("list entry is not a number")))
            .collect::<CliResult<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(bad("grid is empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("grid has non-finite values"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("grid must be strictly increasing"));
    }
    Ok(values)
}

fn positions(x: &Option<String>, x_grid: &Option<String>) -> CliResult<Vec<f64>> {
    match (x, x_grid) {
        (Some(s), None) | (None, Some(s)) => parse_grid(s),
        _ => Err(CliError::Usage("give exactly one of --x or --x-grid".into())),
    }
}

fn source(k0_im: f64) -> CliResult<SourceParams> {
    Ok(SourceParams::new(k0_im)?)
}

fn pool(parallelism: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = parallelism {
        if n == 0 {
            return Err(CliError::Usage("--parallelism must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Io(e.to_string()))
}

/// A CSV cell.
pub enum Cell {
    F(f64),
    OptF(Option<f64>),
    B(bool),
    U(usize),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => format!("{v:e}"),
            Cell::OptF(Some(v)) => format!("{v:e}"),
            Cell::OptF(None) => String::new(),
            Cell::B(b) => b.to_string(),
            Cell::U(u) => u.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

fn csv_bytes(header: &[&str], rows: &[Vec<Cell>]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(Cell::render)).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

fn emit(output: &Option<PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn normalization(p: &SourceParams) -> CliResult<NormalizationResult> {
    Ok(total_emitted(p)?)
}

#[derive(Debug, Serialize)]
pub struct DensityRow {
    pub x: f64,
    pub t: f64,
    pub rho_exact: f64,
    pub rho_saddle: Option<f64>,
    pub rho_pole: f64,
    pub pole_crossed: bool,
    pub ratio: Option<f64>,
    pub rho_normalized: f64,
}

fn density_row(p: &SourceParams, n: &NormalizationResult, x: f64, t: f64) -> CliResult<DensityRow> {
    let pt = SpaceTimePoint::new(x, t)?;
    let rho = density(p, pt)?;
    Ok(DensityRow {
        x,
        t,
        rho_exact: rho,
        rho_saddle: evaluate_saddle(p, pt).ok().map(|s| s.norm_sqr()),
        rho_pole: evaluate_pole(p, pt).norm_sqr(),
        pole_crossed: pole_crossed(p, pt),
        ratio: ratio_r(p, pt).ok(),
        rho_normalized: n.normalize(rho),
    })
}

fn cmd_density(k0_im: f64, x: &Option<String>, x_grid: &Option<String>, t_grid: &str, common: &Common) -> CliResult<()> {
    let p = source(k0_im)?;
    let xs = positions(x, x_grid)?;
    if xs.iter().any(|&v| v < 0.0) {
        return Err(CliError::Usage("positions must be >= 0".into()));
    }
    let ts = parse_grid(t_grid)?;
    if ts[0] <= 0.0 {
        return Err(CliError::Usage("times must be > 0".into()));
    }
    let n = normalization(&p)?;
    let points: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ts.iter().map(move |&t| (x, t))).collect();
    let rows = pool(common.parallelism)?.install(|| {
        points
            .par_iter()
            .map(|&(x, t)| density_row(&p, &n, x, t))
            .collect::<CliResult<Vec<_>>>()
    })?;
    let bytes = match common.format {
        Format::Csv => csv_bytes(
            &["x", "t", "rho_exact", "rho_saddle", "rho_pole", "pole_crossed", "R", "rho_normalized"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::F(r.x),
                        Cell::F(r.t),
                        Cell::F(r.rho_exact),
                        Cell::OptF(r.rho_saddle),
                        Cell::F(r.rho_pole),
                        Cell::B(r.pole_crossed),
                        Cell::OptF(r.ratio),
                        Cell::F(r.rho_normalized),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Json => json_bytes(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "density",
            "k0_im": k0_im,
            "n_total": n.n_total,
            "rows": rows,
        }))?,
    };
    emit(&common.output, &bytes)
}

#[derive(Debug, Serialize)]
pub struct TransitionRow {
    pub x: f64,
    pub t_p: Option<f64>,
    pub rho_at_tp_raw: Option<f64>,
    pub rho_at_tp_normalized: Option<f64>,
    pub valid: bool,
    pub method: &'static str,
    pub note: Option<String>,
}

fn cmd_transition(
    k0_im: f64,
    x: &Option<String>,
    x_grid: &Option<String>,
    method: MethodArg,
    common: &Common,
) -> CliResult<()> {
    let p = source(k0_im)?;
    let xs = positions(x, x_grid)?;
    if xs[0] <= 0.0 {
        return Err(CliError::Usage("positions must be > 0".into()));
    }
    let n = normalization(&p)?;
    let method: TransitionMethod = method.into();
    let rows = pool(common.parallelism)?.install(|| {
        xs.par_iter()
            .map(|&x| {
                let tp = transition_time_normalized(&p, x, method, &n)?;
                let keep = |v: f64| tp.valid.then_some(v);
                Ok(TransitionRow {
                    x,
                    t_p: keep(tp.t_p),
                    rho_at_tp_raw: keep(tp.density_raw),
                    rho_at_tp_normalized: tp.density_normalized,
                    valid: tp.valid,
                    method: method.as_str(),
                    note: tp.note,
                })
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let bytes = match common.format {
        Format::Csv => csv_bytes(
            &["x", "t_p", "rho_at_tp_raw", "rho_at_tp_normalized", "valid", "method"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::F(r.x),
                        Cell::OptF(r.t_p),
                        Cell::OptF(r.rho_at_tp_raw),
                        Cell::OptF(r.rho_at_tp_normalized),
                        Cell::B(r.valid),
                        Cell::S(r.method.to_string()),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Json => json_bytes(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "transition",
            "k0_im": k0_im,
            "n_total": n.n_total,
            "rows": rows,
        }))?,
    };
    emit(&common.output, &bytes)
}

#[derive(Debug, Serialize)]
pub struct CriticalRow {
    pub k0_im: f64,
    pub x_max: Option<f64>,
    pub t_p: Option<f64>,
    pub rho_exact_normalized: Option<f64>,
    pub rho_approx_normalized: Option<f64>,
    pub rho_exact_raw: Option<f64>,
    pub rho_approx_raw: Option<f64>,
    pub error: Option<String>,
}

fn critical_row(k0_im: f64) -> CriticalRow {
    let attempt = || -> crate::Result<CriticalRow> {
        let p = SourceParams::new(k0_im)?;
        let c = critical_distance(&p)?;
        let pt = SpaceTimePoint::new(c.x_max, c.t_p)?;
        let n = total_emitted(&p)?;
        let exact = density(&p, pt)?;
        let approx = evaluate_approx(&p, pt)?.norm_sqr();
        Ok(CriticalRow {
            k0_im,
            x_max: Some(c.x_max),
            t_p: Some(c.t_p),
            rho_exact_normalized: Some(n.normalize(exact)),
            rho_approx_normalized: Some(n.normalize(approx)),
            rho_exact_raw: Some(exact),
            rho_approx_raw: Some(approx),
            error: None,
        })
    };
    attempt().unwrap_or_else(|e| CriticalRow {
        k0_im,
        x_max: None,
        t_p: None,
        rho_exact_normalized: None,
        rho_approx_normalized: None,
        rho_exact_raw: None,
        rho_approx_raw: None,
        error: Some(e.to_string()),
    })
}

fn cmd_critical(grid: &str, common: &Common) -> CliResult<()> {
    let ks = parse_grid(grid)?;
    if ks.iter().any(|&k| !(k > -1.0 && k < 0.0)) {
        return Err(CliError::Usage("k0I values must lie in (-1, 0)".into()));
    }
    let rows: Vec<CriticalRow> =
        pool(common.parallelism)?.install(|| ks.par_iter().map(|&k| critical_row(k)).collect());
    let bytes = match common.format {
        Format::Csv => csv_bytes(
            &[
                "k0I",
                "x_max",
                "t_p",
                "rho_exact_normalized",
                "rho_approx_normalized",
                "rho_exact_raw",
                "rho_approx_raw",
                "error",
            ],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::F(r.k0_im),
                        Cell::OptF(r.x_max),
                        Cell::OptF(r.t_p),
                        Cell::OptF(r.rho_exact_normalized),
                        Cell::OptF(r.rho_approx_normalized),
                        Cell::OptF(r.rho_exact_raw),
                        Cell::OptF(r.rho_approx_raw),
                        Cell::S(r.error.clone().unwrap_or_default()),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Json => json_bytes(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "critical",
            "rows": rows,
        }))?,
    };
    emit(&common.output, &bytes)
}

#[derive(Debug, Serialize)]
pub struct SiteSummary {
    pub site: usize,
    pub tail_exponent: Option<f64>,
    pub envelope_crossing: Option<f64>,
    pub transition_density: Option<f64>,
    pub t_p_alpha_in_numerator: Option<f64>,
    pub t_p_alpha_in_denominator: Option<f64>,
    pub t_p_resolved: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct LatticeSummary {
    pub delta: f64,
    pub n_sites: usize,
    pub t_max: f64,
    pub alpha: f64,
    pub gamma: Option<f64>,
    pub gamma_fitted: Option<f64>,
    pub rate_window: Option<[f64; 2]>,
    pub resolved_reading: Option<Reading>,
    pub reading_max_rel_deviation: Option<f64>,
    pub sites: Vec<SiteSummary>,
    pub notes: Vec<String>,
}

fn lattice_summary(p: &LatticeParams, sites: &[usize]) -> LatticeSummary {
    let mut notes = Vec::new();
    let uniform = p.delta >= 1.0;
    let (gamma, gamma_fitted, window) = if uniform {
        notes.push("uniform chain: no exponential stage".to_string());
        (None, None, None)
    } else {
        let (lo, hi) = rate_window(p);
        match fit_decay_rate(p, 1, lo, hi) {
            Ok(g) => (Some(p.gamma()), Some(g), Some([lo, hi])),
            Err(e) => {
                notes.push(format!("decay rate not fitted: {e}"));
                (Some(p.gamma()), None, None)
            }
        }
    };
    let per_site: Vec<(SiteSummary, Option<ReadingComparison>)> = sites
        .par_iter()
        .map(|&n| {
            let tail = tail_exponent(p, n).ok();
            let crossing = if uniform { None } else { envelope_crossing(p, n).ok() };
            let formula = |r: Reading| {
                if uniform || n < 2 {
                    None
                } else {
                    lattice_transition_time(p, n, r).ok().flatten()
                }
            };
            let (a, b) = (formula(Reading::AlphaInNumerator), formula(Reading::AlphaInDenominator));
            let cmp = match (crossing, n >= 2) {
                (Some(c), true) => Some(ReadingComparison {
                    site: n,
                    measured: c.t_cross,
                    alpha_in_numerator: a,
                    alpha_in_denominator: b,
                }),
                _ => None,
            };
            (
                SiteSummary {
                    site: n,
                    tail_exponent: tail,
                    envelope_crossing: crossing.map(|c| c.t_cross),
                    transition_density: crossing.map(|c| c.density),
                    t_p_alpha_in_numerator: a,
                    t_p_alpha_in_denominator: b,
                    t_p_resolved: None,
                },
                cmp,
            )
        })
        .collect();
    let comparisons: Vec<ReadingComparison> = per_site.iter().filter_map(|(_, c)| c.clone()).collect();
    let resolution: Option<ReadingResolution> = select_reading(comparisons);
    if resolution.is_none() && !uniform {
        notes.push("no site with a measurable envelope crossing; reading unresolved".into());
    }
    let mut site_rows: Vec<SiteSummary> = per_site.into_iter().map(|(s, _)| s).collect();
    let tail_start = crate::lattice::tail_window(p).0;
    for s in &site_rows {
        if s.envelope_crossing.is_some_and(|t| t > tail_start) {
            notes.push(format!(
                "site {}: tail window starts at {tail_start} before the crossing; raise --t-max",
                s.site
            ));
        }
    }
    if let Some(r) = &resolution {
        for s in &mut site_rows {
            s.t_p_resolved = match r.selected {
                Reading::AlphaInNumerator => s.t_p_alpha_in_numerator,
                Reading::AlphaInDenominator => s.t_p_alpha_in_denominator,
            };
        }
    }
    LatticeSummary {
        delta: p.delta,
        n_sites: p.n_sites,
        t_max: p.t_max,
        alpha: p.alpha(),
        gamma,
        gamma_fitted,
        rate_window: window,
        resolved_reading: resolution.as_ref().map(|r| r.selected),
        reading_max_rel_deviation: resolution.as_ref().map(|r| r.max_rel_deviation),
        sites: site_rows,
        notes,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_lattice(
    delta: f64,
    sites: &str,
    t_max: f64,
    n_sites: Option<usize>,
    t_step: f64,
    summary: &Option<PathBuf>,
    common: &Common,
) -> CliResult<()> {
    let sites: Vec<usize> = sites
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("--sites `{sites}` is not a list of site numbers")))?;
    if sites.is_empty() || sites.contains(&0) {
        return Err(CliError::Usage("--sites needs site numbers >= 1".into()));
    }
    if !(t_step > 0.0) {
        return Err(CliError::Usage("--t-step must be positive".into()));
    }
    let n_sites = n_sites.unwrap_or_else(|| required_sites(t_max));
    let p = LatticeParams::new(delta, n_sites, t_max)?;
    let times = sample_times(t_max, t_step);
    let (series, summary_data) = pool(common.parallelism)?.install(|| {
        let s = site_densities(&p, &sites, &times);
        (s, lattice_summary(&p, &sites))
    });
    let series = series?;
    let mut rows = Vec::with_capacity(times.len() * sites.len());
    for (i, &t) in times.iter().enumerate() {
        for (j, &n) in sites.iter().enumerate() {
            rows.push((t, n, series[j][i]));
        }
    }
    match common.format {
        Format::Csv => {
            let bytes = csv_bytes(
                &["t", "n", "density"],
                &rows
                    .iter()
                    .map(|&(t, n, d)| vec![Cell::F(t), Cell::U(n), Cell::F(d)])
                    .collect::<Vec<_>>(),
            )?;
            emit(&common.output, &bytes)?;
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "lattice",
                "summary": summary_data,
            });
            let path = summary.clone().or_else(|| {
                common.output.as_ref().map(|o| {
                    let mut s = o.clone().into_os_string();
                    s.push(".summary.json");
                    PathBuf::from(s)
                })
            });
            let bytes = json_bytes(&doc)?;
            match path {
                Some(path) => emit(&Some(path), &bytes),
                None => std::io::stderr().write_all(&bytes).map_err(|e| CliError::Io(e.to_string())),
            }
        }
        Format::Json => {
            let json_rows: Vec<_> = rows
                .iter()
                .map(|&(t, n, d)| json!({"t": t, "n": n, "density": d}))
                .collect();
            let bytes = json_bytes(&json!({
                "schema_version": SCHEMA_VERSION,
                "command": "lattice",
                "summary": summary_data,
                "rows": json_rows,
            }))?;
            emit(&common.output, &bytes)
        }
    }
}

fn cmd_scenario(config: &Path, output: &Option<PathBuf>) -> CliResult<()> {
    let file = ScenarioFile::load(config)?;
    let scenario = file.scenario()?;
    let report = scenario_transition_report(&scenario, file.detector_distance)?;
    let bytes = json_bytes(&json!({
        "schema_version": SCHEMA_VERSION,
        "command": "scenario",
        "report": report,
    }))?;
    emit(output, &bytes)
}

fn cmd_selftest(inject: &Option<String>) -> CliResult<bool> {
    let fault = inject.as_deref().map(|_| Fault::Faddeeva);
    let outcomes = selftest::run(fault);
    let mut text = String::new();
    for o in &outcomes {
        let _ = writeln!(text, "{}", o.line());
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let verdict = if passed == outcomes.len() { "ok" } else { "FAILED" };
    let _ = writeln!(text, "selftest {verdict}: {passed}/{} checks passed", outcomes.len());
    print!("{text}");
    Ok(passed == outcomes.len())
}

/// Run a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Density {
            k0_im,
            x,
            x_grid,
            t_grid,
            common,
        } => cmd_density(*k0_im, x, x_grid, t_grid, common).map(|_| true),
        Command::Transition {
            k0_im,
            x,
            x_grid,
            method,
            common,
        } => cmd_transition(*k0_im, x, x_grid, *method, common).map(|_| true),
        Command::Critical { k0_im_grid, common } => cmd_critical(k0_im_grid, common).map(|_| true),
        Command::Lattice {
            delta,
            sites,
            t_max,
            n_sites,
            t_step,
            summary,
            common,
        } => cmd_lattice(*delta, sites, *t_max, *n_sites, *t_step, summary, common).map(|_| true),
        Command::Scenario { config, output } => cmd_scenario(config, output).map(|_| true),
        Command::Selftest { inject_fault } => cmd_selftest(inject_fault),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
