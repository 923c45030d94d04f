use thiserror::Error;

/// Errors raised by the model, solvers and scenario tooling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("w(z) out of domain at z = {re} + {im}i: exp(-z^2) would overflow")]
    FaddeevaOverflow { re: f64, im: f64 },

    #[error("asymptotic series requested at |z| = {modulus}, below the validity floor {floor}")]
    AsymptoticDomain { modulus: f64, floor: f64 },

    #[error("wave function cannot be evaluated at x = {x}, t = {t}: {reason}")]
    EvaluationDomain { x: f64, t: f64, reason: String },

    #[error("saddle term singular at x = {x}, t = {t} (|t^2 - tau^2| = {gap:e})")]
    SingularConfiguration { x: f64, t: f64, gap: f64 },

    #[error("quadrature did not converge: estimate {estimate} with error {error} after {intervals} intervals")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("no bracket for the root in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("transition still present at the scan ceiling x = {ceiling}")]
    RangeExhausted { ceiling: f64 },

    #[error("chain of {n_sites} sites is too short for t_max = {t_max}; need at least {required}")]
    TruncationUnsound {
        n_sites: usize,
        t_max: f64,
        required: usize,
    },

    #[error("fit window too short: {0}")]
    InsufficientWindow(String),

    #[error("scenario cannot be represented: {0}")]
    ScenarioUnrepresentable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
