use thiserror::Error;

/// Errors raised by the discretization, the solvers and the CLI layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid too coarse: n = {0} interior nodes, at least 8 required")]
    GridTooCoarse(usize),

    #[error("degenerate interval [{lo}, {hi}]")]
    DegenerateInterval { lo: f64, hi: f64 },

    #[error("invalid coefficient `{role}`: {reason}")]
    InvalidCoefficient { role: String, reason: String },

    #[error("non-positive diffusion coefficient (min = {0})")]
    NonPositiveDiffusion(f64),

    #[error("shift below principal eigenvalue: shifted operator is not inverse-positive")]
    ShiftBelowPrincipal,

    #[error("singular matrix (zero pivot at row {0})")]
    Singular(usize),

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("primal/adjoint principal eigenvalues disagree: {primal} vs {adjoint}")]
    EigenMismatch { primal: f64, adjoint: f64 },

    #[error("dense eigensolve failed")]
    EigensolveFailed,

    #[error("lost positivity: converged logistic solution changes sign")]
    LostPositivity,

    #[error("state outside admissible cone: 1 + m w = {0:.3e} at some node")]
    Inadmissible(f64),

    #[error("wedge curve undefined here: {0}")]
    WedgeUndefined(String),

    #[error("singular Jacobian near a fold; use arclength continuation")]
    SingularJacobian,

    #[error("seed amplitude too large: {0}")]
    SeedTooLarge(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
