use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("curve is singular at theta = {theta} (|beta| = {beta:e})")]
    SingularPoint { theta: f64, beta: f64 },

    #[error("grid of {n} points cannot resolve trigonometric degree {k} (need n >= 2k + 2)")]
    Alias { n: usize, k: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(
        "algebraic length {length:e} is below the floor at t = {t}; the area-preserving nonlocal term is undefined"
    )]
    DegenerateLength { length: f64, t: f64 },

    #[error("time step {dt} exceeds the stability bound {bound:e} at t = {t}")]
    Stability { dt: f64, bound: f64, t: f64 },

    #[error("area-preserving flow needs a positive initial algebraic area, got {area}")]
    NonPositiveArea { area: f64 },

    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),

    #[error("flow has not converged to a circle (max |mode k>=2| = {residual:e})")]
    NotConverged { residual: f64 },

    #[error("decay fit window is too noisy (r^2 = {r2})")]
    WindowTooNoisy { r2: f64 },

    #[error("decay fit window unusable: {0}")]
    InsufficientWindow(String),

    #[error("inequality requires zero algebraic length, got {length:e}")]
    NotZeroLength { length: f64 },

    #[error("series carries mass {mass:e} on excluded mode {k}")]
    ModeNotExcluded { k: usize, mass: f64 },

    #[error("rejection sampling exhausted after {attempts} attempts for curve {index}")]
    RejectionExhausted { index: usize, attempts: usize },

    #[error("invalid mode index {k} (modes start at 1)")]
    InvalidMode { k: usize },

    #[error("duplicate mode {k}{}", line.map(|l| format!(" on line {l}")).unwrap_or_default())]
    DuplicateMode { k: usize, line: Option<usize> },

    #[error("non-finite coefficient")]
    NonFinite,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by malformed input rather than by the mathematics of a run.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::DuplicateMode { .. }
                | Error::InvalidMode { .. }
                | Error::InvalidArgument(_)
                | Error::InvalidConfig(_)
                | Error::InvalidGrid(_)
        )
    }
}
