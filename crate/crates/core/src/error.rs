use thiserror::Error;

/// Errors raised by the curve analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The base point lies on the curve, so the winding number is undefined.
    #[error("base point ({x}, {y}) lies on the curve")]
    OnCurve { x: f64, y: f64 },

    /// Argument tracking could not resolve the turning even after refining the grid.
    #[error("winding number unresolved: step turn {max_step:.3} rad on a grid of {samples}")]
    Unresolved { max_step: f64, samples: usize },

    #[error("kernel integral too close to its pole: beta = {beta}, |alpha| = {alpha_abs}")]
    NearPole { beta: f64, alpha_abs: f64 },

    #[error("parameter t = {t} is not a singular point")]
    NotSingular { t: f64 },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("window [{lo}, {hi}] contains a second predicted cusp at t = {other}")]
    WindowTooWide { lo: f64, hi: f64, other: f64 },

    #[error("nothing to render")]
    EmptyInput,

    #[error("malformed curve description: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag, used for JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::OnCurve { .. } => "OnCurve",
            Error::Unresolved { .. } => "Unresolved",
            Error::NearPole { .. } => "NearPole",
            Error::NotSingular { .. } => "NotSingular",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::WindowTooWide { .. } => "WindowTooWide",
            Error::EmptyInput => "EmptyInput",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
