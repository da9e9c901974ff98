use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelaxError {
    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: String },

    #[error("hypothesis {hypothesis} violated: {detail}")]
    HypothesisViolation {
        hypothesis: &'static str,
        detail: String,
    },

    #[error("recession estimate along {direction:?} did not settle (spread {spread:e})")]
    RecessionEstimation { direction: Vec<f64>, spread: f64 },

    #[error("point {x} lies outside [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("invalid representation: {0}")]
    Representation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("document error: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, RelaxError>;
