use thiserror::Error;

/// Errors raised by the barrier, solver and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CbfError {
    /// Two robots are (numerically) on top of each other; the barrier is undefined.
    #[error("singular pair: relative distance {distance:e} is below the singularity threshold")]
    SingularPair { distance: f64 },

    /// A weight denominator (L_f h or h) is too close to zero to divide by.
    #[error("degenerate weight: {which} denominator {value:e} is within epsilon of zero")]
    DegenerateWeight { which: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A constraint with zero coefficient vector and a negative constant term.
    #[error("degenerate constraint #{index}: zero coefficient with constant {b:e}")]
    DegenerateConstraint { index: usize, b: f64 },

    #[error("unsupported dimension {0}; only 1 and 2 are supported")]
    UnsupportedDimension(usize),

    #[error("robots {0} and {1} start closer than the safe distance")]
    SpacingTooTight(usize, usize),

    #[error("not a one-dimensional scenario")]
    NotOneDimensional,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Malformed configuration text, including unknown keys and wrong types.
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    /// Well-formed configuration that violates an invariant.
    #[error("invalid config: {0}")]
    Validation(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },

    /// A fatal error raised while stepping a simulation.
    #[error("simulation aborted at step {step}: {source}")]
    Fatal {
        step: usize,
        #[source]
        source: Box<CbfError>,
    },
}

impl CbfError {
    /// True for errors caused by bad input rather than by a running simulation.
    pub fn is_validation(&self) -> bool {
        !matches!(self, CbfError::Fatal { .. } | CbfError::Io { .. })
    }

    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CbfError::Io { path: path.display().to_string(), message: err.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, CbfError>;
