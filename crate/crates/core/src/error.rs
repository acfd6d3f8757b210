use thiserror::Error;

/// Errors raised by the model and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mixing angle undefined: spin-changing coupling is zero")]
    UndefinedMixing,

    #[error("squeezed state truncated too early: tail weight {tail:e} at k_max = {k_max}")]
    Truncation { k_max: usize, tail: f64 },

    #[error("invalid mode ({n}, {l}): {reason}")]
    InvalidMode { n: u32, l: i32, reason: &'static str },

    #[error("image has zero total mass")]
    ZeroMass,

    #[error("orientation indeterminate: relative eigenvalue gap {gap:e}")]
    IndeterminateOrientation { gap: f64 },

    #[error("grid mismatch between images")]
    GridMismatch,

    #[error("angle domains differ ({0} vs {1} rad)")]
    DomainMismatch(f64, f64),

    #[error("degenerate mode-weight fit: all weights zero")]
    DegenerateFit,

    #[error("empty input")]
    EmptyInput,

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
