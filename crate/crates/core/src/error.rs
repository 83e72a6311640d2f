use thiserror::Error;

/// Errors raised by solvers, problem constructors and certificates.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value at coordinate {coord} ({context})")]
    NonFinite { coord: usize, context: String },

    #[error("non-finite intermediate at iteration {k}: {detail}")]
    NonFiniteIterate { k: usize, detail: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("parameter out of range: {0}")]
    ParameterRange(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("operator violates assumptions at achievable step sizes ({shrinks} shrinkages by iteration {k})")]
    BacktrackingExhausted { k: usize, shrinks: u64 },

    #[error("certificate generation failed after {attempts} attempts")]
    CertificationFailed { attempts: usize },

    #[error("noise schedule has no variance at half-index {half_index}")]
    ScheduleMissing { half_index: usize },

    #[error("all sampled pairs were degenerate")]
    DegenerateSample,

    #[error("index {index} out of range (trace has {len} iterates)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("cannot resume: {0}")]
    Resume(String),

    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
