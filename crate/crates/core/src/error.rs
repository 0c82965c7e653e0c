use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tether cable has zero length (attachment point coincides with anchor)")]
    DegenerateTether,

    #[error("composite inertia matrix is singular")]
    SingularInertia,

    #[error("non-finite state: {0}")]
    NonFinite(String),

    #[error("time {t} s outside scenario range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("empty series")]
    EmptySeries,

    #[error("log mismatch: {0}")]
    LogMismatch(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
