use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("empty bit string")]
    Empty,

    #[error("invalid bit character {0:?} (expected '0' or '1')")]
    InvalidBit(char),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("malformed query plan: {0}")]
    MalformedPlan(String),

    #[error("{name} = {value} outside its domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("statevector oracle unsupported: {0}")]
    OracleUnsupported(String),

    #[error("checker has not been initialized by a store")]
    Uninitialized,

    #[error("attack step {step} out of range (schedule has {steps} steps)")]
    StepOutOfRange { step: usize, steps: usize },

    #[error("attack step wants {wanted} fresh positions but only {available} remain unflipped")]
    ExhaustedPositions { wanted: usize, available: usize },

    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
