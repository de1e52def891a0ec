use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("no feasible instance after {attempts} attempts (seed {seed}, {num_edges} edges)")]
    NoFeasibleInstance { seed: u64, num_edges: usize, attempts: u32 },

    #[error("{n} qubits exceeds the dense-simulation cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },

    #[error("non-finite gradient component at index {0}")]
    NonFiniteGradient(usize),

    #[error("expectation {value} lies outside [{e_min}, {e_max}]")]
    ExpectationOutOfRange { value: f64, e_min: f64, e_max: f64 },

    #[error("malformed report: {0}")]
    MalformedReport(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
