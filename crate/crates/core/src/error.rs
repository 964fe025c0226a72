use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid occupation window [{n_min}, {n_max}]")]
    InvalidWindow { n_min: usize, n_max: usize },

    #[error("mode {mode}: occupation {value} outside window [{n_min}, {n_max}]")]
    OccupationOutOfWindow {
        mode: usize,
        value: usize,
        n_min: usize,
        n_max: usize,
    },

    #[error("expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("register dimension overflows the addressable size ({0})")]
    DimensionOverflow(String),

    #[error("cannot allocate {bytes} bytes for the state vector")]
    OutOfMemory { bytes: usize },

    #[error("operator dimension {dim} exceeds the limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("{kind} index {index} out of range (have {len})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        len: usize,
    },

    #[error("repeated target {0}")]
    RepeatedTarget(usize),

    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("register layouts differ")]
    LayoutMismatch,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("Krylov exponentiation did not converge (residual {residual:.3e} > {tolerance:.3e})")]
    KrylovNonConvergence { residual: f64, tolerance: f64 },

    #[error("hardware: {0}")]
    Hardware(String),

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config: {0} missing")]
    ConfigMissing(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
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
