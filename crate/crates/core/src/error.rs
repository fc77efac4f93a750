use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid too small: n = {n}, need at least {min}")]
    GridTooSmall { n: usize, min: usize },

    #[error("grid size must be even, got n = {0}")]
    OddGridSize(usize),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid parameter {name} = {value}: must lie in {range}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("depth condition violated: min h = {min_h} at index {index} (floor {h0})")]
    DepthViolation { min_h: f64, index: usize, h0: f64 },

    #[error("factorization of the elliptic operator failed at row {row} (pivot {pivot}, min h = {min_h})")]
    NotPositiveDefinite { row: usize, pivot: f64, min_h: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("domain too short: solitary-wave tail is {tail:e} at the periodic seam (tolerance {tol:e})")]
    DomainTooShort { tail: f64, tol: f64 },

    #[error("time {t} outside reference trajectory window [{start}, {end}]")]
    OutsideWindow { t: f64, start: f64, end: f64 },

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("config error: missing required key '{0}'")]
    MissingKey(&'static str),

    #[error("bathymetry file error at row {row}: {msg}")]
    BathymetryFile { row: usize, msg: String },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

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
