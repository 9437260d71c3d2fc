use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by loaders, statistics, and pipeline operations.
///
/// Variants carry enough context (file, line, index) for a CLI to print a
/// single actionable diagnostic.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: duplicate token \"{token}\"")]
    DuplicateToken {
        path: PathBuf,
        line: usize,
        token: String,
    },

    #[error("{path}:{line}: expected {expected} values per line, found {found}")]
    InconsistentDimension {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}:{line}: {reason}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("invalid vocabulary token \"{token}\": {reason}")]
    InvalidToken { token: String, reason: String },

    #[error("vocabulary size mismatch: expected {expected}, found {found}")]
    VocabMismatch { expected: usize, found: usize },

    #[error("{path}: no usable categories after vocabulary filtering")]
    NoCategories { path: PathBuf },

    #[error("invalid UTF-8 in input at byte offset {offset}")]
    InvalidUtf8 { offset: u64 },

    #[error("dimension {dim} is constant; cannot standardize")]
    ConstantDimension { dim: usize },

    #[error("sample too small: {n} values, need at least {min}")]
    SampleTooSmall { n: usize, min: usize },

    #[error("category \"{name}\" has {size} words; metric requires at least {min}")]
    CategoryTooSmall {
        name: String,
        size: usize,
        min: usize,
    },

    #[error("category \"{name}\" has an all-zero weight column; cannot normalize")]
    AllZeroColumn { name: String },

    #[error("weight matrix is in state {found:?}, operation requires {expected:?}")]
    WeightState {
        expected: crate::weights::WeightState,
        found: crate::weights::WeightState,
    },

    #[error("k = {k} out of range 1..={max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("matrix shapes incompatible: {rows_a}x{cols_a} vs {rows_b}x{cols_b}")]
    ShapeMismatch {
        rows_a: usize,
        cols_a: usize,
        rows_b: usize,
        cols_b: usize,
    },

    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("{what} must not be empty")]
    EmptyInput { what: &'static str },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown weight metric \"{name}\"; registered metrics: {known}")]
    UnknownMetric { name: String, known: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
