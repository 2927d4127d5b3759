use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("size mismatch: source has {source_len} points, target has {target_len}")]
    SizeMismatch { source_len: usize, target_len: usize },

    #[error("point {point} has a non-finite coordinate on axis {axis}")]
    NonFinite { point: usize, axis: usize },

    #[error("index {index} out of range for {len} points")]
    InvalidIndex { index: usize, len: usize },

    #[error("not a permutation: {0}")]
    NotPermutation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("assignment oracle refused n = {n}, cap is {cap}")]
    OracleCapExceeded { n: usize, cap: usize },

    #[error("map does not respect dual pair at depth {depth}: source {source_index} lands outside the target cell")]
    PairViolation { depth: usize, source_index: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by reading or writing files rather than by bad input.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}

pub(crate) fn ensure_same_len(source_len: usize, target_len: usize) -> Result<()> {
    if source_len != target_len {
        return Err(Error::SizeMismatch { source_len, target_len });
    }
    Ok(())
}

pub(crate) fn ensure_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
