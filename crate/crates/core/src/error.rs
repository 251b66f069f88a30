use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("cell count {cells} exceeds cap {cap}")]
    CellCapExceeded { cells: u128, cap: usize },

    #[error("sample count {count} exceeds cap {cap} and subsampling is disabled")]
    SampleCapExceeded { count: u128, cap: usize },

    #[error("point outside the domain of g (coordinate {coord}, radicand {radicand:e})")]
    Domain { coord: usize, radicand: f64 },

    #[error("point on the boundary of the domain of g (coordinate {coord})")]
    Boundary { coord: usize },

    #[error("no sign change on coordinate {coord}")]
    NoSignChange { coord: usize },

    #[error("catalog has no bounded gaps and its interior status is unknown")]
    UndecidableInterior,

    #[error("{points} points cannot determine a hyperplane in dimension {dim}")]
    Underdetermined { points: usize, dim: usize },

    #[error("search exhausted: {0}")]
    Exhausted(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
