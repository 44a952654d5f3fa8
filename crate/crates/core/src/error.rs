use std::path::PathBuf;

use crate::bounds::Strategy;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A fully decohered sensor (V = 0) carries no phase information.
    #[error("phase variance diverges at zero visibility")]
    DivergentVariance,

    #[error("every sensor was excluded by the outlier filter")]
    NoSurvivors,

    #[error("all fusion weights are zero")]
    NoInformation,

    #[error("fault budget exceeded: {faults} faults among {sensors} sensors under {strategy:?}")]
    FaultBudgetExceeded {
        sensors: usize,
        faults: usize,
        strategy: Strategy,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing data file {}", .0.display())]
    MissingData(PathBuf),

    #[error("checksum mismatch for {}: expected {expected}, got {actual}", path.display())]
    Checksum {
        path: PathBuf,
        expected: String,
        actual: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {x}")))
    }
}
