use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// The variants fall into two families: invalid inputs (metrics, grids, data,
/// configuration) and numerical failures (degenerate marching cells,
/// quadrature that does not settle under panel doubling).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid boundary model: {0}")]
    InvalidBoundary(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("coordinates outside the characteristic patch: {0}")]
    OutsidePatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate cell at (mu={mu}, nu={nu}): per-cell coefficient {coefficient:e}; shrink h")]
    DegenerateCell { mu: f64, nu: f64, coefficient: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for this error class: 2 for rejected inputs, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidMetric(_)
            | Error::InvalidBoundary(_)
            | Error::InvalidGrid(_)
            | Error::InvalidData(_)
            | Error::OutsidePatch(_)
            | Error::Config(_) => 2,
            Error::DegenerateCell { .. } | Error::Quadrature(_) | Error::Numerical(_) => 3,
            Error::Io(_) => 3,
        }
    }
}
