use thiserror::Error;

/// Errors raised anywhere in the POD/ROM pipeline.
#[derive(Debug, Error)]
pub enum PodError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh mismatch: {left} vs {right} elements")]
    MeshMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value {value} at {location}")]
    NonFinite { value: f64, location: String },

    #[error(
        "time grid incompatible with boundary conditions: k*t = {kt} is not an integer \
         (snapshots must vanish at x=0 and x=1, which requires k*dt to be a positive integer)"
    )]
    GridIncompatible { kt: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rank {r} out of range 1..={max}")]
    RankOutOfRange { r: usize, max: usize },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("all snapshots vanish: the POD basis is empty")]
    EmptyBasis,

    #[error("zero denominator: the eigenvalue tail vanishes (r = s)")]
    ZeroTail,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl PodError {
    /// True for errors caused by invalid user input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            PodError::InvalidMesh(_)
                | PodError::MeshMismatch { .. }
                | PodError::DimensionMismatch { .. }
                | PodError::GridIncompatible { .. }
                | PodError::InvalidParameter(_)
                | PodError::RankOutOfRange { .. }
                | PodError::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, PodError>;
