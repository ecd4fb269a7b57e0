use thiserror::Error;

use crate::projection::ProjectionResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, found n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular point: |N_h| = {nh_norm:e} is not above {threshold:e}")]
    SingularPoint { nh_norm: f64, threshold: f64 },

    #[error("point is off the surface: |g| = {residual:e}")]
    OffSurface { residual: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("ambiguous projection: {} feet at equal distance", .solutions.len())]
    AmbiguousProjection { solutions: Vec<ProjectionResult> },

    #[error("reach exceeded: {0}")]
    ReachExceeded(String),

    #[error("wrong dimension: operation needs n = {required}, surface has n = {found}")]
    WrongDimension { required: usize, found: usize },

    #[error("surface is not umbilic here (residual {residual:e})")]
    NotUmbilic { residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable name, used by the CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::SingularPoint { .. } => "SingularPoint",
            Error::OffSurface { .. } => "OffSurface",
            Error::NoConvergence(_) => "NoConvergence",
            Error::AmbiguousProjection { .. } => "AmbiguousProjection",
            Error::ReachExceeded(_) => "ReachExceeded",
            Error::WrongDimension { .. } => "WrongDimension",
            Error::NotUmbilic { .. } => "NotUmbilic",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}
