//! Per-county latent scores from a fitted model, and exports for mapping.

mod export;
mod geojson;
mod scores;

use thiserror::Error;

pub use export::{path_order, read_scores, write_scores};
pub use geojson::{join_geojson, JoinReport, DEFAULT_JOIN_KEY};
pub use scores::{factor_scores, score_covariance, score_with, FactorScoreTable, ScoreMethod};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("fit did not converge; refusing to score")]
    NotConverged,
    #[error("implied covariance is not positive definite")]
    ImpliedNotPositiveDefinite,
    #[error("Bartlett scores need positive residual variances; {0} has none")]
    ZeroResidual(String),
    #[error("no complete county rows to score")]
    NoCompleteRows,
    #[error("score table: {0}")]
    Table(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error(transparent)]
    Sem(#[from] crate::sem::SemError),
    #[error(transparent)]
    Data(#[from] crate::datamodel::DataError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
