//! Identifiers, ingestion and validation for label streams, hazard tables
//! and the county registry, plus indicator/hazard correlation.

mod climate;
mod correlate;
mod ids;
mod labels;
mod registry;

pub use climate::{ingest_climate, write_climate, ClimateTable, Hazard};
pub use correlate::{correlate, write_correlations, CorrelationMatrix, MIN_COMPLETE_PAIRS};
pub use ids::{CensusAreaId, CountyId, QuestionId};
pub use labels::{
    ingest_labels, write_labels, DateWindow, IngestOptions, IngestReport, Label, LabelIngest,
    LabelRecord, QuestionSet, RowError, UnknownQuestionPolicy,
};
pub use registry::{CountyEntry, CountyRegistry};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid county FIPS code {0:?}: expected 5 digits")]
    InvalidCounty(String),
    #[error("invalid census area GEOID {0:?}: expected 11 digits")]
    InvalidArea(String),
    #[error("census area {geoid} does not belong to county {county}")]
    AreaCountyMismatch { geoid: String, county: String },
    #[error("invalid question key {0:?}")]
    InvalidQuestion(String),
    #[error("unknown question {question:?} on line {line}")]
    UnknownQuestion { question: String, line: u64 },
    #[error("invalid label {0:?}: expected not_present, low, medium or high")]
    InvalidLabel(String),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("score out of range for county {county}, {hazard}: {value} not in [0, 100]")]
    ScoreOutOfRange {
        county: String,
        hazard: &'static str,
        value: f64,
    },
    #[error("duplicate county {0}")]
    DuplicateCounty(String),
    #[error("malformed row on line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("no counties in common between indicator and climate tables")]
    EmptyIntersection,
    #[error("invalid date window: {start} is after {end}")]
    InvalidWindow {
        start: chrono::NaiveDate,
        end: chrono::NaiveDate,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
