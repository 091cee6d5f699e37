//! Label recoding and the area/day → county aggregation chain.
//!
//! ```text
//! records ──recode──▶ DailyCells ──aggregate_county──▶ CountySums ──normalize──▶ IndicatorMatrix
//! ```
//!
//! Aggregation follows a map-combine contract. Each shard of records is
//! folded into per-cell label counts independently; counts merge by integer
//! addition and the numeric sum is formed once per cell, so the result does
//! not depend on record order or sharding.

mod aggregate;
mod derive;
mod dictionary;
mod io;
mod matrix;
mod pipeline;
mod recode;

pub use aggregate::{
    aggregate_county, aggregate_daily, monthly_periods, normalize, CountySum, CountySums,
    DailyAreaCell, DailyCells,
};
pub use derive::{derive, screen_variance, DerivationRule, Transform, DEFAULT_VARIANCE_THRESHOLD};
pub use dictionary::{DictionaryEntry, IndicatorDictionary};
pub use io::{read_indicators, write_indicators, SUPPORT_SUFFIX};
pub use matrix::{IndicatorColumn, IndicatorMatrix};
pub use pipeline::{build_indicators, BuildSummary, IndicatorBuild};
pub use recode::{recode, RecodingScheme};

use thiserror::Error;

use crate::datamodel::DataError;

#[derive(Debug, Error)]
pub enum IndicatorError {
    #[error("recoding score for {label} is {value}, outside [-1, 1]")]
    SchemeOutOfBounds { label: &'static str, value: f64 },
    #[error("not_present must recode to 0, got {0}")]
    NotPresentNonZero(f64),
    #[error("column {column}: {values} values but {support} support counts for {counties} counties")]
    ColumnLength {
        column: String,
        values: usize,
        support: usize,
        counties: usize,
    },
    #[error("column {column}, row {row}: value presence disagrees with support {support}")]
    SupportMismatch {
        column: String,
        row: usize,
        support: u64,
    },
    #[error("column {column}, row {row}: value {value} outside [-1, 1]")]
    OutOfBounds {
        column: String,
        row: usize,
        value: f64,
    },
    #[error("duplicate indicator column {0}")]
    DuplicateColumn(String),
    #[error("duplicate county {0}")]
    DuplicateCounty(String),
    #[error("derivation source column {0} not found")]
    MissingSource(String),
    #[error("derivation target {0} equals its source or already exists")]
    InvalidTarget(String),
    #[error("variance threshold must be a finite non-negative number, got {0}")]
    InvalidThreshold(f64),
    #[error("indicator dictionary: {0}")]
    Dictionary(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
