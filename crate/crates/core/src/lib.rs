//! County-level expressed-flourishing indicators and a climate-risk
//! structural equation model.
//!
//! The crate is organised as a pipeline:
//!
//! * [`datamodel`] ingests classified label streams and hazard tables and
//!   computes indicator/hazard correlations.
//! * [`indicators`] recodes labels and rolls them up from census area and
//!   day to county level.
//! * [`sem`] specifies, fits and summarises the latent-variable model.
//! * [`scoring`] produces per-county latent scores and map-ready exports.
//! * [`synth`] generates reproducible synthetic fixtures from known truth.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise. Results are
//! identical either way.

/// Library version, recorded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod datamodel;
pub mod indicators;
pub mod par;
pub mod scoring;
pub mod sem;
pub mod synth;

pub use datamodel::{
    correlate, ingest_climate, ingest_labels, CensusAreaId, ClimateTable, CorrelationMatrix,
    CountyId, CountyRegistry, DataError, DateWindow, Hazard, IngestOptions, Label, LabelRecord,
    QuestionId,
};
pub use indicators::{IndicatorMatrix, RecodingScheme};
pub use sem::{fit, FitOptions, FitResult, ModelSpec, ParameterVector, SampleMoments};

