//! Seeded synthetic fixtures: label streams and multivariate observations
//! drawn from a known model.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`. Work is
//! split into independent streams (`set_stream(k)`) per county or per case,
//! so output is the same for any thread count. Normal deviates use the
//! Marsaglia polar method, see [`Gaussian`].

mod labels;
mod observations;
mod rng;

use thiserror::Error;

pub use labels::{
    county_fips, generate_labels, generate_labels_with, sem_label_targets, LabelProbabilities,
    LabelSynthConfig, QuestionProbabilities, QuestionTarget, RELATED_SHARE,
};
pub use observations::{
    climate_from_scores, generate_observations, random_parameters, sign_pattern_truth,
    Observations,
};
pub use rng::{stream_rng, uniform, Gaussian};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("label probabilities for {0} must be non-negative and sum to 1")]
    Probabilities(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("case count {n} must exceed the number of observed variables {p}")]
    TooFewCases { n: usize, p: usize },
    #[error(transparent)]
    Sem(#[from] crate::sem::SemError),
    #[error(transparent)]
    Data(#[from] crate::datamodel::DataError),
}
