//! Confirmatory structural equation model with one exogenous latent factor
//! predicting any number of endogenous latent factors.
//!
//! Observed variables follow a simple structure: each loads on exactly one
//! latent, and one loading per latent is fixed to 1. The implied covariance
//! of the observed vector is
//!
//! ```text
//! Σ(θ) = Λ M Λᵀ + Θ,   M = ⎡ Φ      ΦΓᵀ       ⎤
//!                          ⎣ ΓΦ     ΓΦΓᵀ + Ψ  ⎦
//! ```
//!
//! with the full exogenous/endogenous cross block, and parameters are
//! estimated by minimising the maximum-likelihood discrepancy with BFGS.

mod discrepancy;
mod fit;
mod implied;
mod inference;
mod moments;
mod optimizer;
mod params;
mod report;
mod spec;
mod standardize;

pub use discrepancy::{ml_discrepancy, ml_gradient};
pub use fit::{fit, start_values, Convergence, FitOptions, FitResult, ParameterEstimate};
pub use implied::{implied_covariance, latent_covariance, latent_observed_covariance};
pub use inference::{
    baseline_chi_square, fit_statistics, standard_errors, two_sided_p, FitStatistics,
    StandardErrors,
};
pub use moments::{ObservedTable, SampleMoments};
pub use optimizer::{minimize_bfgs, Objective, OptimizerOptions, OptimizerOutcome};
pub use params::{ParamKind, ParameterInfo, ParameterVector, Parameterization};
pub use report::{render_table, significance_stars};
pub use spec::{Latent, ModelSpec, DEFAULT_MODEL};
pub use standardize::{standardize, StandardizedSolution};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SemError {
    #[error("model spec line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("indicator {indicator} is assigned to both {first} and {second}")]
    DuplicateIndicator {
        indicator: String,
        first: String,
        second: String,
    },
    #[error("latent {0} has no indicators")]
    EmptyLatent(String),
    #[error("latent {0} is declared more than once")]
    DuplicateLatent(String),
    #[error("unknown indicator {0}")]
    UnknownIndicator(String),
    #[error("unknown latent {0} in structural path")]
    UnknownLatent(String),
    #[error("{0}")]
    Structure(String),
    #[error("parameter vector has {found} entries, model needs {expected}")]
    ParameterLength { expected: usize, found: usize },
    #[error("invalid parameter {name}: {value}")]
    InvalidParameter { name: String, value: f64 },
    #[error("sample covariance is not positive definite")]
    SampleNotPositiveDefinite,
    #[error("implied covariance is not positive definite")]
    ImpliedNotPositiveDefinite,
    #[error("sample covariance is not symmetric")]
    NotSymmetric,
    #[error("need more cases than observed variables: N = {n}, p = {p}")]
    TooFewCases { n: usize, p: usize },
    #[error("model is not identified: {free} free parameters for {moments} moments (df = {df})")]
    Unidentified { free: usize, moments: usize, df: i64 },
    #[error("zero implied variance for {0}")]
    DegenerateVariance(String),
    #[error("fit did not converge after {iterations} iterations (gradient max-norm {gradient_norm:e})")]
    NotConverged {
        iterations: usize,
        gradient_norm: f64,
    },
    #[error(transparent)]
    Data(#[from] crate::datamodel::DataError),
}
