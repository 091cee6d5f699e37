use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ScoringError;
use crate::datamodel::CountyId;
use crate::par;
use crate::sem::{implied_covariance, latent_observed_covariance, FitResult, ModelSpec, ObservedTable, ParameterVector};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMethod {
    /// `Σ_lo Σ⁻¹ (z − z̄)`.
    #[default]
    Regression,
    /// `(ΛᵀΘ⁻¹Λ)⁻¹ ΛᵀΘ⁻¹ (z − z̄)`.
    Bartlett,
}

/// Latent scores, one row per scored county.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorScoreTable {
    pub latents: Vec<String>,
    pub counties: Vec<CountyId>,
    pub scores: Vec<Vec<f64>>,
    /// Counties with a missing observed value.
    pub excluded: Vec<CountyId>,
}

impl FactorScoreTable {
    /// Columns rearranged so that column `i` is old column `order[i]`.
    pub fn reorder(&self, order: &[usize]) -> Self {
        Self {
            latents: order.iter().map(|&k| self.latents[k].clone()).collect(),
            counties: self.counties.clone(),
            scores: self
                .scores
                .iter()
                .map(|r| order.iter().map(|&k| r[k]).collect())
                .collect(),
            excluded: self.excluded.clone(),
        }
    }

    pub fn column(&self, latent: &str) -> Option<Vec<f64>> {
        let k = self.latents.iter().position(|l| l == latent)?;
        Some(self.scores.iter().map(|r| r[k]).collect())
    }
}

/// Scores from a converged fit.
pub fn factor_scores(
    spec: &ModelSpec,
    result: &FitResult,
    data: &ObservedTable,
    method: ScoreMethod,
) -> Result<FactorScoreTable, ScoringError> {
    if !result.convergence.converged {
        return Err(ScoringError::NotConverged);
    }
    score_with(spec, &result.parameters, data, method)
}

/// Regression-score weights `Σ_lo Σ⁻¹` (latents × observed).
fn regression_weights(spec: &ModelSpec, theta: &ParameterVector) -> Result<DMatrix<f64>, ScoringError> {
    let chol = implied_covariance(spec, theta)
        .cholesky()
        .ok_or(ScoringError::ImpliedNotPositiveDefinite)?;
    // Σ symmetric, so (Σ⁻¹ Σ_ol)ᵀ = Σ_lo Σ⁻¹
    Ok(chol.solve(&latent_observed_covariance(spec, theta).transpose()).transpose())
}

fn bartlett_weights(spec: &ModelSpec, theta: &ParameterVector) -> Result<DMatrix<f64>, ScoringError> {
    // Simple structure makes ΛᵀΘ⁻¹Λ diagonal, so each latent only weighs
    // its own indicators.
    let p = spec.n_observed();
    let mut info = vec![0.0; spec.n_latent()];
    for a in 0..p {
        let t = theta.residual_variances[a];
        if !(t > 0.0) {
            return Err(ScoringError::ZeroResidual(spec.observed()[a].clone()));
        }
        info[spec.owner(a)] += theta.loadings[a] * theta.loadings[a] / t;
    }
    Ok(DMatrix::from_fn(spec.n_latent(), p, |k, a| {
        if spec.owner(a) == k {
            theta.loadings[a] / theta.residual_variances[a] / info[k]
        } else {
            0.0
        }
    }))
}

/// Scores at arbitrary parameters.
///
/// `data` is aligned to the spec's observed order; counties with any gap
/// are excluded. Centering uses the means of the complete rows, so adding
/// a constant to a column leaves every score unchanged.
pub fn score_with(
    spec: &ModelSpec,
    theta: &ParameterVector,
    data: &ObservedTable,
    method: ScoreMethod,
) -> Result<FactorScoreTable, ScoringError> {
    theta.check_shape(spec)?;
    let data = data.select(spec.observed())?;
    let (counties, rows, excluded) = data.listwise();
    if rows.is_empty() {
        return Err(ScoringError::NoCompleteRows);
    }
    let weights = match method {
        ScoreMethod::Regression => regression_weights(spec, theta)?,
        ScoreMethod::Bartlett => bartlett_weights(spec, theta)?,
    };
    let p = spec.n_observed();
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..p).map(|a| rows.iter().map(|r| r[a]).sum::<f64>() / n).collect();
    let scores = par::map(&rows, |row| {
        (0..spec.n_latent())
            .map(|k| (0..p).map(|a| weights[(k, a)] * (row[a] - means[a])).sum())
            .collect()
    });
    Ok(FactorScoreTable {
        latents: spec.latent_names().iter().map(|s| s.to_string()).collect(),
        counties,
        scores,
        excluded,
    })
}

/// Population covariance of regression scores, `Σ_lo Σ⁻¹ Σ_loᵀ`.
pub fn score_covariance(spec: &ModelSpec, theta: &ParameterVector) -> Result<DMatrix<f64>, ScoringError> {
    let a = regression_weights(spec, theta)?;
    Ok(&a * latent_observed_covariance(spec, theta).transpose())
}
