use serde::{Deserialize, Serialize};

use super::{implied_covariance, latent_covariance, ModelSpec, ParamKind, ParameterVector, SemError};

/// Estimates rescaled so that every latent and observed variable has unit
/// model-implied variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedSolution {
    pub loadings: Vec<f64>,
    pub paths: Vec<f64>,
    pub disturbance_variances: Vec<f64>,
    pub residual_variances: Vec<f64>,
    pub latent_variances: Vec<f64>,
    pub observed_variances: Vec<f64>,
}

impl StandardizedSolution {
    pub fn get(&self, kind: ParamKind) -> f64 {
        match kind {
            ParamKind::Loading(a) => self.loadings[a],
            ParamKind::Path(j) => self.paths[j],
            ParamKind::ExogenousVariance => 1.0,
            ParamKind::DisturbanceVariance(j) => self.disturbance_variances[j],
            ParamKind::ResidualVariance(a) => self.residual_variances[a],
        }
    }
}

/// `λ* = λ·sd(latent)/sd(observed)` and `β* = β·sd(ξ)/sd(η)`, with all
/// standard deviations taken from the model-implied variances. Reference
/// loadings are rescaled like any other.
pub fn standardize(spec: &ModelSpec, theta: &ParameterVector) -> Result<StandardizedSolution, SemError> {
    let lat = latent_covariance(spec, theta);
    let sigma = implied_covariance(spec, theta);
    let latent_variances: Vec<f64> = lat.diagonal().iter().copied().collect();
    let observed_variances: Vec<f64> = sigma.diagonal().iter().copied().collect();
    for (k, &v) in latent_variances.iter().enumerate() {
        if !(v > 0.0) {
            return Err(SemError::DegenerateVariance(spec.latents()[k].name.clone()));
        }
    }
    for (a, &v) in observed_variances.iter().enumerate() {
        if !(v > 0.0) {
            return Err(SemError::DegenerateVariance(spec.observed()[a].clone()));
        }
    }
    let sd_lat: Vec<f64> = latent_variances.iter().map(|v| v.sqrt()).collect();
    let sd_obs: Vec<f64> = observed_variances.iter().map(|v| v.sqrt()).collect();
    Ok(StandardizedSolution {
        loadings: (0..spec.n_observed())
            .map(|a| theta.loadings[a] * sd_lat[spec.owner(a)] / sd_obs[a])
            .collect(),
        paths: theta
            .paths
            .iter()
            .enumerate()
            .map(|(j, b)| b * sd_lat[0] / sd_lat[j + 1])
            .collect(),
        disturbance_variances: theta
            .disturbance_variances
            .iter()
            .enumerate()
            .map(|(j, psi)| psi / latent_variances[j + 1])
            .collect(),
        residual_variances: theta
            .residual_variances
            .iter()
            .zip(&observed_variances)
            .map(|(t, v)| t / v)
            .collect(),
        latent_variances,
        observed_variances,
    })
}
