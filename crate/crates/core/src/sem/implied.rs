use nalgebra::DMatrix;

use super::{ModelSpec, ParameterVector};

/// Covariance of the latent vector (exogenous first):
/// `[[Φ, ΦΓᵀ], [ΓΦ, ΓΦΓᵀ + Ψ]]`.
pub fn latent_covariance(spec: &ModelSpec, theta: &ParameterVector) -> DMatrix<f64> {
    let m = spec.n_latent();
    let phi = theta.exogenous_variance;
    let mut cov = DMatrix::zeros(m, m);
    cov[(0, 0)] = phi;
    for j in 0..m - 1 {
        let bj = theta.paths[j];
        cov[(0, j + 1)] = phi * bj;
        cov[(j + 1, 0)] = phi * bj;
        for k in 0..=j {
            let mut v = bj * theta.paths[k] * phi;
            if j == k {
                v += theta.disturbance_variances[j];
            }
            cov[(j + 1, k + 1)] = v;
            cov[(k + 1, j + 1)] = v;
        }
    }
    cov
}

/// Model-implied covariance of the observed variables in spec order.
/// The result is exactly symmetric: each off-diagonal entry is computed
/// once and mirrored.
pub fn implied_covariance(spec: &ModelSpec, theta: &ParameterVector) -> DMatrix<f64> {
    let lat = latent_covariance(spec, theta);
    let p = spec.n_observed();
    let mut sigma = DMatrix::zeros(p, p);
    for a in 0..p {
        let la = theta.loadings[a];
        let ka = spec.owner(a);
        for b in 0..a {
            let v = la * theta.loadings[b] * lat[(ka, spec.owner(b))];
            sigma[(a, b)] = v;
            sigma[(b, a)] = v;
        }
        sigma[(a, a)] = la * la * lat[(ka, ka)] + theta.residual_variances[a];
    }
    sigma
}

/// `M Λᵀ`: covariance between each latent (rows) and each observed variable
/// (columns).
pub fn latent_observed_covariance(spec: &ModelSpec, theta: &ParameterVector) -> DMatrix<f64> {
    let lat = latent_covariance(spec, theta);
    let p = spec.n_observed();
    let m = spec.n_latent();
    DMatrix::from_fn(m, p, |k, a| lat[(k, spec.owner(a))] * theta.loadings[a])
}
