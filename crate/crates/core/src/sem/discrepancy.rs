use nalgebra::DMatrix;

use super::{implied_covariance, latent_covariance, ModelSpec, ParamKind, ParameterVector, SampleMoments, SemError};

/// `ln|Σ| + tr(SΣ⁻¹) − ln|S| − p` together with `Σ⁻¹`; `None` when Σ is
/// not positive definite.
pub(crate) fn discrepancy_with_inverse(
    sample: &DMatrix<f64>,
    sample_log_det: f64,
    sigma: &DMatrix<f64>,
) -> Option<(f64, DMatrix<f64>)> {
    let p = sigma.nrows();
    let chol = sigma.clone().cholesky()?;
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    if !log_det.is_finite() {
        return None;
    }
    let inv = chol.inverse();
    let trace = sample.component_mul(&inv).sum();
    let f = log_det + trace - sample_log_det - p as f64;
    f.is_finite().then_some((f.max(0.0), inv))
}

/// Maximum-likelihood discrepancy between the sample covariance and `sigma`.
/// Zero exactly when the two coincide, positive otherwise.
pub fn ml_discrepancy(sample: &SampleMoments, sigma: &DMatrix<f64>) -> Result<f64, SemError> {
    discrepancy_with_inverse(sample.covariance(), sample.log_det(), sigma)
        .map(|(f, _)| f)
        .ok_or(SemError::ImpliedNotPositiveDefinite)
}

/// Discrepancy and its analytic gradient with respect to the free
/// parameters (natural scale, packing order).
///
/// With `W = Σ⁻¹(Σ − S)Σ⁻¹`, `dF = tr(W dΣ)`. Writing `G = ΛᵀWΛ`:
/// loadings get `2(WΛM)`, latent covariance entries get `G`, propagated
/// through `M(Φ, Γ, Ψ)`, and residual variances get `diag(W)`.
pub fn ml_gradient(
    spec: &ModelSpec,
    sample: &SampleMoments,
    theta: &ParameterVector,
) -> Result<(f64, Vec<f64>), SemError> {
    gradient_parts(spec, sample.covariance(), sample.log_det(), theta)
        .ok_or(SemError::ImpliedNotPositiveDefinite)
}

pub(crate) fn gradient_parts(
    spec: &ModelSpec,
    s: &DMatrix<f64>,
    s_log_det: f64,
    theta: &ParameterVector,
) -> Option<(f64, Vec<f64>)> {
    let sigma = implied_covariance(spec, theta);
    let (f, inv) = discrepancy_with_inverse(s, s_log_det, &sigma)?;
    let w = &inv - &inv * s * &inv;

    let p = spec.n_observed();
    let m = spec.n_latent();
    let lat = latent_covariance(spec, theta);
    // WΛ, p × m
    let mut wl = DMatrix::zeros(p, m);
    for b in 0..p {
        let k = spec.owner(b);
        let lb = theta.loadings[b];
        for a in 0..p {
            wl[(a, k)] += w[(a, b)] * lb;
        }
    }
    let wlm = &wl * &lat;
    // G = Λᵀ W Λ, m × m
    let mut g = DMatrix::zeros(m, m);
    for a in 0..p {
        let k = spec.owner(a);
        let la = theta.loadings[a];
        for l in 0..m {
            g[(k, l)] += la * wl[(a, l)];
        }
    }

    let phi = theta.exogenous_variance;
    let beta = &theta.paths;
    let grad = spec
        .parameter_table()
        .iter()
        .map(|info| match info.kind {
            ParamKind::Loading(a) => 2.0 * wlm[(a, spec.owner(a))],
            ParamKind::Path(j) => {
                let mut acc = g[(0, j + 1)];
                for (k, bk) in beta.iter().enumerate() {
                    acc += g[(j + 1, k + 1)] * bk;
                }
                2.0 * phi * acc
            }
            ParamKind::ExogenousVariance => {
                let mut acc = g[(0, 0)];
                for (j, bj) in beta.iter().enumerate() {
                    acc += 2.0 * bj * g[(0, j + 1)];
                    for (k, bk) in beta.iter().enumerate() {
                        acc += bj * bk * g[(j + 1, k + 1)];
                    }
                }
                acc
            }
            ParamKind::DisturbanceVariance(j) => g[(j + 1, j + 1)],
            ParamKind::ResidualVariance(a) => w[(a, a)],
        })
        .collect();
    Some((f, grad))
}
