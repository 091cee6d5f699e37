use nalgebra::DMatrix;
use rand_chacha::rand_core::Rng;
use serde::{Deserialize, Serialize};

use super::{stream_rng, uniform, Gaussian, SynthError};
use crate::datamodel::{ClimateTable, CountyId, Hazard};
use crate::par;
use crate::sem::{implied_covariance, ModelSpec, ParameterVector, SemError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observations {
    /// Observed variable names in model order.
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Σ(θ) of the generating parameters.
    #[serde(skip)]
    pub population: DMatrix<f64>,
}

/// Draw `n` cases from the model at `theta`.
///
/// Case i uses stream i. Per case the draws are, in order: ξ = √Φ·z,
/// then ζⱼ = √ψⱼ·z for each endogenous latent, then one residual
/// √θₐ·z per observed variable; η = Γξ + ζ and each observed value is
/// λₐ times its latent plus its residual.
pub fn generate_observations(
    spec: &ModelSpec,
    theta: &ParameterVector,
    n: usize,
    seed: u64,
) -> Result<Observations, SynthError> {
    theta.check_shape(spec)?;
    let p = spec.n_observed();
    if n <= p {
        return Err(SynthError::TooFewCases { n, p });
    }
    let variances = std::iter::once(theta.exogenous_variance)
        .chain(theta.disturbance_variances.iter().copied())
        .chain(theta.residual_variances.iter().copied());
    for v in variances {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(SemError::InvalidParameter { name: "variance".into(), value: v }.into());
        }
    }
    let sd_xi = theta.exogenous_variance.sqrt();
    let sd_zeta: Vec<f64> = theta.disturbance_variances.iter().map(|v| v.sqrt()).collect();
    let sd_eps: Vec<f64> = theta.residual_variances.iter().map(|v| v.sqrt()).collect();
    let rows = par::map_range(n, |i| {
        let mut g = Gaussian::new(stream_rng(seed, i as u64));
        let mut latent = Vec::with_capacity(spec.n_latent());
        let xi = sd_xi * g.sample();
        latent.push(xi);
        for (b, s) in theta.paths.iter().zip(&sd_zeta) {
            latent.push(b * xi + s * g.sample());
        }
        (0..p)
            .map(|a| theta.loadings[a] * latent[spec.owner(a)] + sd_eps[a] * g.sample())
            .collect()
    });
    Ok(Observations {
        names: spec.observed().to_vec(),
        rows,
        population: implied_covariance(spec, theta),
    })
}

/// Parameters with every endogenous latent at unit implied variance, Φ = 1,
/// and standardized loadings of √(2/3) throughout.
///
/// Non-reference loadings cycle through 0.7, 0.8, 0.9, 1.0 within each
/// latent; θₐ = λₐ²/2. Path magnitudes rise evenly from 0.4 to 0.7 in
/// declaration order; latents named in `positive` get positive paths, all
/// others negative.
pub fn sign_pattern_truth(spec: &ModelSpec, positive: &[&str]) -> ParameterVector {
    let mut theta = ParameterVector::unit(spec);
    let mut seen = vec![0usize; spec.n_latent()];
    for a in 0..spec.n_observed() {
        if !spec.is_reference(a) {
            let k = &mut seen[spec.owner(a)];
            theta.loadings[a] = 0.7 + 0.1 * (*k % 4) as f64;
            *k += 1;
        }
    }
    let m = spec.n_endogenous();
    for (j, latent) in spec.endogenous().iter().enumerate() {
        let mag = if m > 1 { 0.4 + 0.3 * j as f64 / (m - 1) as f64 } else { 0.5 };
        let b = if positive.contains(&latent.name.as_str()) { mag } else { -mag };
        theta.paths[j] = b;
        theta.disturbance_variances[j] = 1.0 - b * b;
    }
    theta.exogenous_variance = 1.0;
    theta.residual_variances = theta.loadings.iter().map(|l| l * l / 2.0).collect();
    theta
}

/// Random valid parameters: loadings ±U(0.5, 1.5), paths U(−0.9, 0.9),
/// Φ ~ U(0.5, 2), ψ ~ U(0.2, 1.5), θ ~ U(0.1, 1).
pub fn random_parameters<R: Rng>(spec: &ModelSpec, rng: &mut R) -> ParameterVector {
    let mut between = |lo: f64, hi: f64| lo + (hi - lo) * uniform(rng);
    let mut theta = ParameterVector::unit(spec);
    for a in 0..spec.n_observed() {
        let mag = between(0.5, 1.5);
        let sign = if between(0.0, 1.0) < 0.5 { -1.0 } else { 1.0 };
        if !spec.is_reference(a) {
            theta.loadings[a] = sign * mag;
        }
    }
    for b in &mut theta.paths {
        *b = between(-0.9, 0.9);
    }
    theta.exogenous_variance = between(0.5, 2.0);
    for v in &mut theta.disturbance_variances {
        *v = between(0.2, 1.5);
    }
    for v in &mut theta.residual_variances {
        *v = between(0.1, 1.0);
    }
    theta
}

/// Hazard percentile table from the hazard columns of `obs`:
/// score = clamp(50 + 10·y/σ, 0, 100), σ the population standard deviation.
/// Hazards absent from `obs` are set to 50.
pub fn climate_from_scores(counties: &[CountyId], obs: &Observations) -> Result<ClimateTable, SynthError> {
    if counties.len() != obs.rows.len() {
        return Err(SynthError::Config("one county per case required".into()));
    }
    let cols: Vec<Option<(usize, f64)>> = Hazard::ALL
        .iter()
        .map(|h| {
            obs.names
                .iter()
                .position(|n| n == h.as_str())
                .map(|a| (a, obs.population[(a, a)].sqrt()))
        })
        .collect();
    let mut table = ClimateTable::new();
    for (county, row) in counties.iter().zip(&obs.rows) {
        let mut scores = [50.0; 6];
        for (s, c) in scores.iter_mut().zip(&cols) {
            if let Some((a, sd)) = c {
                let z = if *sd > 0.0 { row[*a] / sd } else { 0.0 };
                *s = (50.0 + 10.0 * z).clamp(0.0, 100.0);
            }
        }
        table.insert(county.clone(), scores)?;
    }
    Ok(table)
}
