use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::discrepancy::gradient_parts;
use super::inference::at_boundary;
use super::{
    fit_statistics, minimize_bfgs, standard_errors, standardize, two_sided_p, FitStatistics,
    ModelSpec, Objective, OptimizerOptions, ParamKind, ParameterVector, Parameterization,
    SampleMoments, SemError, StandardizedSolution,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Lower bound on measurement residual variances.
    pub variance_floor: f64,
    pub standard_errors: bool,
    pub baseline: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-6,
            variance_floor: 1e-8,
            standard_errors: true,
            baseline: true,
        }
    }
}

impl FitOptions {
    fn optimizer(&self) -> OptimizerOptions {
        OptimizerOptions {
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            ..OptimizerOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    pub gradient_norm: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterEstimate {
    pub lhs: String,
    pub op: String,
    pub rhs: String,
    pub free: bool,
    pub estimate: f64,
    pub se: Option<f64>,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
    pub standardized: f64,
}

impl ParameterEstimate {
    pub fn name(&self) -> String {
        format!("{}{}{}", self.lhs, self.op, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub observed: Vec<String>,
    pub latents: Vec<String>,
    pub parameters: ParameterVector,
    /// Loadings (reference ones marked not free), paths, then variances.
    pub estimates: Vec<ParameterEstimate>,
    pub standardized: StandardizedSolution,
    pub statistics: FitStatistics,
    pub convergence: Convergence,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn require_converged(&self) -> Result<(), SemError> {
        if self.convergence.converged {
            Ok(())
        } else {
            Err(SemError::NotConverged {
                iterations: self.convergence.iterations,
                gradient_norm: self.convergence.gradient_norm,
            })
        }
    }

    pub fn estimate(&self, lhs: &str, op: &str, rhs: &str) -> Option<&ParameterEstimate> {
        self.estimates
            .iter()
            .find(|e| e.lhs == lhs && e.op == op && e.rhs == rhs)
    }
}

struct MlObjective<'a> {
    spec: &'a ModelSpec,
    s: &'a DMatrix<f64>,
    log_det: f64,
    map: Parameterization,
}

impl Objective for MlObjective<'_> {
    fn dim(&self) -> usize {
        self.map.kinds().len()
    }

    fn evaluate(&self, u: &[f64]) -> Option<(f64, Vec<f64>)> {
        let natural = self.map.to_natural(u);
        if natural.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let theta = ParameterVector::unpack(self.spec, &natural).ok()?;
        let (f, g) = gradient_parts(self.spec, self.s, self.log_det, &theta)?;
        Some((f, self.map.internal_gradient(&natural, &g)))
    }
}

/// Deterministic start: each loading is the sample regression slope of its
/// indicator on the latent's reference indicator (1 for the reference),
/// paths 0, Φ the sample variance of the exogenous reference indicator,
/// every residual variance half the sample variance of its indicator, and
/// each ψ half the sample variance of its latent's reference indicator.
///
/// Every start value scales with its indicators, so rescaling one indicator
/// rescales the start exactly as it rescales the optimum.
pub fn start_values(spec: &ModelSpec, sample: &SampleMoments) -> ParameterVector {
    let s = sample.covariance();
    let var = |a: usize| s[(a, a)];
    let refs = spec.reference_indices();
    ParameterVector {
        loadings: (0..spec.n_observed())
            .map(|a| {
                let r = refs[spec.owner(a)];
                if a == r {
                    1.0
                } else {
                    s[(a, r)] / var(r)
                }
            })
            .collect(),
        paths: vec![0.0; spec.n_endogenous()],
        exogenous_variance: var(refs[0]),
        disturbance_variances: refs[1..].iter().map(|&a| 0.5 * var(a)).collect(),
        residual_variances: (0..spec.n_observed()).map(|a| 0.5 * var(a)).collect(),
    }
}

/// Maximum-likelihood fit of `spec` to `sample`.
///
/// `sample` may hold extra variables or a different order; it is aligned to
/// the spec's observed order first. Non-convergence is not an error here:
/// the result carries `convergence.converged = false` and a warning, and
/// [`FitResult::require_converged`] turns that into one.
pub fn fit(spec: &ModelSpec, sample: &SampleMoments, options: &FitOptions) -> Result<FitResult, SemError> {
    spec.check_observed(sample.names())?;
    let sample = sample.select(spec.observed())?;
    let p = spec.n_observed();
    if sample.n() <= p {
        return Err(SemError::TooFewCases { n: sample.n(), p });
    }
    let df = spec.degrees_of_freedom();
    if df < 0 {
        return Err(SemError::Unidentified {
            free: spec.n_free(),
            moments: p * (p + 1) / 2,
            df,
        });
    }

    let map = Parameterization::new(spec, options.variance_floor);
    let objective = MlObjective {
        spec,
        s: sample.covariance(),
        log_det: sample.log_det(),
        map: map.clone(),
    };
    let start = map.to_internal(&start_values(spec, &sample).pack(spec));
    let outcome = minimize_bfgs(&objective, &start, &options.optimizer());
    let natural = map.to_natural(&outcome.x);
    let theta = ParameterVector::unpack(spec, &natural)?;

    let mut warnings = Vec::new();
    if !outcome.converged {
        warnings.push(format!(
            "optimizer stopped without converging: {} after {} iterations (gradient max-norm {:.3e})",
            outcome.message, outcome.iterations, outcome.gradient_norm
        ));
    }
    let standardized = standardize(spec, &theta)?;
    let table = spec.parameter_table();
    for (info, &v) in table.iter().zip(&natural) {
        let scale = match info.kind {
            ParamKind::ResidualVariance(a) => sample.covariance()[(a, a)],
            ParamKind::DisturbanceVariance(j) => standardized.latent_variances[j + 1],
            _ => 1.0,
        };
        if at_boundary(info.kind, v, scale, options.variance_floor) {
            warnings.push(format!(
                "boundary estimate {} = {v:.3e} (Heywood case)",
                info.name()
            ));
        }
    }
    for (j, b) in standardized.paths.iter().enumerate() {
        if b.abs() > 0.999 {
            warnings.push(format!(
                "standardized path {}~{} = {b:.4} is at the edge of its range",
                spec.endogenous()[j].name,
                spec.exogenous().name
            ));
        }
    }

    let ses = if options.standard_errors {
        let se = standard_errors(spec, &sample, &theta);
        if let Some(w) = &se.warning {
            warnings.push(w.clone());
        }
        se.se
    } else {
        vec![None; table.len()]
    };

    let discrepancy = outcome.value.max(0.0);
    let mut statistics = fit_statistics(spec, &sample, discrepancy, &options.optimizer());
    if !options.baseline {
        statistics.cfi = None;
    }

    let mut estimates = Vec::with_capacity(table.len() + spec.n_latent());
    let mut free_idx = 0;
    let push_free = |estimates: &mut Vec<ParameterEstimate>, i: usize| {
        let info = &table[i];
        let est = natural[i];
        let se = ses[i];
        let z = se.map(|s| est / s);
        estimates.push(ParameterEstimate {
            lhs: info.lhs.clone(),
            op: info.op.clone(),
            rhs: info.rhs.clone(),
            free: true,
            estimate: est,
            se,
            z,
            p_value: z.map(two_sided_p),
            standardized: standardized.get(info.kind),
        });
    };
    for a in 0..p {
        if spec.is_reference(a) {
            estimates.push(ParameterEstimate {
                lhs: spec.latents()[spec.owner(a)].name.clone(),
                op: "=~".into(),
                rhs: spec.observed()[a].clone(),
                free: false,
                estimate: 1.0,
                se: None,
                z: None,
                p_value: None,
                standardized: standardized.loadings[a],
            });
        } else {
            push_free(&mut estimates, free_idx);
            free_idx += 1;
        }
    }
    for i in free_idx..table.len() {
        push_free(&mut estimates, i);
    }

    Ok(FitResult {
        observed: spec.observed().to_vec(),
        latents: spec.latent_names().iter().map(|s| s.to_string()).collect(),
        parameters: theta,
        estimates,
        standardized,
        statistics,
        convergence: Convergence {
            converged: outcome.converged,
            iterations: outcome.iterations,
            evaluations: outcome.evaluations,
            gradient_norm: outcome.gradient_norm,
            message: outcome.message,
        },
        warnings,
    })
}
