use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::discrepancy::gradient_parts;
use super::{minimize_bfgs, ModelSpec, Objective, OptimizerOptions, ParamKind, ParameterVector, SampleMoments};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    /// Packing order; `None` where the information matrix is unusable.
    pub se: Vec<Option<f64>>,
    pub warning: Option<String>,
}

/// Two-sided normal tail probability of `z`.
pub fn two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Standard errors from the observed information `(N − 1)/2 · H`, where
/// `H` is the Hessian of the discrepancy at `theta`, built column by column
/// from central differences of the analytic gradient. Columns are
/// independent, so they are evaluated in parallel without affecting the
/// result.
pub fn standard_errors(
    spec: &ModelSpec,
    sample: &SampleMoments,
    theta: &ParameterVector,
) -> StandardErrors {
    let table = spec.parameter_table();
    let base = theta.pack(spec);
    let q = base.len();
    let s = sample.covariance();
    let ld = sample.log_det();

    let columns: Vec<Option<Vec<f64>>> = par::map_range(q, |i| {
        let mut h = 1e-5 * base[i].abs().max(1.0);
        if table[i].kind.is_variance() {
            h = h.min(0.5 * base[i]);
        }
        if !(h > 0.0) {
            return None;
        }
        let grad_at = |x: f64| {
            let mut v = base.clone();
            v[i] = x;
            let t = ParameterVector::unpack(spec, &v).ok()?;
            gradient_parts(spec, s, ld, &t).map(|(_, g)| g)
        };
        let plus = grad_at(base[i] + h)?;
        let minus = grad_at(base[i] - h)?;
        Some(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    });

    let missing = |msg: String| StandardErrors {
        se: vec![None; q],
        warning: Some(msg),
    };
    if let Some(i) = columns.iter().position(Option::is_none) {
        return missing(format!(
            "finite-difference Hessian failed at parameter {}",
            table[i].name()
        ));
    }
    let scale = (sample.n() as f64 - 1.0) / 2.0;
    let info = DMatrix::from_fn(q, q, |r, c| {
        let a = columns[c].as_ref().unwrap()[r];
        let b = columns[r].as_ref().unwrap()[c];
        scale * 0.5 * (a + b)
    });
    let Some(chol) = info.cholesky() else {
        return missing("information matrix is not positive definite; standard errors omitted".into());
    };
    let cov = chol.inverse();
    StandardErrors {
        se: (0..q)
            .map(|i| {
                let v = cov[(i, i)];
                (v > 0.0 && v.is_finite()).then(|| v.sqrt())
            })
            .collect(),
        warning: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitStatistics {
    pub discrepancy: f64,
    pub chi_square: f64,
    pub df: i64,
    pub p_value: Option<f64>,
    pub rmsea: Option<f64>,
    pub cfi: Option<f64>,
    pub baseline_chi_square: f64,
    pub baseline_df: i64,
    pub n_cases: usize,
    pub n_observed: usize,
    pub n_free: usize,
}

/// Independence model `Σ = diag(v)`, fitted with the same optimiser on log
/// variances. Returns `(χ², df)`.
pub fn baseline_chi_square(sample: &SampleMoments, options: &OptimizerOptions) -> (f64, i64) {
    struct Independence<'a> {
        diag: Vec<f64>,
        s: &'a SampleMoments,
    }
    impl Objective for Independence<'_> {
        fn dim(&self) -> usize {
            self.diag.len()
        }
        fn evaluate(&self, u: &[f64]) -> Option<(f64, Vec<f64>)> {
            let mut f = -self.s.log_det() - self.diag.len() as f64;
            let mut g = Vec::with_capacity(u.len());
            for (ui, si) in u.iter().zip(&self.diag) {
                let v = ui.exp();
                if !(v > 0.0 && v.is_finite()) {
                    return None;
                }
                f += ui + si / v;
                g.push(1.0 - si / v);
            }
            Some((f, g))
        }
    }
    let obj = Independence {
        diag: sample.covariance().diagonal().iter().copied().collect(),
        s: sample,
    };
    let start: Vec<f64> = obj.diag.iter().map(|v| (0.5 * v).ln()).collect();
    let out = minimize_bfgs(&obj, &start, options);
    let p = sample.p() as i64;
    let f = out.value.max(0.0);
    ((sample.n() as f64 - 1.0) * f, p * (p - 1) / 2)
}

/// χ² = (N − 1)·F, RMSEA and CFI against the independence baseline.
pub fn fit_statistics(
    spec: &ModelSpec,
    sample: &SampleMoments,
    discrepancy: f64,
    options: &OptimizerOptions,
) -> FitStatistics {
    let n1 = sample.n() as f64 - 1.0;
    let chi = n1 * discrepancy;
    let df = spec.degrees_of_freedom();
    let rmsea = (df > 0).then(|| ((chi - df as f64).max(0.0) / (df as f64 * n1)).sqrt());
    let (base_chi, base_df) = baseline_chi_square(sample, options);
    let d = (chi - df as f64).max(0.0);
    let d_base = (base_chi - base_df as f64).max(d);
    let cfi = Some(if d_base > 0.0 { 1.0 - d / d_base } else { 1.0 });
    let p_value = (df > 0).then(|| chi_square_upper_tail(chi, df as f64));
    FitStatistics {
        discrepancy,
        chi_square: chi,
        df,
        p_value,
        rmsea,
        cfi,
        baseline_chi_square: base_chi,
        baseline_df: base_df,
        n_cases: sample.n(),
        n_observed: sample.p(),
        n_free: spec.n_free(),
    }
}

/// Upper tail of the χ² distribution via the Wilson–Hilferty cube-root
/// normal approximation, adequate for reporting.
fn chi_square_upper_tail(x: f64, k: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let c = 2.0 / (9.0 * k);
    let z = ((x / k).cbrt() - (1.0 - c)) / c.sqrt();
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// True when `kind`'s natural value sits at the optimiser's lower boundary.
pub(crate) fn at_boundary(kind: ParamKind, value: f64, scale: f64, floor: f64) -> bool {
    kind.is_variance() && value <= floor.max(1e-6 * scale.abs())
}
