use serde::{Deserialize, Serialize};

use super::{ModelSpec, SemError};

/// Model parameters on their natural scale.
///
/// Packed (free) order, as used by [`ParameterVector::pack`], optimiser
/// vectors and parameter tables:
///
/// 1. non-reference loadings, observed-variable order;
/// 2. structural paths, endogenous order;
/// 3. exogenous variance Φ;
/// 4. endogenous disturbance variances ψ, endogenous order;
/// 5. measurement residual variances θ, observed-variable order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    /// One per observed variable; reference entries are 1.
    pub loadings: Vec<f64>,
    pub paths: Vec<f64>,
    pub exogenous_variance: f64,
    pub disturbance_variances: Vec<f64>,
    pub residual_variances: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum ParamKind {
    Loading(usize),
    Path(usize),
    ExogenousVariance,
    DisturbanceVariance(usize),
    ResidualVariance(usize),
}

impl ParamKind {
    pub fn is_variance(self) -> bool {
        matches!(
            self,
            ParamKind::ExogenousVariance
                | ParamKind::DisturbanceVariance(_)
                | ParamKind::ResidualVariance(_)
        )
    }
}

/// Label for one free parameter in lavaan-like `lhs op rhs` form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterInfo {
    pub kind: ParamKind,
    pub lhs: String,
    pub op: String,
    pub rhs: String,
}

impl ParameterInfo {
    pub fn name(&self) -> String {
        format!("{}{}{}", self.lhs, self.op, self.rhs)
    }
}

impl ModelSpec {
    /// Free parameters in packing order.
    pub fn parameter_table(&self) -> Vec<ParameterInfo> {
        let lat = |k: usize| self.latents()[k].name.clone();
        let info = |kind, lhs: String, op: &str, rhs: String| ParameterInfo {
            kind,
            lhs,
            op: op.to_string(),
            rhs,
        };
        let mut out = Vec::with_capacity(self.n_free());
        for (a, name) in self.observed().iter().enumerate() {
            if !self.is_reference(a) {
                out.push(info(ParamKind::Loading(a), lat(self.owner(a)), "=~", name.clone()));
            }
        }
        for j in 0..self.n_endogenous() {
            out.push(info(ParamKind::Path(j), lat(j + 1), "~", lat(0)));
        }
        out.push(info(ParamKind::ExogenousVariance, lat(0), "~~", lat(0)));
        for j in 0..self.n_endogenous() {
            out.push(info(ParamKind::DisturbanceVariance(j), lat(j + 1), "~~", lat(j + 1)));
        }
        for (a, name) in self.observed().iter().enumerate() {
            out.push(info(ParamKind::ResidualVariance(a), name.clone(), "~~", name.clone()));
        }
        out
    }
}

impl ParameterVector {
    /// All loadings 1, paths 0, unit variances.
    pub fn unit(spec: &ModelSpec) -> Self {
        Self {
            loadings: vec![1.0; spec.n_observed()],
            paths: vec![0.0; spec.n_endogenous()],
            exogenous_variance: 1.0,
            disturbance_variances: vec![1.0; spec.n_endogenous()],
            residual_variances: vec![1.0; spec.n_observed()],
        }
    }

    pub fn check_shape(&self, spec: &ModelSpec) -> Result<(), SemError> {
        let shape = [
            (self.loadings.len(), spec.n_observed(), "loadings"),
            (self.paths.len(), spec.n_endogenous(), "paths"),
            (self.disturbance_variances.len(), spec.n_endogenous(), "disturbance variances"),
            (self.residual_variances.len(), spec.n_observed(), "residual variances"),
        ];
        for (found, expected, what) in shape {
            if found != expected {
                return Err(SemError::Structure(format!(
                    "{what}: expected {expected} entries, found {found}"
                )));
            }
        }
        Ok(())
    }

    /// Shape, finiteness, fixed reference loadings, Φ > 0, ψ > 0 and
    /// θ ≥ `floor`.
    pub fn validate(&self, spec: &ModelSpec, floor: f64) -> Result<(), SemError> {
        self.check_shape(spec)?;
        let table = spec.parameter_table();
        for (info, v) in table.iter().zip(self.pack(spec)) {
            let ok = v.is_finite()
                && match info.kind {
                    ParamKind::ExogenousVariance | ParamKind::DisturbanceVariance(_) => v > 0.0,
                    ParamKind::ResidualVariance(_) => v >= floor,
                    _ => true,
                };
            if !ok {
                return Err(SemError::InvalidParameter {
                    name: info.name(),
                    value: v,
                });
            }
        }
        for (a, &l) in self.loadings.iter().enumerate() {
            if spec.is_reference(a) && l != 1.0 {
                return Err(SemError::InvalidParameter {
                    name: format!("reference loading {}", spec.observed()[a]),
                    value: l,
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, kind: ParamKind) -> f64 {
        match kind {
            ParamKind::Loading(a) => self.loadings[a],
            ParamKind::Path(j) => self.paths[j],
            ParamKind::ExogenousVariance => self.exogenous_variance,
            ParamKind::DisturbanceVariance(j) => self.disturbance_variances[j],
            ParamKind::ResidualVariance(a) => self.residual_variances[a],
        }
    }

    fn slot(&mut self, kind: ParamKind) -> &mut f64 {
        match kind {
            ParamKind::Loading(a) => &mut self.loadings[a],
            ParamKind::Path(j) => &mut self.paths[j],
            ParamKind::ExogenousVariance => &mut self.exogenous_variance,
            ParamKind::DisturbanceVariance(j) => &mut self.disturbance_variances[j],
            ParamKind::ResidualVariance(a) => &mut self.residual_variances[a],
        }
    }

    /// Free parameters in packing order.
    pub fn pack(&self, spec: &ModelSpec) -> Vec<f64> {
        spec.parameter_table().iter().map(|i| self.get(i.kind)).collect()
    }

    pub fn unpack(spec: &ModelSpec, free: &[f64]) -> Result<Self, SemError> {
        let table = spec.parameter_table();
        if free.len() != table.len() {
            return Err(SemError::ParameterLength {
                expected: table.len(),
                found: free.len(),
            });
        }
        let mut out = Self::unit(spec);
        for (info, &v) in table.iter().zip(free) {
            *out.slot(info.kind) = v;
        }
        Ok(out)
    }
}

/// Map between natural parameters and the unconstrained vector the
/// optimiser works on. Φ and ψ are `exp(u)`; θ is `floor + exp(u)`;
/// loadings and paths are unchanged.
#[derive(Debug, Clone)]
pub struct Parameterization {
    kinds: Vec<ParamKind>,
    floor: f64,
}

impl Parameterization {
    pub fn new(spec: &ModelSpec, floor: f64) -> Self {
        Self {
            kinds: spec.parameter_table().into_iter().map(|i| i.kind).collect(),
            floor,
        }
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn kinds(&self) -> &[ParamKind] {
        &self.kinds
    }

    fn offset(&self, kind: ParamKind) -> f64 {
        if matches!(kind, ParamKind::ResidualVariance(_)) {
            self.floor
        } else {
            0.0
        }
    }

    pub fn to_natural(&self, internal: &[f64]) -> Vec<f64> {
        self.kinds
            .iter()
            .zip(internal)
            .map(|(&k, &u)| if k.is_variance() { self.offset(k) + u.exp() } else { u })
            .collect()
    }

    pub fn to_internal(&self, natural: &[f64]) -> Vec<f64> {
        self.kinds
            .iter()
            .zip(natural)
            .map(|(&k, &v)| {
                if k.is_variance() {
                    (v - self.offset(k)).max(f64::MIN_POSITIVE).ln()
                } else {
                    v
                }
            })
            .collect()
    }

    /// Chain rule from a natural-scale gradient to the internal one.
    pub fn internal_gradient(&self, natural: &[f64], natural_grad: &[f64]) -> Vec<f64> {
        self.kinds
            .iter()
            .zip(natural.iter().zip(natural_grad))
            .map(|(&k, (&v, &g))| if k.is_variance() { g * (v - self.offset(k)) } else { g })
            .collect()
    }
}
