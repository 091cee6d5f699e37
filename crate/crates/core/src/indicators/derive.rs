use serde::{Deserialize, Serialize};

use super::{IndicatorError, IndicatorMatrix};

/// Columns whose cross-county variance falls below this are dropped.
pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    SignFlip,
}

/// `target = transform(source)`, cell by cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationRule {
    pub target: String,
    pub source: String,
    pub transform: Transform,
}

impl DerivationRule {
    pub fn sign_flip(target: impl Into<String>, source: impl Into<String>) -> Self {
        Self {
            target: target.into(),
            source: source.into(),
            transform: Transform::SignFlip,
        }
    }
}

/// Append derived columns. Sources are kept; support is copied from the
/// source and missing cells stay missing.
pub fn derive(
    matrix: &IndicatorMatrix,
    rules: &[DerivationRule],
) -> Result<IndicatorMatrix, IndicatorError> {
    let mut out = matrix.clone();
    for rule in rules {
        if rule.target == rule.source {
            return Err(IndicatorError::InvalidTarget(rule.target.clone()));
        }
        let source = out
            .column(&rule.source)
            .ok_or_else(|| IndicatorError::MissingSource(rule.source.clone()))?;
        let derived = match rule.transform {
            Transform::SignFlip => source.map_values(&rule.target, |v| -v),
        };
        out.push_column(derived)
            .map_err(|_| IndicatorError::InvalidTarget(rule.target.clone()))?;
    }
    Ok(out)
}

/// Remove columns whose population variance over present cells is below
/// `threshold`. Returns the retained matrix and the dropped names in
/// column order.
pub fn screen_variance(
    matrix: &IndicatorMatrix,
    threshold: f64,
) -> Result<(IndicatorMatrix, Vec<String>), IndicatorError> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(IndicatorError::InvalidThreshold(threshold));
    }
    let low: Vec<&str> = matrix
        .columns()
        .iter()
        .filter(|c| c.variance() < threshold)
        .map(|c| c.name())
        .collect();
    let mut out = matrix.clone();
    let dropped = out.remove_columns(&low);
    Ok((out, dropped))
}
