use serde::Serialize;
use serde_json::{Map, Value};

use super::{FactorScoreTable, ScoringError};

pub const DEFAULT_JOIN_KEY: &str = "GEOID";

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct JoinReport {
    pub features: usize,
    pub matched: usize,
    /// Geometry features with no score row.
    pub gaps: Vec<String>,
    /// Scored counties with no geometry feature.
    pub unmatched_scores: Vec<String>,
}

fn key_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        // numeric FIPS lose their leading zero
        Value::Number(n) => n.as_u64().map(|n| format!("{n:05}")),
        _ => None,
    }
}

/// Copy scores onto the features of a GeoJSON FeatureCollection, matching
/// `key` in each feature's properties against the county code. Features
/// without a score row keep their properties unchanged and are counted as
/// gaps.
pub fn join_geojson(
    mut collection: Value,
    scores: &FactorScoreTable,
    key: &str,
) -> Result<(Value, JoinReport), ScoringError> {
    if collection.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(ScoringError::Geometry("expected a FeatureCollection".into()));
    }
    let features = collection
        .get_mut("features")
        .and_then(Value::as_array_mut)
        .ok_or_else(|| ScoringError::Geometry("missing features array".into()))?;
    let index: std::collections::HashMap<&str, usize> = scores
        .counties
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut report = JoinReport {
        features: features.len(),
        ..Default::default()
    };
    let mut seen = vec![false; scores.counties.len()];
    for (n, feature) in features.iter_mut().enumerate() {
        let obj = feature
            .as_object_mut()
            .ok_or_else(|| ScoringError::Geometry(format!("feature {n} is not an object")))?;
        let props = obj
            .entry("properties")
            .or_insert_with(|| Value::Object(Map::new()));
        if props.is_null() {
            *props = Value::Object(Map::new());
        }
        let props = props
            .as_object_mut()
            .ok_or_else(|| ScoringError::Geometry(format!("feature {n} properties are not an object")))?;
        let id = props
            .get(key)
            .and_then(key_string)
            .ok_or_else(|| ScoringError::Geometry(format!("feature {n} has no {key} property")))?;
        match index.get(id.as_str()) {
            Some(&row) => {
                seen[row] = true;
                report.matched += 1;
                for (latent, v) in scores.latents.iter().zip(&scores.scores[row]) {
                    props.insert(latent.clone(), serde_json::json!(v));
                }
            }
            None => report.gaps.push(id),
        }
    }
    report.unmatched_scores = scores
        .counties
        .iter()
        .zip(&seen)
        .filter(|(_, s)| !**s)
        .map(|(c, _)| c.to_string())
        .collect();
    Ok((collection, report))
}
