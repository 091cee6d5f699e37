use serde::Serialize;

use super::{
    aggregate_county, aggregate_daily, derive, normalize, screen_variance, IndicatorDictionary,
    IndicatorError, IndicatorMatrix, RecodingScheme,
};
use crate::datamodel::{DateWindow, LabelRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorBuild {
    pub matrix: IndicatorMatrix,
    pub summary: BuildSummary,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BuildSummary {
    pub daily_cells: usize,
    pub counties: usize,
    /// Columns removed because the dictionary marks them inactive.
    pub excluded: Vec<String>,
    /// Derived columns skipped because their source had no data.
    pub underived: Vec<String>,
    /// Columns removed by the variance screen.
    pub low_variance: Vec<String>,
}

/// Records to the screened county indicator matrix: aggregate, drop
/// inactive questions, append derived columns, then screen variance.
pub fn build_indicators(
    records: &[LabelRecord],
    scheme: &RecodingScheme,
    period: DateWindow,
    dictionary: &IndicatorDictionary,
    variance_threshold: f64,
) -> Result<IndicatorBuild, IndicatorError> {
    scheme.validate()?;
    let cells = aggregate_daily(records, scheme);
    let mut matrix = normalize(&aggregate_county(&cells, period))?;
    let excluded = matrix.remove_columns(&dictionary.excluded());
    let (rules, underived): (Vec<_>, Vec<_>) = dictionary
        .derivation_rules()
        .into_iter()
        .partition(|r| matrix.column(&r.source).is_some());
    matrix = derive(&matrix, &rules)?;
    let (matrix, low_variance) = screen_variance(&matrix, variance_threshold)?;
    Ok(IndicatorBuild {
        summary: BuildSummary {
            daily_cells: cells.len(),
            counties: matrix.counties().len(),
            excluded,
            underived: underived.into_iter().map(|r| r.target).collect(),
            low_variance,
        },
        matrix,
    })
}
