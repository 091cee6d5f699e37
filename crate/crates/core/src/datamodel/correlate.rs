use std::io::Write;

use super::{ClimateTable, DataError, Hazard};
use crate::indicators::IndicatorMatrix;

/// Fewer complete county pairs than this leaves a cell missing.
pub const MIN_COMPLETE_PAIRS: usize = 3;

/// Indicator rows × hazard columns of Pearson coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub indicators: Vec<String>,
    pub values: Vec<[Option<f64>; 6]>,
    /// Complete county pairs behind each cell.
    pub pairs: Vec<[usize; 6]>,
}

impl CorrelationMatrix {
    pub fn get(&self, indicator: &str, hazard: Hazard) -> Option<f64> {
        let row = self.indicators.iter().position(|n| n == indicator)?;
        self.values[row][hazard as usize]
    }
}

/// Pairwise-complete, unweighted Pearson correlation of every indicator
/// column with every hazard over the counties present in both tables.
pub fn correlate(
    indicators: &IndicatorMatrix,
    climate: &ClimateTable,
) -> Result<CorrelationMatrix, DataError> {
    let shared: Vec<(usize, &[f64; 6])> = indicators
        .counties()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| climate.get(c).map(|s| (i, s)))
        .collect();
    if shared.is_empty() {
        return Err(DataError::EmptyIntersection);
    }

    let mut out = CorrelationMatrix {
        indicators: Vec::with_capacity(indicators.columns().len()),
        values: Vec::with_capacity(indicators.columns().len()),
        pairs: Vec::with_capacity(indicators.columns().len()),
    };
    let mut xs = Vec::with_capacity(shared.len());
    let mut ys = Vec::with_capacity(shared.len());
    for column in indicators.columns() {
        let mut row = [None; 6];
        let mut counts = [0usize; 6];
        for h in 0..6 {
            xs.clear();
            ys.clear();
            for &(i, scores) in &shared {
                if let Some(v) = column.value(i) {
                    xs.push(v);
                    ys.push(scores[h]);
                }
            }
            counts[h] = xs.len();
            row[h] = pearson(&xs, &ys);
        }
        out.indicators.push(column.name().to_string());
        out.values.push(row);
        out.pairs.push(counts);
    }
    Ok(out)
}

/// Two-pass Pearson coefficient. `None` below three pairs or when either
/// variable is constant.
pub(crate) fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < MIN_COMPLETE_PAIRS || n != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// `indicator,heat,...,wind` with six decimals; missing cells are empty.
pub fn write_correlations<W: Write>(m: &CorrelationMatrix, sink: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["indicator"];
    header.extend(Hazard::ALL.iter().map(|h| h.as_str()));
    w.write_record(&header)?;
    for (name, row) in m.indicators.iter().zip(&m.values) {
        let mut rec = vec![name.clone()];
        rec.extend(
            row.iter()
                .map(|v| v.map(|r| format!("{r:.6}")).unwrap_or_default()),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
