use std::io::{Read, Write};

use super::{IndicatorColumn, IndicatorError, IndicatorMatrix};
use crate::datamodel::{CountyId, DataError, DateWindow};

/// Suffix of the support-count column paired with each indicator.
pub const SUPPORT_SUFFIX: &str = "__n";

/// One row per county: `fips`, the indicator values, then the
/// `<indicator>__n` support counts. Values use the shortest representation
/// that parses back to the same `f64`; missing cells are empty.
pub fn write_indicators<W: Write>(m: &IndicatorMatrix, sink: W) -> Result<(), IndicatorError> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["fips".to_string()];
    header.extend(m.column_names().map(str::to_string));
    header.extend(m.column_names().map(|n| format!("{n}{SUPPORT_SUFFIX}")));
    w.write_record(&header)?;
    let mut rec = Vec::with_capacity(header.len());
    for (row, county) in m.counties().iter().enumerate() {
        rec.clear();
        rec.push(county.to_string());
        rec.extend(
            m.columns()
                .iter()
                .map(|c| c.value(row).map(|v| v.to_string()).unwrap_or_default()),
        );
        rec.extend(m.columns().iter().map(|c| c.support(row).to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_indicators`]. Tables without `__n` columns are
/// accepted; their present cells get support 1.
pub fn read_indicators<R: Read>(source: R, period: DateWindow) -> Result<IndicatorMatrix, IndicatorError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let fips = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("fips"))
        .ok_or_else(|| DataError::MissingColumn("fips".into()))?;
    let value_cols: Vec<(usize, &str, Option<usize>)> = headers
        .iter()
        .enumerate()
        .filter(|&(i, h)| i != fips && !h.ends_with(SUPPORT_SUFFIX))
        .map(|(i, h)| {
            let n = headers
                .iter()
                .position(|o| o.strip_suffix(SUPPORT_SUFFIX) == Some(h));
            (i, h, n)
        })
        .collect();

    let mut counties = Vec::new();
    let mut values: Vec<Vec<Option<f64>>> = vec![Vec::new(); value_cols.len()];
    let mut support: Vec<Vec<u64>> = vec![Vec::new(); value_cols.len()];
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str, text: &str| DataError::Malformed {
            line,
            message: format!("{what} {text:?} is not a number"),
        };
        counties.push(CountyId::new(&row[fips])?);
        for (k, &(vi, name, ni)) in value_cols.iter().enumerate() {
            let text = &row[vi];
            let v = if text.is_empty() {
                None
            } else {
                Some(text.parse::<f64>().map_err(|_| bad(name, text))?)
            };
            let n = match ni {
                Some(ni) => {
                    let t = &row[ni];
                    t.parse::<u64>().map_err(|_| bad(name, t))?
                }
                None => u64::from(v.is_some()),
            };
            values[k].push(v);
            support[k].push(n);
        }
    }
    let columns = value_cols
        .iter()
        .zip(values.into_iter().zip(support))
        .map(|(&(_, name, _), (v, n))| IndicatorColumn::new(name, v, n))
        .collect::<Result<Vec<_>, _>>()?;
    IndicatorMatrix::new(period, counties, columns)
}
