use std::io::{Read, Write};

use super::{FactorScoreTable, ScoringError};
use crate::datamodel::CountyId;
use crate::sem::{ModelSpec, StandardizedSolution};

/// Latent column order for maps: the exogenous latent, then endogenous
/// latents by descending |standardized path|, ties in declaration order.
pub fn path_order(spec: &ModelSpec, standardized: &StandardizedSolution) -> Vec<usize> {
    let mut endo: Vec<usize> = (0..spec.n_endogenous()).collect();
    endo.sort_by(|&i, &j| {
        standardized.paths[j]
            .abs()
            .partial_cmp(&standardized.paths[i].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    std::iter::once(0).chain(endo.into_iter().map(|j| j + 1)).collect()
}

/// `fips,<latent...>` with six decimals.
pub fn write_scores<W: Write>(table: &FactorScoreTable, sink: W) -> Result<(), ScoringError> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["fips".to_string()];
    header.extend(table.latents.iter().cloned());
    w.write_record(&header)?;
    for (c, row) in table.counties.iter().zip(&table.scores) {
        let mut rec = vec![c.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:.6}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scores<R: Read>(source: R) -> Result<FactorScoreTable, ScoringError> {
    let mut r = csv::Reader::from_reader(source);
    let header = r.headers()?.clone();
    if header.get(0) != Some("fips") {
        return Err(ScoringError::Table("first column must be fips".into()));
    }
    let latents: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut counties = Vec::new();
    let mut scores = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        counties.push(CountyId::new(&rec[0])?);
        let row = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| ScoringError::Table(format!("bad score {v:?} for {}", &rec[0])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        scores.push(row);
    }
    Ok(FactorScoreTable {
        latents,
        counties,
        scores,
        excluded: Vec::new(),
    })
}
