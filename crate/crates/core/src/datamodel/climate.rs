use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{CountyId, DataError};

/// Resilience-adjusted hazard percentile columns, in file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hazard {
    Heat,
    Fire,
    Drought,
    Inland,
    Coastal,
    Wind,
}

impl Hazard {
    pub const ALL: [Hazard; 6] = [
        Hazard::Heat,
        Hazard::Fire,
        Hazard::Drought,
        Hazard::Inland,
        Hazard::Coastal,
        Hazard::Wind,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Hazard::Heat => "heat",
            Hazard::Fire => "fire",
            Hazard::Drought => "drought",
            Hazard::Inland => "inland",
            Hazard::Coastal => "coastal",
            Hazard::Wind => "wind",
        }
    }

    pub fn from_name(name: &str) -> Option<Hazard> {
        Hazard::ALL
            .into_iter()
            .find(|h| h.as_str().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for Hazard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// County × hazard percentile scores, each in `[0, 100]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClimateTable {
    rows: BTreeMap<CountyId, [f64; 6]>,
}

impl ClimateTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, county: CountyId, scores: [f64; 6]) -> Result<(), DataError> {
        for (h, &v) in Hazard::ALL.iter().zip(&scores) {
            if !(0.0..=100.0).contains(&v) {
                return Err(DataError::ScoreOutOfRange {
                    county: county.to_string(),
                    hazard: h.as_str(),
                    value: v,
                });
            }
        }
        if self.rows.contains_key(&county) {
            return Err(DataError::DuplicateCounty(county.to_string()));
        }
        self.rows.insert(county, scores);
        Ok(())
    }

    pub fn get(&self, county: &CountyId) -> Option<&[f64; 6]> {
        self.rows.get(county)
    }

    pub fn score(&self, county: &CountyId, hazard: Hazard) -> Option<f64> {
        self.rows.get(county).map(|s| s[hazard as usize])
    }

    /// Rows in ascending FIPS order.
    pub fn iter(&self) -> impl Iterator<Item = (&CountyId, &[f64; 6])> {
        self.rows.iter()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Read a `fips, heat, fire, drought, inland, coastal, wind` table. Header
/// names are matched case-insensitively and may appear in any order.
pub fn ingest_climate<R: Read>(source: R) -> Result<ClimateTable, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let fips_col = find("fips")?;
    let mut cols = [0usize; 6];
    for (slot, h) in cols.iter_mut().zip(Hazard::ALL) {
        *slot = find(h.as_str())?;
    }

    let mut table = ClimateTable::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let county = CountyId::new(&row[fips_col])?;
        let mut scores = [0.0; 6];
        for (k, &c) in cols.iter().enumerate() {
            let text = &row[c];
            scores[k] = text.parse().map_err(|_| DataError::Malformed {
                line,
                message: format!("{} value {text:?} is not a number", Hazard::ALL[k]),
            })?;
        }
        table.insert(county, scores)?;
    }
    Ok(table)
}

pub fn write_climate<W: Write>(table: &ClimateTable, sink: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["fips"];
    header.extend(Hazard::ALL.iter().map(|h| h.as_str()));
    w.write_record(&header)?;
    for (county, scores) in table.iter() {
        let mut rec = vec![county.to_string()];
        rec.extend(scores.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "fips,heat,fire,drought,inland,coastal,wind\n";

    #[test]
    fn mid_range_row_is_accepted() {
        let t = ingest_climate(format!("{HEADER}01001,50,50,50,50,50,50\n").as_bytes()).unwrap();
        assert_eq!(t.len(), 1);
        let c = CountyId::new("01001").unwrap();
        assert_eq!(t.score(&c, Hazard::Wind), Some(50.0));
    }

    #[test]
    fn out_of_range_score() {
        let err = ingest_climate(format!("{HEADER}01001,101,0,0,0,0,0\n").as_bytes()).unwrap_err();
        assert!(matches!(err, DataError::ScoreOutOfRange { hazard: "heat", .. }));
        assert!(err.to_string().contains("score out of range"));
        let err = ingest_climate(format!("{HEADER}01001,NaN,0,0,0,0,0\n").as_bytes()).unwrap_err();
        assert!(matches!(err, DataError::ScoreOutOfRange { .. }));
    }

    #[test]
    fn duplicate_county() {
        let text = format!("{HEADER}48201,1,2,3,4,5,6\n48201,1,2,3,4,5,6\n");
        assert!(matches!(
            ingest_climate(text.as_bytes()),
            Err(DataError::DuplicateCounty(c)) if c == "48201"
        ));
    }

    #[test]
    fn missing_column() {
        let text = "fips,heat,fire,drought,inland,coastal\n01001,1,2,3,4,5\n";
        assert!(matches!(
            ingest_climate(text.as_bytes()),
            Err(DataError::MissingColumn(c)) if c == "wind"
        ));
    }

    #[test]
    fn uppercase_headers_in_any_order() {
        let text = "FIRE,fips,WIND,HEAT,DROUGHT,COASTAL,INLAND\n1,01001,2,3,4,5,6\n";
        let t = ingest_climate(text.as_bytes()).unwrap();
        let c = CountyId::new("01001").unwrap();
        assert_eq!(t.get(&c), Some(&[3.0, 1.0, 4.0, 6.0, 5.0, 2.0]));
        let mut buf = Vec::new();
        write_climate(&t, &mut buf).unwrap();
        assert_eq!(ingest_climate(buf.as_slice()).unwrap(), t);
    }
}
