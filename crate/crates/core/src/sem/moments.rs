use std::io::{Read, Write};

use nalgebra::DMatrix;

use super::SemError;
use crate::datamodel::{ClimateTable, CountyId, DataError, Hazard};
use crate::indicators::IndicatorMatrix;

/// County × observed-variable table with possible gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedTable {
    pub names: Vec<String>,
    pub counties: Vec<CountyId>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl ObservedTable {
    /// Join hazard columns and indicator columns by county. `names` may mix
    /// both kinds; hazard names take precedence. Counties from either table
    /// are included, with gaps where a table lacks them.
    pub fn assemble<S: AsRef<str>>(
        indicators: &IndicatorMatrix,
        climate: &ClimateTable,
        names: &[S],
    ) -> Result<Self, SemError> {
        enum Source<'a> {
            Hazard(Hazard),
            Indicator(&'a crate::indicators::IndicatorColumn),
        }
        let sources = names
            .iter()
            .map(|n| {
                let n = n.as_ref();
                match Hazard::from_name(n) {
                    Some(h) => Ok(Source::Hazard(h)),
                    None => indicators
                        .column(n)
                        .map(Source::Indicator)
                        .ok_or_else(|| SemError::UnknownIndicator(n.to_string())),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut counties: Vec<CountyId> = indicators
            .counties()
            .iter()
            .cloned()
            .chain(climate.iter().map(|(c, _)| c.clone()))
            .collect();
        counties.sort();
        counties.dedup();

        let rows = counties
            .iter()
            .map(|c| {
                let irow = indicators.county_index(c);
                sources
                    .iter()
                    .map(|s| match s {
                        Source::Hazard(h) => climate.score(c, *h),
                        Source::Indicator(col) => irow.and_then(|r| col.value(r)),
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            names: names.iter().map(|n| n.as_ref().to_string()).collect(),
            counties,
            rows,
        })
    }

    /// Rows without gaps, in table order, plus the counties left out.
    pub fn listwise(&self) -> (Vec<CountyId>, Vec<Vec<f64>>, Vec<CountyId>) {
        let mut kept = Vec::new();
        let mut data = Vec::new();
        let mut dropped = Vec::new();
        for (c, row) in self.counties.iter().zip(&self.rows) {
            if row.iter().all(|v| v.is_some_and(f64::is_finite)) {
                kept.push(c.clone());
                data.push(row.iter().map(|v| v.unwrap()).collect());
            } else {
                dropped.push(c.clone());
            }
        }
        (kept, data, dropped)
    }

    /// Columns reordered to `names`.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Self, SemError> {
        let idx = names
            .iter()
            .map(|n| {
                self.names
                    .iter()
                    .position(|m| m == n.as_ref())
                    .ok_or_else(|| SemError::UnknownIndicator(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            names: idx.iter().map(|&i| self.names[i].clone()).collect(),
            counties: self.counties.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&i| r[i]).collect())
                .collect(),
        })
    }

    /// `fips,<names...>` with shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(sink);
        let mut header = vec!["fips".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (c, row) in self.counties.iter().zip(&self.rows) {
            let mut rec = vec![c.to_string()];
            rec.extend(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Self, DataError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(source);
        let headers = reader.headers()?.clone();
        if headers.get(0) != Some("fips") {
            return Err(DataError::MissingColumn("fips".into()));
        }
        let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut counties = Vec::new();
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            counties.push(CountyId::new(&rec[0])?);
            let row = rec
                .iter()
                .skip(1)
                .map(|t| {
                    if t.is_empty() {
                        Ok(None)
                    } else {
                        t.parse().map(Some).map_err(|_| DataError::Malformed {
                            line,
                            message: format!("{t:?} is not a number"),
                        })
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Self {
            names,
            counties,
            rows,
        })
    }
}

/// Sample covariance (divisor N − 1), means and case count.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMoments {
    names: Vec<String>,
    covariance: DMatrix<f64>,
    means: Vec<f64>,
    n: usize,
    counties: Vec<CountyId>,
    log_det: f64,
}

impl SampleMoments {
    /// Validates symmetry, N > p and positive definiteness.
    pub fn from_covariance(
        names: Vec<String>,
        covariance: DMatrix<f64>,
        n: usize,
    ) -> Result<Self, SemError> {
        let p = names.len();
        if covariance.nrows() != p || covariance.ncols() != p {
            return Err(SemError::Structure(format!(
                "covariance is {}x{} for {p} names",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if n <= p {
            return Err(SemError::TooFewCases { n, p });
        }
        for a in 0..p {
            for b in 0..a {
                let (x, y) = (covariance[(a, b)], covariance[(b, a)]);
                if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                    return Err(SemError::NotSymmetric);
                }
            }
        }
        let chol = covariance
            .clone()
            .cholesky()
            .ok_or(SemError::SampleNotPositiveDefinite)?;
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(SemError::SampleNotPositiveDefinite);
        }
        Ok(Self {
            names,
            covariance,
            means: vec![0.0; p],
            n,
            counties: Vec::new(),
            log_det,
        })
    }

    /// Moments of complete data rows.
    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self, SemError> {
        let p = names.len();
        let n = rows.len();
        if n <= p {
            return Err(SemError::TooFewCases { n, p });
        }
        let mut means = vec![0.0; p];
        for r in rows {
            for (m, x) in means.iter_mut().zip(r) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
        let mut cov = DMatrix::zeros(p, p);
        let mut dev = vec![0.0; p];
        for r in rows {
            for (d, (x, m)) in dev.iter_mut().zip(r.iter().zip(&means)) {
                *d = x - m;
            }
            for a in 0..p {
                for b in 0..=a {
                    cov[(a, b)] += dev[a] * dev[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..=a {
                let v = cov[(a, b)] / (n - 1) as f64;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        let mut out = Self::from_covariance(names, cov, n)?;
        out.means = means;
        Ok(out)
    }

    /// Listwise-complete moments of a table, and the counties excluded.
    pub fn from_table(table: &ObservedTable) -> Result<(Self, Vec<CountyId>), SemError> {
        let (kept, data, dropped) = table.listwise();
        let mut m = Self::from_rows(table.names.clone(), &data)?;
        m.counties = kept;
        Ok((m, dropped))
    }

    /// Variables reordered (or subset) to `names`.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Self, SemError> {
        let idx = names
            .iter()
            .map(|n| {
                self.names
                    .iter()
                    .position(|m| m == n.as_ref())
                    .ok_or_else(|| SemError::UnknownIndicator(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if idx.iter().enumerate().all(|(i, &j)| i == j) && idx.len() == self.names.len() {
            return Ok(self.clone());
        }
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.covariance[(idx[a], idx[b])]);
        let mut out = Self::from_covariance(
            idx.iter().map(|&i| self.names[i].clone()).collect(),
            cov,
            self.n,
        )?;
        out.means = idx.iter().map(|&i| self.means[i]).collect();
        out.counties = self.counties.clone();
        Ok(out)
    }

    /// The correlation matrix with the same N.
    pub fn to_correlation(&self) -> Self {
        let sd: Vec<f64> = self.covariance.diagonal().iter().map(|v| v.sqrt()).collect();
        let p = self.names.len();
        let cor = DMatrix::from_fn(p, p, |a, b| {
            if a == b {
                1.0
            } else {
                self.covariance[(a, b)] / (sd[a] * sd[b])
            }
        });
        let mut out = Self::from_covariance(self.names.clone(), cor, self.n)
            .expect("correlation of a PD matrix is PD");
        out.means = self.means.iter().zip(&sd).map(|(m, s)| m / s).collect();
        out.counties = self.counties.clone();
        out
    }

    /// Multiply variable `index` by `c`, as if its unit of measurement changed.
    pub fn rescale(&self, index: usize, c: f64) -> Result<Self, SemError> {
        let p = self.names.len();
        let cov = DMatrix::from_fn(p, p, |a, b| {
            let mut v = self.covariance[(a, b)];
            if a == index {
                v *= c;
            }
            if b == index {
                v *= c;
            }
            v
        });
        let mut out = Self::from_covariance(self.names.clone(), cov, self.n)?;
        out.means = self.means.clone();
        out.means[index] *= c;
        out.counties = self.counties.clone();
        Ok(out)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.names.len()
    }

    pub fn counties(&self) -> &[CountyId] {
        &self.counties
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn covariance_of_rows() {
        let rows = vec![
            vec![1.0, 2.0],
            vec![2.0, 1.0],
            vec![3.0, 4.0],
            vec![4.0, 3.0],
        ];
        let m = SampleMoments::from_rows(names(2), &rows).unwrap();
        assert_eq!(m.means(), &[2.5, 2.5]);
        let c = m.covariance();
        assert!((c[(0, 0)] - 5.0 / 3.0).abs() < 1e-15);
        assert!((c[(0, 1)] - 3.0 / 3.0).abs() < 1e-15);
        assert_eq!(c[(0, 1)], c[(1, 0)]);
    }

    #[test]
    fn rejects_bad_matrices() {
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            SampleMoments::from_covariance(names(2), singular, 10),
            Err(SemError::SampleNotPositiveDefinite)
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.3, 1.0]);
        assert!(matches!(
            SampleMoments::from_covariance(names(2), asym, 10),
            Err(SemError::NotSymmetric)
        ));
        assert!(matches!(
            SampleMoments::from_covariance(names(2), DMatrix::identity(2, 2), 2),
            Err(SemError::TooFewCases { .. })
        ));
    }

    #[test]
    fn select_reorders() {
        let c = DMatrix::from_row_slice(3, 3, &[1.0, 0.1, 0.2, 0.1, 2.0, 0.3, 0.2, 0.3, 3.0]);
        let m = SampleMoments::from_covariance(names(3), c, 50).unwrap();
        let s = m.select(&["v2", "v0"]).unwrap();
        assert_eq!(s.covariance(), &DMatrix::from_row_slice(2, 2, &[3.0, 0.2, 0.2, 1.0]));
        assert!(m.select(&["nope"]).is_err());
        let cor = m.to_correlation();
        assert!((cor.covariance()[(0, 2)] - 0.2 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn table_listwise_deletion() {
        let t = ObservedTable {
            names: names(1),
            counties: (0..4).map(|i| CountyId::new(format!("0100{i}")).unwrap()).collect(),
            rows: vec![vec![Some(1.0)], vec![None], vec![Some(2.0)], vec![Some(4.0)]],
        };
        let (m, dropped) = SampleMoments::from_table(&t).unwrap();
        assert_eq!(m.n(), 3);
        assert_eq!(dropped, vec![CountyId::new("01001").unwrap()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(ObservedTable::read_csv(buf.as_slice()).unwrap(), t);
    }
}
