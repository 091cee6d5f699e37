use std::collections::HashSet;

use super::IndicatorError;
use crate::datamodel::{CountyId, DateWindow};

/// One indicator across all counties of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorColumn {
    name: String,
    values: Vec<Option<f64>>,
    support: Vec<u64>,
}

impl IndicatorColumn {
    /// A cell is present exactly when its support is positive, and present
    /// values lie in `[-1, 1]`.
    pub fn new(
        name: impl Into<String>,
        values: Vec<Option<f64>>,
        support: Vec<u64>,
    ) -> Result<Self, IndicatorError> {
        let name = name.into();
        if values.len() != support.len() {
            return Err(IndicatorError::ColumnLength {
                column: name,
                values: values.len(),
                support: support.len(),
                counties: values.len(),
            });
        }
        for (row, (v, &n)) in values.iter().zip(&support).enumerate() {
            match v {
                Some(x) if n > 0 => {
                    if !(-1.0..=1.0).contains(x) {
                        return Err(IndicatorError::OutOfBounds {
                            column: name,
                            row,
                            value: *x,
                        });
                    }
                }
                None if n == 0 => {}
                _ => {
                    return Err(IndicatorError::SupportMismatch {
                        column: name,
                        row,
                        support: n,
                    })
                }
            }
        }
        Ok(Self {
            name,
            values,
            support,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, row: usize) -> Option<f64> {
        self.values[row]
    }

    pub fn support(&self, row: usize) -> u64 {
        self.support[row]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn supports(&self) -> &[u64] {
        &self.support
    }

    pub(crate) fn map_values(&self, name: impl Into<String>, f: impl Fn(f64) -> f64) -> Self {
        Self {
            name: name.into(),
            values: self.values.iter().map(|v| v.map(&f)).collect(),
            support: self.support.clone(),
        }
    }

    /// Population variance over present cells; 0 when fewer than two.
    pub fn variance(&self) -> f64 {
        let present: Vec<f64> = self.values.iter().flatten().copied().collect();
        if present.len() < 2 {
            return 0.0;
        }
        let n = present.len() as f64;
        let mean = present.iter().sum::<f64>() / n;
        present.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
    }
}

/// County × indicator table of bounded scores with support counts.
/// Counties are kept in ascending FIPS order.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorMatrix {
    period: DateWindow,
    counties: Vec<CountyId>,
    columns: Vec<IndicatorColumn>,
}

impl IndicatorMatrix {
    pub fn new(
        period: DateWindow,
        counties: Vec<CountyId>,
        columns: Vec<IndicatorColumn>,
    ) -> Result<Self, IndicatorError> {
        let mut names = HashSet::new();
        for c in &columns {
            if c.values.len() != counties.len() {
                return Err(IndicatorError::ColumnLength {
                    column: c.name.clone(),
                    values: c.values.len(),
                    support: c.support.len(),
                    counties: counties.len(),
                });
            }
            if !names.insert(c.name.as_str()) {
                return Err(IndicatorError::DuplicateColumn(c.name.clone()));
            }
        }
        let mut order: Vec<usize> = (0..counties.len()).collect();
        order.sort_by(|&a, &b| counties[a].cmp(&counties[b]));
        for w in order.windows(2) {
            if counties[w[0]] == counties[w[1]] {
                return Err(IndicatorError::DuplicateCounty(counties[w[0]].to_string()));
            }
        }
        let sorted = order.windows(2).all(|w| w[0] < w[1]);
        if sorted {
            return Ok(Self {
                period,
                counties,
                columns,
            });
        }
        let counties = order.iter().map(|&i| counties[i].clone()).collect();
        let columns = columns
            .into_iter()
            .map(|c| IndicatorColumn {
                values: order.iter().map(|&i| c.values[i]).collect(),
                support: order.iter().map(|&i| c.support[i]).collect(),
                name: c.name,
            })
            .collect();
        Ok(Self {
            period,
            counties,
            columns,
        })
    }

    pub fn period(&self) -> DateWindow {
        self.period
    }

    pub fn counties(&self) -> &[CountyId] {
        &self.counties
    }

    pub fn columns(&self) -> &[IndicatorColumn] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&IndicatorColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn county_index(&self, county: &CountyId) -> Option<usize> {
        self.counties.binary_search(county).ok()
    }

    pub fn value(&self, county: &CountyId, column: &str) -> Option<f64> {
        let row = self.county_index(county)?;
        self.column(column)?.value(row)
    }

    pub fn is_empty(&self) -> bool {
        self.counties.is_empty()
    }

    /// Adds a column, keeping name uniqueness.
    pub fn push_column(&mut self, column: IndicatorColumn) -> Result<(), IndicatorError> {
        if column.values.len() != self.counties.len() {
            return Err(IndicatorError::ColumnLength {
                column: column.name.clone(),
                values: column.values.len(),
                support: column.support.len(),
                counties: self.counties.len(),
            });
        }
        if self.column(&column.name).is_some() {
            return Err(IndicatorError::DuplicateColumn(column.name));
        }
        self.columns.push(column);
        Ok(())
    }

    /// Drops the named columns, returning those that were present.
    pub fn remove_columns(&mut self, names: &[&str]) -> Vec<String> {
        let mut removed = Vec::new();
        self.columns.retain(|c| {
            if names.contains(&c.name.as_str()) {
                removed.push(c.name.clone());
                false
            } else {
                true
            }
        });
        removed
    }
}
