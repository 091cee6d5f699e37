use std::collections::BTreeMap;
use std::io::Read;

use super::{CountyId, DataError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountyEntry {
    pub name: String,
    pub geometry_key: Option<String>,
}

/// Known counties with display names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountyRegistry {
    counties: BTreeMap<CountyId, CountyEntry>,
}

impl CountyRegistry {
    pub fn insert(&mut self, county: CountyId, entry: CountyEntry) -> Result<(), DataError> {
        if self.counties.contains_key(&county) {
            return Err(DataError::DuplicateCounty(county.to_string()));
        }
        self.counties.insert(county, entry);
        Ok(())
    }

    pub fn get(&self, county: &CountyId) -> Option<&CountyEntry> {
        self.counties.get(county)
    }

    pub fn contains(&self, county: &CountyId) -> bool {
        self.counties.contains_key(county)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CountyId, &CountyEntry)> {
        self.counties.iter()
    }

    pub fn len(&self) -> usize {
        self.counties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counties.is_empty()
    }

    /// Reads `fips,name[,geometry_key]`.
    pub fn from_csv<R: Read>(source: R) -> Result<Self, DataError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(source);
        let headers = reader.headers()?.clone();
        let find = |n: &str| headers.iter().position(|h| h == n);
        let fips = find("fips").ok_or_else(|| DataError::MissingColumn("fips".into()))?;
        let name = find("name").ok_or_else(|| DataError::MissingColumn("name".into()))?;
        let geom = find("geometry_key");
        let mut reg = Self::default();
        for row in reader.records() {
            let row = row?;
            let key = geom
                .and_then(|g| row.get(g))
                .filter(|s| !s.is_empty())
                .map(str::to_string);
            reg.insert(
                CountyId::new(&row[fips])?,
                CountyEntry {
                    name: row[name].to_string(),
                    geometry_key: key,
                },
            )?;
        }
        Ok(reg)
    }
}
