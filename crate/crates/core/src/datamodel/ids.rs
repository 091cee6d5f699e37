use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;

/// Five-digit county FIPS code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CountyId(String);

impl CountyId {
    pub fn new(fips: impl Into<String>) -> Result<Self, DataError> {
        let fips = fips.into();
        if fips.len() == 5 && fips.bytes().all(|b| b.is_ascii_digit()) {
            Ok(Self(fips))
        } else {
            Err(DataError::InvalidCounty(fips))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for CountyId {
    type Err = DataError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s.trim())
    }
}

impl TryFrom<String> for CountyId {
    type Error = DataError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::new(s)
    }
}

impl From<CountyId> for String {
    fn from(c: CountyId) -> Self {
        c.0
    }
}

impl fmt::Display for CountyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Eleven-digit census tract GEOID. The leading five digits are the county.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CensusAreaId {
    geoid: String,
    county: CountyId,
}

impl CensusAreaId {
    pub fn new(geoid: impl Into<String>) -> Result<Self, DataError> {
        let geoid = geoid.into();
        if geoid.len() != 11 || !geoid.bytes().all(|b| b.is_ascii_digit()) {
            return Err(DataError::InvalidArea(geoid));
        }
        let county = CountyId::new(&geoid[..5])?;
        Ok(Self { geoid, county })
    }

    /// Builds the id and checks it against an explicitly stated county.
    pub fn with_county(geoid: impl Into<String>, county: &CountyId) -> Result<Self, DataError> {
        let area = Self::new(geoid)?;
        if &area.county != county {
            return Err(DataError::AreaCountyMismatch {
                geoid: area.geoid,
                county: county.to_string(),
            });
        }
        Ok(area)
    }

    pub fn geoid(&self) -> &str {
        &self.geoid
    }

    pub fn county(&self) -> &CountyId {
        &self.county
    }
}

impl fmt::Display for CensusAreaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.geoid)
    }
}

/// Short lowercase question key such as `happiness`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct QuestionId(String);

impl QuestionId {
    pub fn new(key: impl Into<String>) -> Result<Self, DataError> {
        let key = key.into();
        let ok = !key.is_empty()
            && key.as_bytes()[0].is_ascii_lowercase()
            && key
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_');
        if ok {
            Ok(Self(key))
        } else {
            Err(DataError::InvalidQuestion(key))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for QuestionId {
    type Error = DataError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::new(s)
    }
}

impl From<QuestionId> for String {
    fn from(q: QuestionId) -> Self {
        q.0
    }
}

impl fmt::Display for QuestionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn county_requires_five_digits() {
        assert!(CountyId::new("01001").is_ok());
        assert!(CountyId::new("1001").is_err());
        assert!(CountyId::new("0100a").is_err());
        assert!(CountyId::new("").is_err());
    }

    #[test]
    fn area_derives_county() {
        let a = CensusAreaId::new("48201100000").unwrap();
        assert_eq!(a.county().as_str(), "48201");
        let other = CountyId::new("48203").unwrap();
        assert!(matches!(
            CensusAreaId::with_county("48201100000", &other),
            Err(DataError::AreaCountyMismatch { .. })
        ));
        assert!(CensusAreaId::new("4820110000").is_err());
    }

    #[test]
    fn question_keys_are_lowercase() {
        assert!(QuestionId::new("future_sec").is_ok());
        assert!(QuestionId::new("Happiness").is_err());
        assert!(QuestionId::new("_x").is_err());
        assert!(QuestionId::new("").is_err());
    }
}
