use std::collections::HashSet;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{DerivationRule, IndicatorError};
use crate::datamodel::{QuestionId, QuestionSet};

const BUNDLED: &str = include_str!("../../assets/indicator_dictionary.json");

fn positive() -> i8 {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryEntry {
    pub key: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived_from: Option<String>,
    #[serde(default = "positive")]
    pub sign: i8,
    #[serde(default = "yes")]
    pub active: bool,
}

/// Declarative roster of questions, derived indicators and exclusions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndicatorDictionary {
    entries: Vec<DictionaryEntry>,
}

impl IndicatorDictionary {
    pub fn from_entries(entries: Vec<DictionaryEntry>) -> Result<Self, IndicatorError> {
        let d = Self { entries };
        d.validate()?;
        Ok(d)
    }

    pub fn from_reader<R: Read>(source: R) -> Result<Self, IndicatorError> {
        let d: Self = serde_json::from_reader(source)?;
        d.validate()?;
        Ok(d)
    }

    /// The shipped 46-question roster with its two sign-flipped indicators.
    pub fn bundled() -> Self {
        Self::from_reader(BUNDLED.as_bytes()).expect("bundled dictionary is valid")
    }

    fn validate(&self) -> Result<(), IndicatorError> {
        let err = |m: String| Err(IndicatorError::Dictionary(m));
        let mut keys = HashSet::new();
        for e in &self.entries {
            QuestionId::new(e.key.as_str())?;
            if !keys.insert(e.key.as_str()) {
                return err(format!("duplicate key {}", e.key));
            }
        }
        for e in &self.entries {
            match (&e.derived_from, e.sign) {
                (None, 1) => {}
                (None, s) => return err(format!("{}: raw question with sign {s}", e.key)),
                (Some(src), -1) => {
                    let ok = self
                        .entries
                        .iter()
                        .any(|o| &o.key == src && o.derived_from.is_none());
                    if !ok {
                        return err(format!("{}: derived from unknown question {src}", e.key));
                    }
                }
                (Some(_), s) => {
                    return err(format!("{}: only sign -1 derivations are supported, got {s}", e.key))
                }
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> &[DictionaryEntry] {
        &self.entries
    }

    /// Every raw (non-derived) question key, active or not. This is the set
    /// label ingestion accepts.
    pub fn questions(&self) -> QuestionSet {
        self.entries
            .iter()
            .filter(|e| e.derived_from.is_none())
            .map(|e| QuestionId::new(e.key.as_str()).expect("validated"))
            .collect()
    }

    pub fn derivation_rules(&self) -> Vec<DerivationRule> {
        self.entries
            .iter()
            .filter_map(|e| {
                e.derived_from
                    .as_ref()
                    .map(|src| DerivationRule::sign_flip(&e.key, src))
            })
            .collect()
    }

    /// Keys flagged inactive, in dictionary order.
    pub fn excluded(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| !e.active)
            .map(|e| e.key.as_str())
            .collect()
    }

    pub fn active(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.active)
            .map(|e| e.key.as_str())
            .collect()
    }
}
