use serde::{Deserialize, Serialize};

use super::IndicatorError;
use crate::datamodel::Label;

/// Numeric score assigned to each label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecodingScheme {
    pub not_present: f64,
    pub low: f64,
    pub medium: f64,
    pub high: f64,
}

impl Default for RecodingScheme {
    fn default() -> Self {
        Self {
            not_present: 0.0,
            low: -1.0,
            medium: 0.5,
            high: 1.0,
        }
    }
}

impl RecodingScheme {
    pub fn new(low: f64, medium: f64, high: f64) -> Result<Self, IndicatorError> {
        let s = Self {
            not_present: 0.0,
            low,
            medium,
            high,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), IndicatorError> {
        if self.not_present != 0.0 {
            return Err(IndicatorError::NotPresentNonZero(self.not_present));
        }
        for label in Label::ALL {
            let v = self.score(label);
            if !(-1.0..=1.0).contains(&v) {
                return Err(IndicatorError::SchemeOutOfBounds {
                    label: label.as_str(),
                    value: v,
                });
            }
        }
        Ok(())
    }

    pub fn score(&self, label: Label) -> f64 {
        match label {
            Label::NotPresent => self.not_present,
            Label::Low => self.low,
            Label::Medium => self.medium,
            Label::High => self.high,
        }
    }
}

pub fn recode(label: Label, scheme: &RecodingScheme) -> f64 {
    scheme.score(label)
}
