use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use hfsem::datamodel::{DateWindow, UnknownQuestionPolicy};
use hfsem::indicators::{IndicatorDictionary, RecodingScheme, DEFAULT_VARIANCE_THRESHOLD};
use hfsem::scoring::{ScoreMethod, DEFAULT_JOIN_KEY};
use hfsem::sem::{FitOptions, ModelSpec, DEFAULT_MODEL};
use serde::{Deserialize, Serialize};

/// Contents of the `--config` TOML file. Relative paths resolve against
/// the file's directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub inputs: Inputs,
    pub aggregate: AggregateConfig,
    pub fit: FitConfig,
    pub scores: ScoresConfig,
    pub simulate: SimulateConfig,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub labels: Option<PathBuf>,
    pub climate: Option<PathBuf>,
    /// Defaults to the bundled dictionary.
    pub dictionary: Option<PathBuf>,
    /// Defaults to the bundled model.
    pub model: Option<PathBuf>,
    pub geometry: Option<PathBuf>,
    /// Defaults to `<out>/indicators.csv`.
    pub indicators: Option<PathBuf>,
    /// Defaults to `<out>/fit.json`.
    pub fit: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Periods {
    #[default]
    Full,
    Monthly,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregateConfig {
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub periods: Periods,
    pub variance_threshold: f64,
    pub unknown_questions: UnknownQuestionPolicy,
    pub recoding: RecodingScheme,
}

impl Default for AggregateConfig {
    fn default() -> Self {
        let w = DateWindow::study();
        Self {
            window_start: w.start,
            window_end: w.end,
            periods: Periods::Full,
            variance_threshold: DEFAULT_VARIANCE_THRESHOLD,
            unknown_questions: UnknownQuestionPolicy::Skip,
            recoding: RecodingScheme::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub variance_floor: f64,
    pub standard_errors: bool,
    pub baseline: bool,
    /// Fit the correlation matrix instead of the covariance matrix.
    pub correlation: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        let o = FitOptions::default();
        Self {
            max_iterations: o.max_iterations,
            gradient_tolerance: o.gradient_tolerance,
            variance_floor: o.variance_floor,
            standard_errors: o.standard_errors,
            baseline: o.baseline,
            correlation: false,
        }
    }
}

impl FitConfig {
    pub fn options(&self) -> FitOptions {
        FitOptions {
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            variance_floor: self.variance_floor,
            standard_errors: self.standard_errors,
            baseline: self.baseline,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoresConfig {
    pub method: ScoreMethod,
    pub join_key: String,
}

impl Default for ScoresConfig {
    fn default() -> Self {
        Self {
            method: ScoreMethod::Regression,
            join_key: DEFAULT_JOIN_KEY.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub seed: Option<u64>,
    pub counties: usize,
    pub areas_per_county: usize,
    pub records_per_question: usize,
    pub start: NaiveDate,
    pub days: u32,
    /// Endogenous latents that get positive true paths.
    pub positive: Vec<String>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            seed: None,
            counties: 200,
            areas_per_county: 3,
            records_per_question: 40,
            start: NaiveDate::from_ymd_opt(2015, 1, 1).unwrap(),
            days: 365,
            positive: vec!["psychological_distress".into()],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.out);
        let i = &mut self.inputs;
        for p in [
            &mut i.labels,
            &mut i.climate,
            &mut i.dictionary,
            &mut i.model,
            &mut i.geometry,
            &mut i.indicators,
            &mut i.fit,
        ] {
            fix(p);
        }
    }

    pub fn window(&self) -> Result<DateWindow> {
        Ok(DateWindow::new(self.aggregate.window_start, self.aggregate.window_end)?)
    }

    pub fn dictionary(&self) -> Result<(IndicatorDictionary, Option<PathBuf>)> {
        match &self.inputs.dictionary {
            Some(p) => {
                let f = std::fs::File::open(p).with_context(|| format!("opening dictionary {}", p.display()))?;
                Ok((IndicatorDictionary::from_reader(f)?, Some(p.clone())))
            }
            None => Ok((IndicatorDictionary::bundled(), None)),
        }
    }

    /// The model spec and its source text.
    pub fn model(&self) -> Result<(ModelSpec, String, Option<PathBuf>)> {
        let (text, path) = match &self.inputs.model {
            Some(p) => (
                std::fs::read_to_string(p).with_context(|| format!("reading model {}", p.display()))?,
                Some(p.clone()),
            ),
            None => (DEFAULT_MODEL.to_string(), None),
        };
        let spec = ModelSpec::parse(&text).context("parsing model spec")?;
        Ok((spec, text, path))
    }
}

pub fn require<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a PathBuf> {
    match p {
        Some(p) if p.exists() => Ok(p),
        Some(p) => bail!("{what} file {} does not exist", p.display()),
        None => bail!("no {what} file configured (inputs.{what})"),
    }
}
