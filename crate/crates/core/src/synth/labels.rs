use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{stream_rng, uniform, Observations, SynthError};
use crate::datamodel::{CensusAreaId, CountyId, Label, LabelRecord, QuestionId};
use crate::par;

/// Probabilities over [`Label::ALL`] (not_present, low, medium, high).
pub type LabelProbabilities = [f64; 4];

/// Share of records that are related to their question in SEM-driven
/// label streams; the rest are `not_present`.
pub const RELATED_SHARE: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionProbabilities {
    pub question: String,
    pub probabilities: LabelProbabilities,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSynthConfig {
    pub seed: u64,
    pub counties: usize,
    pub areas_per_county: usize,
    pub start: NaiveDate,
    pub days: u32,
    /// Records per county per question.
    pub records_per_question: usize,
    pub questions: Vec<QuestionProbabilities>,
    /// County c draws from stream `first_stream + c`.
    #[serde(default)]
    pub first_stream: u64,
}

impl LabelSynthConfig {
    pub fn uniform(seed: u64, counties: usize, questions: &[&str], records_per_question: usize) -> Self {
        Self {
            seed,
            counties,
            areas_per_county: 3,
            start: NaiveDate::from_ymd_opt(2015, 1, 1).unwrap(),
            days: 365,
            records_per_question,
            questions: questions
                .iter()
                .map(|q| QuestionProbabilities {
                    question: q.to_string(),
                    probabilities: [0.25; 4],
                })
                .collect(),
            first_stream: 0,
        }
    }

    fn validate(&self) -> Result<Vec<QuestionId>, SynthError> {
        if self.areas_per_county == 0 || self.days == 0 {
            return Err(SynthError::Config(
                "areas_per_county and days must be positive".into(),
            ));
        }
        if self.counties > 99 * 300 {
            return Err(SynthError::Config("too many counties".into()));
        }
        for q in &self.questions {
            check_probabilities(&q.question, &q.probabilities)?;
        }
        Ok(self
            .questions
            .iter()
            .map(|q| QuestionId::new(q.question.clone()))
            .collect::<Result<_, _>>()?)
    }
}

fn check_probabilities(what: &str, p: &LabelProbabilities) -> Result<(), SynthError> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|x| !(*x >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
        return Err(SynthError::Probabilities(what.to_string()));
    }
    Ok(())
}

/// Synthetic county code for the `i`-th generated county.
pub fn county_fips(i: usize) -> CountyId {
    CountyId::new(format!("{:02}{:03}", 1 + i / 300, 1 + 2 * (i % 300))).expect("five digits")
}

fn area(county: &CountyId, a: usize) -> CensusAreaId {
    CensusAreaId::new(format!("{}{:06}", county.as_str(), 100 * (a + 1))).expect("eleven digits")
}

/// Label stream with the configured per-question probabilities.
pub fn generate_labels(config: &LabelSynthConfig) -> Result<Vec<LabelRecord>, SynthError> {
    generate_labels_with(config, |_, q| config.questions[q].probabilities)
}

/// Label stream whose probabilities may vary by county.
///
/// County `c` draws from stream `first_stream + c`. Records cycle through
/// the questions in order, `records_per_question` times; each record takes
/// an area index, a day offset and a label from three successive uniforms. The label is
/// the first index whose cumulative probability exceeds the uniform.
/// Tweet ids are `<fips>-<record index>`.
pub fn generate_labels_with<F>(config: &LabelSynthConfig, probabilities: F) -> Result<Vec<LabelRecord>, SynthError>
where
    F: Fn(usize, usize) -> LabelProbabilities + Sync + Send,
{
    let questions = config.validate()?;
    for c in 0..config.counties {
        for (q, id) in questions.iter().enumerate() {
            check_probabilities(&format!("{} in county {c}", id.as_str()), &probabilities(c, q))?;
        }
    }
    let per_county = par::map_range(config.counties, |c| {
        let county = county_fips(c);
        let areas: Vec<CensusAreaId> = (0..config.areas_per_county).map(|a| area(&county, a)).collect();
        let probs: Vec<LabelProbabilities> = (0..questions.len()).map(|q| probabilities(c, q)).collect();
        let mut rng = stream_rng(config.seed, config.first_stream + c as u64);
        let mut out = Vec::with_capacity(questions.len() * config.records_per_question);
        for i in 0..questions.len() * config.records_per_question {
            let q = i % questions.len();
            let a = ((uniform(&mut rng) * areas.len() as f64) as usize).min(areas.len() - 1);
            let d = ((uniform(&mut rng) * config.days as f64) as u64).min(config.days as u64 - 1);
            let u = uniform(&mut rng);
            let mut acc = 0.0;
            let mut label = Label::High;
            for (k, p) in probs[q].iter().enumerate() {
                acc += p;
                if u < acc {
                    label = Label::ALL[k];
                    break;
                }
            }
            if probs[q][label.index()] == 0.0 {
                // u landed in the rounding slack above the cumulative sum
                label = *Label::ALL
                    .iter()
                    .rev()
                    .find(|l| probs[q][l.index()] > 0.0)
                    .unwrap();
            }
            out.push(LabelRecord {
                tweet: format!("{}-{i}", county.as_str()),
                day: config.start + Days::new(d),
                area: areas[a].clone(),
                question: questions[q].clone(),
                label,
            });
        }
        out
    });
    Ok(per_county.into_iter().flatten().collect())
}

/// Ties an observed model variable to the question whose labels carry it.
/// `sign` is −1 for derived indicators stored as a negated question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionTarget {
    pub observed: String,
    pub question: String,
    pub sign: f64,
}

/// Per-county label probabilities that make each question's expected
/// indicator value track a model variable.
///
/// For county c and target t, m = clamp(sign·y / (4·σ), −0.95, 0.95) where
/// σ is the population standard deviation of the variable. The label
/// distribution is (1 − r, r(1 − m)/2, 0, r(1 + m)/2) with r =
/// [`RELATED_SHARE`], whose related-only mean is exactly m.
pub fn sem_label_targets(
    obs: &Observations,
    targets: &[QuestionTarget],
) -> Result<Vec<Vec<LabelProbabilities>>, SynthError> {
    let cols: Vec<(usize, f64, f64)> = targets
        .iter()
        .map(|t| {
            let a = obs
                .names
                .iter()
                .position(|n| *n == t.observed)
                .ok_or_else(|| SynthError::Config(format!("no observed variable {}", t.observed)))?;
            let sd = obs.population[(a, a)].sqrt();
            if !(sd > 0.0) || !(t.sign == 1.0 || t.sign == -1.0) {
                return Err(SynthError::Config(format!("bad target {}", t.observed)));
            }
            Ok((a, t.sign, sd))
        })
        .collect::<Result<_, _>>()?;
    let r = RELATED_SHARE;
    Ok(obs
        .rows
        .iter()
        .map(|row| {
            cols.iter()
                .map(|&(a, sign, sd)| {
                    let m = (sign * row[a] / (4.0 * sd)).clamp(-0.95, 0.95);
                    [1.0 - r, r * (1.0 - m) / 2.0, 0.0, r * (1.0 + m) / 2.0]
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_distribution() {
        let mut cfg = LabelSynthConfig::uniform(1, 4, &["happiness", "hope"], 50);
        for q in &mut cfg.questions {
            q.probabilities = [0.0, 0.0, 0.0, 1.0];
        }
        let recs = generate_labels(&cfg).unwrap();
        assert_eq!(recs.len(), 4 * 2 * 50);
        assert!(recs.iter().all(|r| r.label == Label::High));
    }

    #[test]
    fn deterministic() {
        let cfg = LabelSynthConfig::uniform(42, 5, &["happiness"], 100);
        assert_eq!(generate_labels(&cfg).unwrap(), generate_labels(&cfg).unwrap());
        let other = LabelSynthConfig { seed: 43, ..cfg.clone() };
        assert_ne!(generate_labels(&cfg).unwrap(), generate_labels(&other).unwrap());
    }

    #[test]
    fn frequencies_converge() {
        let cfg = LabelSynthConfig::uniform(9, 100, &["happiness"], 1000);
        let recs = generate_labels(&cfg).unwrap();
        assert_eq!(recs.len(), 100_000);
        let mut counts = [0usize; 4];
        for r in &recs {
            counts[r.label.index()] += 1;
        }
        for c in counts {
            let f = c as f64 / recs.len() as f64;
            assert!((f - 0.25).abs() < 0.01, "{f}");
        }
    }

    #[test]
    fn bad_probabilities_rejected() {
        let mut cfg = LabelSynthConfig::uniform(1, 1, &["happiness"], 1);
        cfg.questions[0].probabilities = [0.5, 0.5, 0.1, 0.0];
        assert!(matches!(generate_labels(&cfg), Err(SynthError::Probabilities(_))));
        cfg.questions[0].probabilities = [1.5, -0.5, 0.0, 0.0];
        assert!(generate_labels(&cfg).is_err());
    }

    #[test]
    fn ids_are_valid_and_days_in_range() {
        let cfg = LabelSynthConfig::uniform(3, 650, &["hope"], 2);
        let recs = generate_labels(&cfg).unwrap();
        let last = cfg.start + Days::new(cfg.days as u64 - 1);
        assert!(recs.iter().all(|r| r.day >= cfg.start && r.day <= last));
        assert_eq!(recs.last().unwrap().area.county(), &county_fips(649));
    }
}
