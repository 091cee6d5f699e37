use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{CensusAreaId, CountyId, DataError, QuestionId};

/// Classification outcome for one tweet and one question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    NotPresent,
    Low,
    Medium,
    High,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::NotPresent, Label::Low, Label::Medium, Label::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::NotPresent => "not_present",
            Label::Low => "low",
            Label::Medium => "medium",
            Label::High => "high",
        }
    }

    /// Position in [`Label::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Label {
    type Err = DataError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "not_present" => Ok(Label::NotPresent),
            "low" => Ok(Label::Low),
            "medium" => Ok(Label::Medium),
            "high" => Ok(Label::High),
            other => Err(DataError::InvalidLabel(other.to_string())),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelRecord {
    pub tweet: String,
    pub day: NaiveDate,
    pub area: CensusAreaId,
    pub question: QuestionId,
    pub label: Label,
}

impl LabelRecord {
    pub fn county(&self) -> &CountyId {
        self.area.county()
    }
}

/// Inclusive calendar-date range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self, DataError> {
        if start > end {
            return Err(DataError::InvalidWindow { start, end });
        }
        Ok(Self { start, end })
    }

    /// January 2013 through June 2023.
    pub fn study() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2013, 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2023, 6, 30).unwrap(),
        }
    }

    pub fn contains(&self, day: NaiveDate) -> bool {
        self.start <= day && day <= self.end
    }
}

impl Default for DateWindow {
    fn default() -> Self {
        Self::study()
    }
}

impl fmt::Display for DateWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// The configured question dictionary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuestionSet(BTreeSet<QuestionId>);

impl QuestionSet {
    pub fn contains(&self, q: &QuestionId) -> bool {
        self.0.contains(q)
    }

    pub fn iter(&self) -> impl Iterator<Item = &QuestionId> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<QuestionId> for QuestionSet {
    fn from_iter<I: IntoIterator<Item = QuestionId>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownQuestionPolicy {
    #[default]
    Skip,
    Reject,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub window: DateWindow,
    /// `None` accepts any well-formed question key.
    pub questions: Option<QuestionSet>,
    pub unknown_questions: UnknownQuestionPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    /// 1-based line number in the source, counting the header.
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: u64,
    pub accepted: u64,
    pub out_of_window: u64,
    pub unknown_question_skipped: u64,
    pub empty_input: bool,
    pub errors: Vec<RowError>,
}

#[derive(Debug, Clone, Default)]
pub struct LabelIngest {
    pub records: Vec<LabelRecord>,
    pub report: IngestReport,
}

const REQUIRED: [&str; 5] = ["tweet_id", "day", "geoid", "question", "label"];

/// Read and validate a comma-separated label stream.
///
/// Malformed rows, out-of-window days and skipped unknown questions are
/// counted in the report. Only an unreadable source, a missing column, or an
/// unknown question under [`UnknownQuestionPolicy::Reject`] abort ingestion.
pub fn ingest_labels<R: Read>(source: R, options: &IngestOptions) -> Result<LabelIngest, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let mut out = LabelIngest::default();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        out.report.empty_input = true;
        return Ok(out);
    }
    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(REQUIRED) {
        *slot = col(name).ok_or_else(|| DataError::MissingColumn(name.to_string()))?;
    }
    let fips_col = col("fips");

    let mut seen: HashSet<(String, QuestionId)> = HashSet::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line = reader.position().line();
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(e) => {
                out.report.rows_read += 1;
                out.report.errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        }
        out.report.rows_read += 1;
        let parsed = parse_row(&record, &idx, fips_col);
        let rec = match parsed {
            Ok(rec) => rec,
            Err(e) => {
                out.report.errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        if let Some(known) = &options.questions {
            if !known.contains(&rec.question) {
                match options.unknown_questions {
                    UnknownQuestionPolicy::Skip => {
                        out.report.unknown_question_skipped += 1;
                        continue;
                    }
                    UnknownQuestionPolicy::Reject => {
                        return Err(DataError::UnknownQuestion {
                            question: rec.question.to_string(),
                            line,
                        })
                    }
                }
            }
        }
        if !options.window.contains(rec.day) {
            out.report.out_of_window += 1;
            continue;
        }
        if !seen.insert((rec.tweet.clone(), rec.question.clone())) {
            out.report.errors.push(RowError {
                line,
                message: format!(
                    "duplicate label for tweet {} and question {}",
                    rec.tweet, rec.question
                ),
            });
            continue;
        }
        out.records.push(rec);
    }
    out.report.accepted = out.records.len() as u64;
    Ok(out)
}

fn parse_row(
    record: &csv::StringRecord,
    idx: &[usize; 5],
    fips_col: Option<usize>,
) -> Result<LabelRecord, DataError> {
    let field = |i: usize| -> Result<&str, DataError> {
        record.get(i).ok_or_else(|| DataError::Malformed {
            line: record.position().map_or(0, |p| p.line()),
            message: format!("expected at least {} fields, found {}", i + 1, record.len()),
        })
    };
    let tweet = field(idx[0])?;
    if tweet.is_empty() {
        return Err(DataError::Malformed {
            line: record.position().map_or(0, |p| p.line()),
            message: "empty tweet_id".into(),
        });
    }
    let day_text = field(idx[1])?;
    let day = NaiveDate::parse_from_str(day_text, "%Y-%m-%d").map_err(|e| DataError::Malformed {
        line: record.position().map_or(0, |p| p.line()),
        message: format!("bad day {day_text:?}: {e}"),
    })?;
    let area = match fips_col {
        Some(c) => CensusAreaId::with_county(field(idx[2])?, &CountyId::new(field(c)?)?)?,
        None => CensusAreaId::new(field(idx[2])?)?,
    };
    Ok(LabelRecord {
        tweet: tweet.to_string(),
        day,
        area,
        question: QuestionId::new(field(idx[3])?)?,
        label: field(idx[4])?.parse()?,
    })
}

/// Write records in the same format [`ingest_labels`] reads.
pub fn write_labels<W: Write>(records: &[LabelRecord], sink: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(REQUIRED)?;
    for r in records {
        let day = r.day.format("%Y-%m-%d").to_string();
        w.write_record([
            r.tweet.as_str(),
            day.as_str(),
            r.area.geoid(),
            r.question.as_str(),
            r.label.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
