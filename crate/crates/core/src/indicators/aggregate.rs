use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};

use super::{IndicatorColumn, IndicatorError, IndicatorMatrix, RecodingScheme};
use crate::datamodel::{CensusAreaId, CountyId, DateWindow, Label, LabelRecord, QuestionId};
use crate::par;

/// Records per shard in the map phase.
const SHARD: usize = 1 << 14;

type CellKey = (CensusAreaId, NaiveDate, QuestionId);

/// Recoded sum for one census area, day and question.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyAreaCell {
    pub area: CensusAreaId,
    pub day: NaiveDate,
    pub question: QuestionId,
    pub sum: f64,
    /// Records with a label other than `not_present`.
    pub related_count: u64,
}

/// Daily cells keyed by `(area, day, question)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DailyCells {
    cells: BTreeMap<CellKey, DailyAreaCell>,
}

impl DailyCells {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DailyAreaCell> {
        self.cells.values()
    }

    pub fn get(&self, area: &CensusAreaId, day: NaiveDate, question: &QuestionId) -> Option<&DailyAreaCell> {
        self.cells.get(&(area.clone(), day, question.clone()))
    }

    /// Adds a cell, combining with any existing cell under the same key.
    pub fn insert(&mut self, cell: DailyAreaCell) {
        let key = (cell.area.clone(), cell.day, cell.question.clone());
        match self.cells.get_mut(&key) {
            Some(existing) => {
                existing.sum += cell.sum;
                existing.related_count += cell.related_count;
            }
            None => {
                self.cells.insert(key, cell);
            }
        }
    }

    /// Cell-wise combination of two disjoint shards.
    pub fn merge(mut self, other: DailyCells) -> DailyCells {
        for cell in other.cells.into_values() {
            self.insert(cell);
        }
        self
    }
}

impl FromIterator<DailyAreaCell> for DailyCells {
    fn from_iter<I: IntoIterator<Item = DailyAreaCell>>(iter: I) -> Self {
        let mut out = DailyCells::default();
        for c in iter {
            out.insert(c);
        }
        out
    }
}

fn count_shard(records: &[LabelRecord]) -> BTreeMap<CellKey, [u64; 4]> {
    let mut acc: BTreeMap<CellKey, [u64; 4]> = BTreeMap::new();
    for r in records {
        let key = (r.area.clone(), r.day, r.question.clone());
        acc.entry(key).or_default()[r.label.index()] += 1;
    }
    acc
}

/// Sum recoded labels per `(area, day, question)`.
///
/// Shards are counted in parallel and merged by integer addition; each
/// cell's sum is then formed once from its label counts.
pub fn aggregate_daily(records: &[LabelRecord], scheme: &RecodingScheme) -> DailyCells {
    let shards = par::map_chunks(records, SHARD, count_shard);
    let mut counts: BTreeMap<CellKey, [u64; 4]> = BTreeMap::new();
    for shard in shards {
        for (key, c) in shard {
            let slot = counts.entry(key).or_default();
            for (a, b) in slot.iter_mut().zip(c) {
                *a += b;
            }
        }
    }
    let cells = counts
        .into_iter()
        .map(|(key, c)| {
            let mut sum = 0.0;
            let mut related = 0;
            for label in Label::ALL {
                let n = c[label.index()];
                if n == 0 {
                    continue;
                }
                sum += n as f64 * scheme.score(label);
                if label != Label::NotPresent {
                    related += n;
                }
            }
            let (area, day, question) = key.clone();
            (
                key,
                DailyAreaCell {
                    area,
                    day,
                    question,
                    sum,
                    related_count: related,
                },
            )
        })
        .collect();
    DailyCells { cells }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CountySum {
    pub sum: f64,
    pub support: u64,
}

/// Raw county × question sums for one period.
#[derive(Debug, Clone, PartialEq)]
pub struct CountySums {
    pub period: DateWindow,
    pub entries: BTreeMap<(CountyId, QuestionId), CountySum>,
}

/// Roll daily cells up to counties, keeping only days inside `period`.
/// Cells are visited in key order, so the floating-point sum is independent
/// of how the cells were produced.
pub fn aggregate_county(cells: &DailyCells, period: DateWindow) -> CountySums {
    let mut entries: BTreeMap<(CountyId, QuestionId), CountySum> = BTreeMap::new();
    for cell in cells.iter().filter(|c| period.contains(c.day)) {
        let slot = entries
            .entry((cell.area.county().clone(), cell.question.clone()))
            .or_default();
        slot.sum += cell.sum;
        slot.support += cell.related_count;
    }
    CountySums { period, entries }
}

/// Divide each county sum by its support. Zero-support cells stay missing.
pub fn normalize(sums: &CountySums) -> Result<IndicatorMatrix, IndicatorError> {
    let mut counties: Vec<CountyId> = sums.entries.keys().map(|(c, _)| c.clone()).collect();
    counties.dedup();
    let mut questions: Vec<QuestionId> = sums.entries.keys().map(|(_, q)| q.clone()).collect();
    questions.sort();
    questions.dedup();

    let columns = questions
        .iter()
        .map(|q| {
            let mut values = Vec::with_capacity(counties.len());
            let mut support = Vec::with_capacity(counties.len());
            for c in &counties {
                let cell = sums
                    .entries
                    .get(&(c.clone(), q.clone()))
                    .copied()
                    .unwrap_or_default();
                support.push(cell.support);
                values.push((cell.support > 0).then(|| cell.sum / cell.support as f64));
            }
            IndicatorColumn::new(q.as_str(), values, support)
        })
        .collect::<Result<Vec<_>, _>>()?;
    IndicatorMatrix::new(sums.period, counties, columns)
}

/// Calendar months covering `window`, clipped to its ends.
pub fn monthly_periods(window: DateWindow) -> Vec<DateWindow> {
    let mut out = Vec::new();
    let mut start = window.start;
    while start <= window.end {
        let (y, m) = (start.year(), start.month());
        let next = if m == 12 {
            NaiveDate::from_ymd_opt(y + 1, 1, 1)
        } else {
            NaiveDate::from_ymd_opt(y, m + 1, 1)
        }
        .expect("valid month start");
        let end = next.pred_opt().expect("valid day").min(window.end);
        out.push(DateWindow { start, end });
        start = next;
    }
    out
}
