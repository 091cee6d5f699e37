use anyhow::{bail, Context, Result};
use hfsem::datamodel::{ingest_labels, IngestOptions};
use hfsem::indicators::{build_indicators, monthly_periods, write_indicators};

use super::{open, Status};
use crate::config::{require, Periods, RunConfig};
use crate::report::Run;

pub fn aggregate(run: &mut Run, cfg: &RunConfig) -> Result<Status> {
    let labels = require(&cfg.inputs.labels, "labels")?.clone();
    run.input(&labels)?;
    let (dictionary, dict_path) = cfg.dictionary()?;
    if let Some(p) = dict_path {
        run.input(&p)?;
    }
    let window = cfg.window()?;
    let options = IngestOptions {
        window,
        questions: Some(dictionary.questions()),
        unknown_questions: cfg.aggregate.unknown_questions,
    };
    let ingest = ingest_labels(open(&labels)?, &options).with_context(|| format!("reading {}", labels.display()))?;
    let r = &ingest.report;
    run.count("rows_read", r.rows_read);
    run.count("accepted", r.accepted);
    run.count("out_of_window", r.out_of_window);
    run.count("unknown_question_skipped", r.unknown_question_skipped);
    run.count("row_errors", r.errors.len());
    if !r.errors.is_empty() {
        run.detail("row_errors", &r.errors);
        let first = &r.errors[0];
        bail!(
            "{} invalid label rows (first at line {}: {}); see the run report",
            r.errors.len(),
            first.line,
            first.message
        );
    }
    if r.empty_input {
        run.warn("label input is empty; writing an empty indicator table");
    }
    if r.unknown_question_skipped > 0 {
        run.warn(format!(
            "skipped {} rows with questions not in the dictionary",
            r.unknown_question_skipped
        ));
    }

    let scheme = cfg.aggregate.recoding;
    let threshold = cfg.aggregate.variance_threshold;
    let build = build_indicators(&ingest.records, &scheme, window, &dictionary, threshold)?;
    write_indicators(&build.matrix, run.create("indicators.csv")?)?;
    run.output("indicators.csv")?;
    run.count("counties", build.matrix.counties().len());
    run.count("indicators", build.matrix.columns().len());
    run.count("daily_cells", build.summary.daily_cells);
    if !build.summary.low_variance.is_empty() {
        run.warn(format!(
            "dropped low-variance indicators: {}",
            build.summary.low_variance.join(", ")
        ));
    }
    run.detail("dropped", &build.summary);

    if cfg.aggregate.periods == Periods::Monthly {
        let mut written = 0;
        for period in monthly_periods(window) {
            let b = build_indicators(&ingest.records, &scheme, period, &dictionary, threshold)?;
            if b.matrix.is_empty() {
                continue;
            }
            let name = format!("indicators/{}.csv", period.start.format("%Y-%m"));
            write_indicators(&b.matrix, run.create(&name)?)?;
            run.output(&name)?;
            written += 1;
        }
        run.count("monthly_tables", written);
    }
    Ok(Status::Ok)
}
