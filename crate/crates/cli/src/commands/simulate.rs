use std::collections::HashSet;

use anyhow::{bail, Context, Result};
use hfsem::datamodel::{write_climate, write_labels, CountyId, Hazard};
use hfsem::sem::{standardize, ObservedTable, ParameterVector, StandardizedSolution};
use hfsem::synth::{
    climate_from_scores, county_fips, generate_labels_with, generate_observations, sem_label_targets,
    sign_pattern_truth, LabelSynthConfig, QuestionProbabilities, QuestionTarget,
};
use serde::Serialize;

use super::Status;
use crate::config::RunConfig;
use crate::report::Run;

/// Label streams start here so they never share a stream with a case.
const LABEL_STREAM_BASE: u64 = 1 << 32;

#[derive(Serialize)]
struct Truth<'a> {
    seed: u64,
    model: String,
    counties: usize,
    parameters: &'a ParameterVector,
    standardized: &'a StandardizedSolution,
    targets: &'a [QuestionTarget],
}

pub fn simulate(run: &mut Run, cfg: &RunConfig, seed: Option<u64>) -> Result<Status> {
    let Some(seed) = seed.or(cfg.simulate.seed) else {
        bail!("simulate needs a seed: pass --seed or set simulate.seed");
    };
    let sim = &cfg.simulate;
    let (spec, _, model_path) = cfg.model()?;
    if let Some(p) = model_path {
        run.input(&p)?;
    }
    let (dictionary, dict_path) = cfg.dictionary()?;
    if let Some(p) = dict_path {
        run.input(&p)?;
    }
    for name in &sim.positive {
        if !spec.endogenous().iter().any(|l| &l.name == name) {
            bail!("simulate.positive names {name}, which is not an endogenous latent");
        }
    }
    let positive: Vec<&str> = sim.positive.iter().map(String::as_str).collect();
    let truth = sign_pattern_truth(&spec, &positive);
    let obs = generate_observations(&spec, &truth, sim.counties, seed)?;
    let counties: Vec<CountyId> = (0..sim.counties).map(county_fips).collect();

    let mut targets = Vec::new();
    let mut used = HashSet::new();
    for name in spec.observed() {
        if Hazard::from_name(name).is_some() {
            continue;
        }
        let entry = dictionary
            .entries()
            .iter()
            .find(|e| &e.key == name)
            .with_context(|| format!("model variable {name} is not in the indicator dictionary"))?;
        let (question, sign) = match &entry.derived_from {
            Some(src) => (src.clone(), -1.0),
            None => (entry.key.clone(), 1.0),
        };
        if !used.insert(question.clone()) {
            bail!("question {question} would carry two model variables");
        }
        targets.push(QuestionTarget {
            observed: name.clone(),
            question,
            sign,
        });
    }
    let probabilities = sem_label_targets(&obs, &targets)?;
    let label_cfg = LabelSynthConfig {
        seed,
        counties: sim.counties,
        areas_per_county: sim.areas_per_county,
        start: sim.start,
        days: sim.days,
        records_per_question: sim.records_per_question,
        questions: targets
            .iter()
            .map(|t| QuestionProbabilities {
                question: t.question.clone(),
                probabilities: [0.25; 4],
            })
            .collect(),
        first_stream: LABEL_STREAM_BASE,
    };
    let records = generate_labels_with(&label_cfg, |c, q| probabilities[c][q])?;

    write_labels(&records, run.create("labels.csv")?)?;
    write_climate(&climate_from_scores(&counties, &obs)?, run.create("climate.csv")?)?;
    let table = ObservedTable {
        names: obs.names.clone(),
        counties,
        rows: obs.rows.iter().map(|r| r.iter().map(|v| Some(*v)).collect()).collect(),
    };
    table.write_csv(run.create("observations.csv")?)?;
    let standardized = standardize(&spec, &truth)?;
    let manifest = Truth {
        seed,
        model: spec.to_text(),
        counties: sim.counties,
        parameters: &truth,
        standardized: &standardized,
        targets: &targets,
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    std::fs::write(run.output_path("truth.json"), json)?;
    for name in ["labels.csv", "climate.csv", "observations.csv", "truth.json"] {
        run.output(name)?;
    }
    run.count("counties", sim.counties);
    run.count("label_records", records.len());
    run.count("observed", spec.n_observed());
    run.detail("seed", seed);
    Ok(Status::Ok)
}
