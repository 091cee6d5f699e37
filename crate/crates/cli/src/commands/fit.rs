use anyhow::{Context, Result};
use hfsem::sem::{fit as fit_model, render_table, FitResult, ObservedTable, SampleMoments};
use serde::{Deserialize, Serialize};

use super::{load_climate, load_indicators, Status};
use crate::config::RunConfig;
use crate::report::Run;

/// Everything `scores` needs from a fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitArtifact {
    /// Model spec text the fit used.
    pub model: String,
    /// The fit was on the correlation matrix.
    pub correlation: bool,
    /// Counties dropped listwise before computing moments.
    pub excluded: Vec<String>,
    pub result: FitResult,
}

pub fn fit(run: &mut Run, cfg: &RunConfig, allow_nonconverged: bool) -> Result<Status> {
    let indicators = load_indicators(run, cfg)?;
    let climate = load_climate(run, cfg)?;
    let (spec, _, model_path) = cfg.model()?;
    if let Some(p) = model_path {
        run.input(&p)?;
    }
    let table = ObservedTable::assemble(&indicators, &climate, spec.observed())?;
    let (sample, excluded) = SampleMoments::from_table(&table).context("computing sample moments")?;
    if !excluded.is_empty() {
        run.warn(format!(
            "{} counties with missing model variables dropped listwise",
            excluded.len()
        ));
    }
    let sample = if cfg.fit.correlation {
        sample.to_correlation()
    } else {
        sample
    };
    let result = fit_model(&spec, &sample, &cfg.fit.options())?;
    for w in &result.warnings {
        run.warn(w.clone());
    }
    run.count("cases", sample.n());
    run.count("observed", spec.n_observed());
    run.count("free_parameters", spec.n_free());
    run.count("df", result.statistics.df);
    run.count("iterations", result.convergence.iterations);
    run.count("excluded_counties", excluded.len());
    run.detail("converged", result.convergence.converged);
    run.detail("chi_square", result.statistics.chi_square);

    let converged = result.convergence.converged;
    let artifact = FitArtifact {
        model: spec.to_text(),
        correlation: cfg.fit.correlation,
        excluded: excluded.iter().map(|c| c.to_string()).collect(),
        result,
    };
    std::fs::write(run.output_path("fit.txt"), render_table(&artifact.result))?;
    let mut json = serde_json::to_string_pretty(&artifact)?;
    json.push('\n');
    std::fs::write(run.output_path("fit.json"), json)?;
    run.output("fit.json")?;
    run.output("fit.txt")?;

    if converged {
        Ok(Status::Ok)
    } else if allow_nonconverged {
        run.warn("continuing with a non-converged fit (--allow-nonconverged)");
        Ok(Status::Ok)
    } else {
        Ok(Status::NotConverged)
    }
}
