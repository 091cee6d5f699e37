use anyhow::{bail, Context, Result};
use hfsem::scoring::{factor_scores, join_geojson, path_order, write_scores};
use hfsem::sem::{ModelSpec, ObservedTable};

use super::{load_climate, load_indicators, open, FitArtifact, Status};
use crate::config::RunConfig;
use crate::report::Run;

/// Standardize each column over the listwise-complete rows (N − 1 divisor),
/// matching the moments of a correlation-matrix fit.
fn standardize_columns(table: &mut ObservedTable) {
    let complete: Vec<usize> = (0..table.rows.len())
        .filter(|&i| table.rows[i].iter().all(|v| v.is_some_and(f64::is_finite)))
        .collect();
    let n = complete.len() as f64;
    if n < 2.0 {
        return;
    }
    for a in 0..table.names.len() {
        let mean = complete.iter().map(|&i| table.rows[i][a].unwrap()).sum::<f64>() / n;
        let var = complete
            .iter()
            .map(|&i| (table.rows[i][a].unwrap() - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        let sd = var.sqrt();
        for row in &mut table.rows {
            row[a] = row[a].map(|v| if sd > 0.0 { (v - mean) / sd } else { 0.0 });
        }
    }
}

pub fn scores(run: &mut Run, cfg: &RunConfig) -> Result<Status> {
    let fit_path = cfg
        .inputs
        .fit
        .clone()
        .unwrap_or_else(|| run.output_path("fit.json"));
    if !fit_path.exists() {
        bail!("fit artifact {} not found; run `hfsem fit` first", fit_path.display());
    }
    run.input(&fit_path)?;
    let artifact: FitArtifact = serde_json::from_reader(std::io::BufReader::new(open(&fit_path)?))
        .with_context(|| format!("reading {}", fit_path.display()))?;
    if !artifact.result.convergence.converged {
        bail!("the fit in {} did not converge; scores need a converged fit", fit_path.display());
    }
    let spec = ModelSpec::parse(&artifact.model).context("model text in fit artifact")?;
    let indicators = load_indicators(run, cfg)?;
    let climate = load_climate(run, cfg)?;
    let mut data = ObservedTable::assemble(&indicators, &climate, spec.observed())?;
    if artifact.correlation {
        standardize_columns(&mut data);
    }
    let table = factor_scores(&spec, &artifact.result, &data, cfg.scores.method)?;
    let table = table.reorder(&path_order(&spec, &artifact.result.standardized));
    write_scores(&table, run.create("scores.csv")?)?;
    run.output("scores.csv")?;
    run.count("scored_counties", table.counties.len());
    run.count("excluded_counties", table.excluded.len());
    run.detail("columns", &table.latents);
    if !table.excluded.is_empty() {
        run.warn(format!("{} counties not scored (missing values)", table.excluded.len()));
    }

    if let Some(geo) = &cfg.inputs.geometry {
        run.input(geo)?;
        let collection: serde_json::Value = serde_json::from_reader(std::io::BufReader::new(open(geo)?))
            .with_context(|| format!("reading {}", geo.display()))?;
        let (joined, report) = join_geojson(collection, &table, &cfg.scores.join_key)?;
        let mut text = serde_json::to_string(&joined)?;
        text.push('\n');
        std::fs::write(run.output_path("scores.geojson"), text)?;
        run.output("scores.geojson")?;
        run.count("geometry_features", report.features);
        run.count("geometry_gaps", report.gaps.len());
        if !report.gaps.is_empty() {
            run.warn(format!("{} geometry features have no scores", report.gaps.len()));
        }
        if !report.unmatched_scores.is_empty() {
            run.warn(format!(
                "{} scored counties have no geometry feature",
                report.unmatched_scores.len()
            ));
        }
        run.detail("join", &report);
    }
    Ok(Status::Ok)
}
