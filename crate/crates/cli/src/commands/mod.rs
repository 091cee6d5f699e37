mod aggregate;
mod correlate;
mod fit;
mod scores;
mod simulate;

use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hfsem::datamodel::{ingest_climate, ClimateTable};
use hfsem::indicators::{read_indicators, IndicatorMatrix};

pub use aggregate::aggregate;
pub use correlate::correlate;
pub use fit::{fit, FitArtifact};
pub use scores::scores;
pub use simulate::simulate;

use crate::config::{require, RunConfig};
use crate::report::Run;

/// How a command that ran to completion ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    NotConverged,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn indicators_path(run: &Run, cfg: &RunConfig) -> PathBuf {
    cfg.inputs
        .indicators
        .clone()
        .unwrap_or_else(|| run.output_path("indicators.csv"))
}

fn load_indicators(run: &mut Run, cfg: &RunConfig) -> Result<IndicatorMatrix> {
    let path = indicators_path(run, cfg);
    let path = require(&Some(path), "indicators")?.clone();
    run.input(&path)?;
    read_indicators(open(&path)?, cfg.window()?).with_context(|| format!("reading {}", path.display()))
}

fn load_climate(run: &mut Run, cfg: &RunConfig) -> Result<ClimateTable> {
    let path = require(&cfg.inputs.climate, "climate")?.clone();
    run.input(&path)?;
    ingest_climate(open(&path)?).with_context(|| format!("reading {}", path.display()))
}
