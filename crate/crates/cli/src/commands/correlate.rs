use anyhow::Result;
use hfsem::datamodel::{correlate as correlate_tables, write_correlations};

use super::{load_climate, load_indicators, Status};
use crate::config::RunConfig;
use crate::report::Run;

pub fn correlate(run: &mut Run, cfg: &RunConfig) -> Result<Status> {
    let indicators = load_indicators(run, cfg)?;
    let climate = load_climate(run, cfg)?;
    let m = correlate_tables(&indicators, &climate)?;
    write_correlations(&m, run.create("correlations.csv")?)?;
    run.output("correlations.csv")?;
    run.count("indicators", m.indicators.len());
    let missing = m.values.iter().flatten().filter(|v| v.is_none()).count();
    run.count("missing_cells", missing);
    if missing > 0 {
        run.warn(format!("{missing} correlations undefined (too few pairs or constant column)"));
    }
    Ok(Status::Ok)
}
