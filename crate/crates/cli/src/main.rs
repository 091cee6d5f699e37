//! `hfsem`: county flourishing indicators and the climate-risk SEM from the
//! command line.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::Status;
use config::RunConfig;
use report::Run;

#[derive(Parser)]
#[command(name = "hfsem", version, about = "Flourishing indicators and climate-risk SEM pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; outputs do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Label stream → county indicator table.
    Aggregate(Common),
    /// Indicator × hazard correlations.
    Correlate(Common),
    /// Fit the structural equation model.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Exit 0 even if the optimizer did not converge.
        #[arg(long)]
        allow_nonconverged: bool,
    },
    /// Per-county latent scores and optional GeoJSON join.
    Scores(Common),
    /// Synthetic labels, hazards and observations from a known model.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Aggregate(_) => "aggregate",
            Command::Correlate(_) => "correlate",
            Command::Fit { .. } => "fit",
            Command::Scores(_) => "scores",
            Command::Simulate { .. } => "simulate",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Aggregate(c) | Command::Correlate(c) | Command::Scores(c) => c,
            Command::Fit { common, .. } | Command::Simulate { common, .. } => common,
        }
    }
}

fn set_threads(n: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out)?;
    Ok((cfg, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.command.common().clone();
    if let Some(n) = common.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = set_threads(n) {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    }
    let (cfg, out) = match load(&common) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let config_json = serde_json::to_value(&cfg).unwrap_or_default();
    let mut run = Run::new(cli.command.name(), out, config_json, common.threads);
    #[cfg(not(feature = "parallel"))]
    if common.threads.is_some() {
        run.warn("built without the parallel feature; --threads has no effect");
    }
    let result = match &cli.command {
        Command::Aggregate(_) => commands::aggregate(&mut run, &cfg),
        Command::Correlate(_) => commands::correlate(&mut run, &cfg),
        Command::Fit {
            allow_nonconverged, ..
        } => commands::fit(&mut run, &cfg, *allow_nonconverged),
        Command::Scores(_) => commands::scores(&mut run, &cfg),
        Command::Simulate { seed, .. } => commands::simulate(&mut run, &cfg, *seed),
    };
    let code = match &result {
        Ok(Status::Ok) => {
            run.report.status = "ok";
            ExitCode::SUCCESS
        }
        Ok(Status::NotConverged) => {
            run.report.status = "not_converged";
            run.report.error = Some("optimizer did not converge".into());
            eprintln!("error: optimizer did not converge; rerun with --allow-nonconverged to accept");
            ExitCode::from(3)
        }
        Err(e) => {
            run.report.status = "failed";
            run.report.error = Some(format!("{e:#}"));
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    };
    match run.write_report() {
        Ok(p) => eprintln!("report: {}", p.display()),
        Err(e) => eprintln!("warning: could not write run report: {e:#}"),
    }
    code
}
