//! Declarative experiment runs.
//!
//! [`load_config`] turns a TOML file into an [`ExperimentConfig`]; [`run`]
//! dispatches it to the owning module, writes CSV/JSON outputs into the
//! configured directory and finishes with `report.json`. A directory holding
//! a report therefore holds a complete output set, and a failed run leaves
//! nothing it created behind.
//!
//! Data files depend only on the config and its seed. The report adds the
//! wall time, so it is the one file that differs between identical runs.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

pub use config::*;
pub use output::{Cell, OutputSet};

use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub overrides: Vec<String>,
    pub wall_time_s: f64,
    pub manifest: Vec<String>,
    pub metrics: serde_json::Map<String, serde_json::Value>,
    #[serde(skip)]
    pub report_path: PathBuf,
}

pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let wrap = |e: Error| Error::Experiment { context: config.experiment.tag().to_string(), source: Box::new(e) };
    let mut out = OutputSet::create(&config.output_dir).map_err(wrap)?;
    let seed = config.rng_seed;
    let need_seed = || seed.ok_or_else(|| Error::Config(vec!["missing key 'rng_seed'".into()]));
    let metrics = match &config.params {
        Params::NlsRun(p) => experiments::nls_run(p, &mut out),
        Params::DerrickScan(p) => experiments::derrick_scan(p, &mut out),
        Params::SnGround(p) => experiments::sn_ground(p, &mut out),
        Params::SnRun(p) => experiments::sn_run(p, &mut out),
        Params::Relaxation(p) => need_seed().and_then(|s| experiments::relaxation(p, s, &mut out)),
        Params::Branch(p) => need_seed().and_then(|s| experiments::branch(p, s, &mut out)),
        Params::SignalingScan(p) => experiments::signaling_scan(p, seed, &mut out),
        Params::Resonance(p) => experiments::resonance(p, &mut out),
    }
    .map_err(wrap)?;

    let mut report = RunReport {
        experiment: config.experiment,
        config: config.clone(),
        overrides: config.overrides.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        manifest: out.manifest(),
        metrics,
        report_path: PathBuf::new(),
    };
    let value = serde_json::to_value(&report).map_err(|e| wrap(e.into()))?;
    report.report_path = out.commit(&value).map_err(wrap)?;
    log::info!("{} finished in {:.2} s; outputs in {}", config.experiment, report.wall_time_s, config.output_dir.display());
    Ok(report)
}
