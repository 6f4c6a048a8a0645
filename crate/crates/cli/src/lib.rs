//! Experiment runner: reads a flat config file, sweeps the configured
//! algorithms and seeds, and writes CSV tables and optional SVG figures.

pub mod config;
pub mod output;
pub mod plot;

use std::io;
use std::path::PathBuf;

use chainsim_core::simulator::{sweep, SimulationResult};
use chainsim_core::topology::TopologyError;
use thiserror::Error;

pub use config::{parse_config, ConfigError, ExperimentConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("writing output: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug)]
pub struct RunOutput {
    pub results: Vec<SimulationResult>,
    pub files: Vec<PathBuf>,
}

/// Runs the sweep described by `cfg` and writes its outputs.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let results = sweep(&cfg.topology, &cfg.scenario, &cfg.run.algorithms, &cfg.run.seeds, &cfg.placement)?;
    let dir = &cfg.run.out_dir;
    let summary = output::emit_csv(&results, dir, cfg.run.timing)?;
    let mut files = vec![dir.join("results.csv"), dir.join("summary.csv")];
    if cfg.run.plots {
        files.extend(plot::emit_plots(&summary, dir)?);
    }
    Ok(RunOutput { results, files })
}
