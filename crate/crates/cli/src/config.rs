//! Flat `section.key = value` experiment files.
//!
//! Blank lines and `#` comments are ignored. Every key must be known, and a
//! key may appear more than once (the last value wins). `scenario.kind` is
//! applied before any other key, so workload overrides always start from that
//! kind's defaults regardless of line order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chainsim_core::placement::{Algorithm, PlacementParams};
use chainsim_core::simulator::{ScenarioConfig, ScenarioKind};
use chainsim_core::solvers::LoadMode;
use chainsim_core::topology::TopologyConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: expected `section.key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {msg}")]
    Value { line: usize, key: String, msg: String },
    #[error("{section}: {msg}")]
    Invalid { section: &'static str, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub plots: bool,
    /// Record real elapsed times in `wall_ms` (otherwise written as 0 so
    /// reruns are byte-identical).
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithms: Algorithm::ALL.to_vec(),
            seeds: (1..=20).collect(),
            out_dir: PathBuf::from("out"),
            plots: false,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub topology: TopologyConfig,
    pub scenario: ScenarioConfig,
    pub placement: PlacementParams,
    pub run: RunConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            topology: TopologyConfig::default(),
            scenario: ScenarioConfig::data_intensive(),
            placement: PlacementParams::default(),
            run: RunConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |section, msg: String| ConfigError::Invalid { section, msg };
        self.topology.validate().map_err(|e| invalid("topology", e.to_string()))?;
        self.scenario.validate().map_err(|e| invalid("scenario", e))?;
        self.placement.validate().map_err(|e| invalid("placement", e))?;
        if self.run.algorithms.is_empty() {
            return Err(invalid("run", "algorithms must not be empty".into()));
        }
        if self.run.seeds.is_empty() {
            return Err(invalid("run", "seeds must not be empty".into()));
        }
        Ok(())
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || !key.contains('.') {
            return Err(ConfigError::Syntax { line });
        }
        entries.push((line, key.to_string(), value.to_string()));
    }

    let mut cfg = ExperimentConfig::default();
    if let Some((line, key, value)) = entries.iter().rev().find(|e| e.1 == "scenario.kind") {
        let kind: ScenarioKind = parse(*line, key, value)?;
        cfg.scenario = ScenarioConfig::for_kind(kind);
    }
    for (line, key, value) in &entries {
        apply(&mut cfg, *line, key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::Value { line, key: key.to_string(), msg: e.to_string() })
}

fn value_err(line: usize, key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Value { line, key: key.to_string(), msg: msg.into() }
}

fn parse_list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse(line, key, s)).collect()
}

/// `a..b` or `a..b:step` (both ends inclusive), or a comma list.
fn parse_range(line: usize, key: &str, value: &str) -> Result<Vec<u64>, ConfigError> {
    let Some((lo, rest)) = value.split_once("..") else {
        return parse_list(line, key, value);
    };
    let (hi, step) = match rest.split_once(':') {
        Some((hi, step)) => (hi, parse::<u64>(line, key, step.trim())?),
        None => (rest, 1),
    };
    let lo: u64 = parse(line, key, lo.trim())?;
    let hi: u64 = parse(line, key, hi.trim())?;
    if step == 0 || lo > hi {
        return Err(value_err(line, key, "range must be `low..high[:step]` with low <= high and step >= 1"));
    }
    Ok((lo..=hi).step_by(step as usize).collect())
}

fn parse_load_mode(line: usize, key: &str, value: &str) -> Result<LoadMode, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "utilization" => Ok(LoadMode::Utilization),
        "absolute" => Ok(LoadMode::Absolute),
        _ => Err(value_err(line, key, "expected `utilization` or `absolute`")),
    }
}

fn load_mode_name(mode: LoadMode) -> &'static str {
    match mode {
        LoadMode::Utilization => "utilization",
        LoadMode::Absolute => "absolute",
    }
}

fn apply(cfg: &mut ExperimentConfig, line: usize, key: &str, v: &str) -> Result<(), ConfigError> {
    let t = &mut cfg.topology;
    let s = &mut cfg.scenario;
    let p = &mut cfg.placement;
    let r = &mut cfg.run;
    match key {
        "topology.ecn_count" => t.ecn_count = parse(line, key, v)?,
        "topology.tree_depth" => t.tree_depth = parse(line, key, v)?,
        "topology.tree_fanout" => t.tree_fanout = parse(line, key, v)?,
        "topology.star_leaves_per_hub" => t.star_leaves_per_hub = parse(line, key, v)?,
        "topology.optical_bandwidth" => t.optical_bandwidth = parse(line, key, v)?,
        "topology.wireless_bandwidth" => t.wireless_bandwidth = parse(line, key, v)?,
        "topology.wireless_channels" => t.wireless_channels = parse(line, key, v)?,
        "topology.compute_capacity_mean" => t.compute_capacity_mean = parse(line, key, v)?,
        "topology.compute_capacity_spread" => t.compute_capacity_spread = parse(line, key, v)?,
        "topology.switch_capacity" => t.switch_capacity = parse(line, key, v)?,
        "topology.optical_prop_delay" => t.optical_prop_delay = parse(line, key, v)?,
        "topology.wireless_prop_delay" => t.wireless_prop_delay = parse(line, key, v)?,
        "topology.ecn_ring" => t.ecn_ring = parse(line, key, v)?,
        "topology.rng_seed" => t.rng_seed = parse(line, key, v)?,

        "scenario.kind" => {}
        "scenario.chain_len_min" => s.chain_len_min = parse(line, key, v)?,
        "scenario.chain_len_max" => s.chain_len_max = parse(line, key, v)?,
        "scenario.cpu_demand_min" => s.cpu_demand_min = parse(line, key, v)?,
        "scenario.cpu_demand_max" => s.cpu_demand_max = parse(line, key, v)?,
        "scenario.data_size_min" => s.data_size_min = parse(line, key, v)?,
        "scenario.data_size_max" => s.data_size_max = parse(line, key, v)?,
        "scenario.transfer_window" => s.transfer_window = parse(line, key, v)?,
        "scenario.delay_bound" => s.delay_bound = parse(line, key, v)?,
        "scenario.request_counts" => {
            s.request_counts = parse_range(line, key, v)?.into_iter().map(|n| n as usize).collect()
        }
        "scenario.rng_seed" => s.rng_seed = parse(line, key, v)?,

        "placement.max_paths" => p.max_paths = parse(line, key, v)?,
        "placement.candidate_pool_size" => p.candidate_pool_size = parse(line, key, v)?,
        "placement.alpha" => p.weights.alpha = parse(line, key, v)?,
        "placement.beta" => p.weights.beta = parse(line, key, v)?,
        "placement.gamma" => p.weights.gamma = parse(line, key, v)?,
        "placement.bisection_tol" => p.bisection_tol = parse(line, key, v)?,
        "placement.load_mode" => p.load_mode = parse_load_mode(line, key, v)?,
        "placement.processing_window" => p.processing_window = parse(line, key, v)?,
        "placement.ilps_exact_limit" => p.ilps_exact_limit = parse(line, key, v)?,
        "placement.ilps_beam_width" => p.ilps_beam_width = parse(line, key, v)?,

        "run.algorithms" => r.algorithms = parse_list(line, key, v)?,
        "run.seeds" => r.seeds = parse_range(line, key, v)?,
        "run.out_dir" => r.out_dir = PathBuf::from(v),
        "run.plots" => r.plots = parse(line, key, v)?,
        "run.timing" => r.timing = parse(line, key, v)?,
        _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
    }
    Ok(())
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Every key with its default value, as a valid config file.
pub fn defaults_text() -> String {
    let cfg = ExperimentConfig::default();
    let (t, s, p, r) = (&cfg.topology, &cfg.scenario, &cfg.placement, &cfg.run);
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    put("topology.ecn_count", t.ecn_count.to_string());
    put("topology.tree_depth", t.tree_depth.to_string());
    put("topology.tree_fanout", t.tree_fanout.to_string());
    put("topology.star_leaves_per_hub", t.star_leaves_per_hub.to_string());
    put("topology.optical_bandwidth", format!("{:e}", t.optical_bandwidth));
    put("topology.wireless_bandwidth", format!("{:e}", t.wireless_bandwidth));
    put("topology.wireless_channels", t.wireless_channels.to_string());
    put("topology.compute_capacity_mean", format!("{:e}", t.compute_capacity_mean));
    put("topology.compute_capacity_spread", format!("{:e}", t.compute_capacity_spread));
    put("topology.switch_capacity", t.switch_capacity.to_string());
    put("topology.optical_prop_delay", t.optical_prop_delay.to_string());
    put("topology.wireless_prop_delay", t.wireless_prop_delay.to_string());
    put("topology.ecn_ring", t.ecn_ring.to_string());
    put("topology.rng_seed", t.rng_seed.to_string());

    put("scenario.kind", s.kind.to_string());
    put("scenario.chain_len_min", s.chain_len_min.to_string());
    put("scenario.chain_len_max", s.chain_len_max.to_string());
    put("scenario.cpu_demand_min", format!("{:e}", s.cpu_demand_min));
    put("scenario.cpu_demand_max", format!("{:e}", s.cpu_demand_max));
    put("scenario.data_size_min", format!("{:e}", s.data_size_min));
    put("scenario.data_size_max", format!("{:e}", s.data_size_max));
    put("scenario.transfer_window", s.transfer_window.to_string());
    put("scenario.delay_bound", s.delay_bound.to_string());
    put("scenario.request_counts", join(&s.request_counts));
    put("scenario.rng_seed", s.rng_seed.to_string());

    put("placement.max_paths", p.max_paths.to_string());
    put("placement.candidate_pool_size", p.candidate_pool_size.to_string());
    put("placement.alpha", p.weights.alpha.to_string());
    put("placement.beta", p.weights.beta.to_string());
    put("placement.gamma", p.weights.gamma.to_string());
    put("placement.bisection_tol", format!("{:e}", p.bisection_tol));
    put("placement.load_mode", load_mode_name(p.load_mode).to_string());
    put("placement.processing_window", p.processing_window.to_string());
    put("placement.ilps_exact_limit", p.ilps_exact_limit.to_string());
    put("placement.ilps_beam_width", p.ilps_beam_width.to_string());

    put("run.algorithms", join(&r.algorithms));
    put("run.seeds", format!("{}..{}", r.seeds[0], r.seeds[r.seeds.len() - 1]));
    put("run.out_dir", r.out_dir.display().to_string());
    put("run.plots", r.plots.to_string());
    put("run.timing", r.timing.to_string());
    out
}
