use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScenarioKind {
    DataIntensive,
    UserIntensive,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::DataIntensive => "data_intensive",
            ScenarioKind::UserIntensive => "user_intensive",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "data_intensive" | "data" => Ok(ScenarioKind::DataIntensive),
            "user_intensive" | "user" => Ok(ScenarioKind::UserIntensive),
            other => Err(format!("unknown scenario '{other}'")),
        }
    }
}

/// Workload of one experiment. Ranges are inclusive and sampled uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub chain_len_min: usize,
    pub chain_len_max: usize,
    /// Cycles per stage.
    pub cpu_demand_min: f64,
    pub cpu_demand_max: f64,
    /// Bytes.
    pub data_size_min: f64,
    pub data_size_max: f64,
    /// Seconds over which a request's data must cross each link; sets
    /// `bandwidth_demand = 8 * data_size / transfer_window`.
    pub transfer_window: f64,
    /// Seconds.
    pub delay_bound: f64,
    /// Request counts at which metrics are recorded.
    pub request_counts: Vec<usize>,
    pub rng_seed: u64,
}

impl ScenarioConfig {
    /// Few large flows: 3-5 stages, 0.5-1 Gcycles, 600-1000 MB.
    pub fn data_intensive() -> Self {
        Self {
            kind: ScenarioKind::DataIntensive,
            chain_len_min: 3,
            chain_len_max: 5,
            cpu_demand_min: 0.5e9,
            cpu_demand_max: 1e9,
            data_size_min: 600e6,
            data_size_max: 1000e6,
            transfer_window: 5.0,
            delay_bound: 20.0,
            request_counts: (10..=60).step_by(2).collect(),
            rng_seed: 11,
        }
    }

    /// Many small flows: 3-5 stages, 10-100 Mcycles, 300-800 KB.
    pub fn user_intensive() -> Self {
        Self {
            kind: ScenarioKind::UserIntensive,
            chain_len_min: 3,
            chain_len_max: 5,
            cpu_demand_min: 10e6,
            cpu_demand_max: 100e6,
            data_size_min: 300e3,
            data_size_max: 800e3,
            transfer_window: 0.03,
            delay_bound: 6.0,
            request_counts: (100..=1000).step_by(50).collect(),
            rng_seed: 23,
        }
    }

    pub fn for_kind(kind: ScenarioKind) -> Self {
        match kind {
            ScenarioKind::DataIntensive => Self::data_intensive(),
            ScenarioKind::UserIntensive => Self::user_intensive(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.chain_len_min == 0 || self.chain_len_min > self.chain_len_max {
            return Err("chain length range must be nonempty and start at 1 or more".into());
        }
        for (name, lo, hi) in [
            ("cpu_demand", self.cpu_demand_min, self.cpu_demand_max),
            ("data_size", self.data_size_min, self.data_size_max),
        ] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(format!("{name} range must be positive and nonempty"));
            }
        }
        if !(self.transfer_window > 0.0 && self.transfer_window.is_finite()) {
            return Err("transfer_window must be positive".into());
        }
        if !(self.delay_bound > 0.0) {
            return Err("delay_bound must be positive".into());
        }
        if self.request_counts.is_empty() {
            return Err("request_counts must not be empty".into());
        }
        Ok(())
    }
}
