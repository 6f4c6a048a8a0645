//! Service chain requests, deployment plans and their resource accounting.

mod accounting;
mod lbi;

use std::fmt;

use thiserror::Error;

use crate::topology::{NodeId, Path};

pub use accounting::{
    apply_plan, check_feasibility, end_to_end_delay, release_plan, Footprint, Violation,
};
pub use lbi::{composite_objective, compute_lbi, LoadBalanceIndicators, ObjectiveWeights};

const CATALOG: [&str; 8] = ["FW", "DPI", "NAT", "IDS", "LB", "PROXY", "CACHE", "WANOPT"];

/// Network function type, an index into the VNF catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VnfKind(pub u16);

impl VnfKind {
    pub const CATALOG_SIZE: usize = CATALOG.len();

    pub fn label(&self) -> String {
        CATALOG.get(self.0 as usize).map_or_else(|| format!("VNF{}", self.0), |s| s.to_string())
    }
}

impl fmt::Display for VnfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceChainRequest {
    pub id: u64,
    pub ingress: NodeId,
    pub egress: NodeId,
    pub vnf_sequence: Vec<VnfKind>,
    /// Cycles of work per stage.
    pub cpu_demand: f64,
    /// Bytes.
    pub data_size: f64,
    /// Bits/s.
    pub bandwidth_demand: f64,
    /// Seconds.
    pub delay_bound: f64,
}

impl ServiceChainRequest {
    pub fn chain_len(&self) -> usize {
        self.vnf_sequence.len()
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        let bad = |m: String| Err(ChainError::InvalidRequest(m));
        if self.vnf_sequence.is_empty() {
            return bad("empty VNF sequence".into());
        }
        if self.ingress == self.egress {
            return bad(format!("ingress and egress are both {}", self.ingress));
        }
        for (name, v) in [
            ("cpu_demand", self.cpu_demand),
            ("data_size", self.data_size),
            ("bandwidth_demand", self.bandwidth_demand),
            ("delay_bound", self.delay_bound),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

/// One VNF instance of a chain stage. `stage` is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct VnfInstance {
    pub chain_id: u64,
    pub stage: usize,
    pub instance: usize,
    pub host: NodeId,
    /// Fraction of the stage's work and traffic handled by this instance.
    pub share: f64,
    /// Cycles/s reserved on the host.
    pub allocated_cpu: f64,
}

/// Per stage boundary flow fractions. Boundary `b` joins stage `b` to stage
/// `b + 1`, where stage 0 is the ingress and stage `M + 1` the egress (each a
/// single pseudo-instance). Entry `[b][j][k]` is the fraction of the chain's
/// total traffic sent from instance `j` to instance `k`; each boundary sums to 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SplitRatios {
    pub boundaries: Vec<Vec<Vec<f64>>>,
}

impl SplitRatios {
    pub fn get(&self, boundary: usize, from: usize, to: usize) -> f64 {
        self.boundaries[boundary][from][to]
    }
}

/// A routed sub-flow between two instances of adjacent stages. A pair may be
/// carried by several routes.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub boundary: usize,
    pub from: usize,
    pub to: usize,
    pub path: Path,
    /// Bits/s.
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentPlan {
    pub chain_id: u64,
    /// `stages[m - 1]` holds the instances of stage `m`.
    pub stages: Vec<Vec<VnfInstance>>,
    pub splits: SplitRatios,
    pub routes: Vec<Route>,
}

impl DeploymentPlan {
    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// Number of (pseudo-)instances at a stage index in `0..=M+1`.
    pub fn width(&self, stage: usize) -> usize {
        if stage == 0 || stage == self.stages.len() + 1 {
            1
        } else {
            self.stages[stage - 1].len()
        }
    }

    /// Host of instance `idx` at stage index `stage` in `0..=M+1`.
    pub fn host(&self, req: &ServiceChainRequest, stage: usize, idx: usize) -> NodeId {
        if stage == 0 {
            req.ingress
        } else if stage == self.stages.len() + 1 {
            req.egress
        } else {
            self.stages[stage - 1][idx].host
        }
    }

    pub fn instances(&self) -> impl Iterator<Item = &VnfInstance> + '_ {
        self.stages.iter().flatten()
    }

    pub fn routes_between(
        &self,
        boundary: usize,
        from: usize,
        to: usize,
    ) -> impl Iterator<Item = &Route> + '_ {
        self.routes.iter().filter(move |r| r.boundary == boundary && r.from == from && r.to == to)
    }

    /// Total bandwidth routed across a stage boundary.
    pub fn boundary_bandwidth(&self, boundary: usize) -> f64 {
        self.routes.iter().filter(|r| r.boundary == boundary).map(|r| r.bandwidth).sum()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("malformed plan: {0}")]
    MalformedPlan(String),
    #[error("instance {instance} of stage {stage} has no allocated CPU")]
    ZeroAllocatedCpu { stage: usize, instance: usize },
    #[error("plan exceeds capacity: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Infeasible(Vec<Violation>),
    #[error("plan was not applied: {0}")]
    NotApplied(String),
}
