//! Deployment algorithms mapping one chain request onto the current network:
//! GBMP (weight-ranked candidates with min-max splitting), KSMP (k-shortest
//! path costs with min-cost LP splitting), and the ECMP and single-path
//! exhaustive (ILPS) baselines.
//!
//! Every algorithm plans against a private copy of the network, then the
//! finished plan is re-checked with [`check_feasibility`] and applied to the
//! caller's network only if it passes. A rejection never mutates the network.

mod builder;
mod ecmp;
mod gbmp;
mod ilps;
mod ksmp;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::chain::{
    apply_plan, check_feasibility, DeploymentPlan, ObjectiveWeights, ServiceChainRequest, Violation,
};
use crate::solvers::LoadMode;
use crate::topology::{
    betweenness_centrality, hop_distances_from, k_shortest_paths, min_hop_paths, LinkKind, NodeId,
    Path, PhysicalNetwork,
};

/// Headroom kept below every link bandwidth while planning (bits/s); covers
/// rounding of allocations onto the load grid.
pub(crate) const LINK_MARGIN: f64 = 1.0;
/// Same for ECN compute capacity (cycles/s).
pub(crate) const CPU_MARGIN: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementParams {
    /// MP: cap on instances per stage and on paths per instance pair.
    pub max_paths: usize,
    pub weights: ObjectiveWeights,
    pub candidate_pool_size: usize,
    pub bisection_tol: f64,
    pub load_mode: LoadMode,
    /// A stage must process its cycles within this window (s); the reserved
    /// rate is `cpu_demand * share / processing_window`.
    pub processing_window: f64,
    /// ILPS enumerates exhaustively while `ecn_count ^ stages` stays within this.
    pub ilps_exact_limit: u64,
    pub ilps_beam_width: usize,
}

impl Default for PlacementParams {
    fn default() -> Self {
        Self {
            max_paths: 4,
            weights: ObjectiveWeights::default(),
            candidate_pool_size: 4,
            bisection_tol: 1e-9,
            load_mode: LoadMode::Utilization,
            processing_window: 1.0,
            ilps_exact_limit: 759_375,
            ilps_beam_width: 1000,
        }
    }
}

impl PlacementParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_paths == 0 {
            return Err("max_paths must be at least 1".into());
        }
        if self.candidate_pool_size == 0 {
            return Err("candidate_pool_size must be at least 1".into());
        }
        if !self.weights.is_valid() {
            return Err("objective weights must be nonnegative with a positive sum".into());
        }
        if !(self.bisection_tol > 0.0) {
            return Err("bisection_tol must be positive".into());
        }
        if !(self.processing_window > 0.0 && self.processing_window.is_finite()) {
            return Err("processing_window must be positive".into());
        }
        if self.ilps_beam_width == 0 {
            return Err("ilps_beam_width must be at least 1".into());
        }
        Ok(())
    }

    /// Effective candidate set size, never above MP.
    pub fn pool_size(&self) -> usize {
        self.candidate_pool_size.min(self.max_paths).max(1)
    }

    /// Compute rate a whole stage of `req` needs.
    pub fn stage_cpu(&self, req: &ServiceChainRequest) -> f64 {
        req.cpu_demand / self.processing_window
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    NoCapacity,
    NoPath,
    DelayViolation,
    LpInfeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlacementOutcome {
    Accepted(DeploymentPlan),
    Rejected(RejectReason),
}

impl PlacementOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, PlacementOutcome::Accepted(_))
    }

    pub fn plan(&self) -> Option<&DeploymentPlan> {
        match self {
            PlacementOutcome::Accepted(p) => Some(p),
            PlacementOutcome::Rejected(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Gbmp,
    Ksmp,
    Ecmp,
    Ilps,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Gbmp, Algorithm::Ksmp, Algorithm::Ecmp, Algorithm::Ilps];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Gbmp => "gbmp",
            Algorithm::Ksmp => "ksmp",
            Algorithm::Ecmp => "ecmp",
            Algorithm::Ilps => "ilps",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gbmp" => Ok(Algorithm::Gbmp),
            "ksmp" => Ok(Algorithm::Ksmp),
            "ecmp" => Ok(Algorithm::Ecmp),
            "ilps" => Ok(Algorithm::Ilps),
            other => Err(format!("unknown algorithm '{other}'")),
        }
    }
}

/// Static graph measures used for candidate ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyMetrics {
    pub betweenness: Vec<f64>,
    pub degree: Vec<usize>,
    /// All-pairs hop counts (`usize::MAX` when unreachable).
    pub hops: Vec<Vec<usize>>,
    pub diameter: usize,
}

impl TopologyMetrics {
    pub fn of(net: &PhysicalNetwork) -> Self {
        let hops: Vec<Vec<usize>> = (0..net.node_count())
            .map(|s| {
                hop_distances_from(net, NodeId(s))
                    .into_iter()
                    .map(|d| d.unwrap_or(usize::MAX))
                    .collect()
            })
            .collect();
        let diameter =
            hops.iter().flatten().copied().filter(|&d| d != usize::MAX).max().unwrap_or(0);
        Self {
            betweenness: betweenness_centrality(net),
            degree: (0..net.node_count()).map(|n| net.degree(NodeId(n))).collect(),
            hops,
            diameter,
        }
    }
}

/// `(betweenness + degree) * bandwidth_factor / distance_factor`.
pub fn weight_formula(betweenness: f64, degree: f64, bandwidth_factor: f64, distance_factor: f64) -> f64 {
    (betweenness + degree) * bandwidth_factor / distance_factor
}

/// Candidate priority for hosting the next stage after `prev_hosts`: the
/// bandwidth factor is the worst bottleneck residual over the widest
/// min-hop path from any previous host, relative to the largest link
/// bandwidth; the distance factor is the largest hop distance, floored at 1.
pub fn node_weight(net: &PhysicalNetwork, candidate: NodeId, prev_hosts: &[NodeId]) -> f64 {
    let mut cache = PathCache::new(net, 1);
    let metrics = TopologyMetrics::of(net);
    node_weight_with(&metrics, &mut cache, net, candidate, prev_hosts)
}

pub(crate) fn node_weight_with(
    metrics: &TopologyMetrics,
    cache: &mut PathCache,
    net: &PhysicalNetwork,
    candidate: NodeId,
    prev_hosts: &[NodeId],
) -> f64 {
    let max_bw = net.max_link_bandwidth();
    let mut bandwidth_factor = 1.0f64;
    let mut distance = 1usize;
    for &h in prev_hosts {
        if h == candidate {
            continue;
        }
        let widest = cache
            .min_hop(net, h, candidate)
            .iter()
            .map(|p| p.bottleneck(net))
            .fold(0.0, f64::max);
        bandwidth_factor = bandwidth_factor.min((widest / max_bw).min(1.0));
        distance = distance.max(metrics.hops[h.0][candidate.0]);
    }
    weight_formula(
        metrics.betweenness[candidate.0],
        metrics.degree[candidate.0] as f64,
        bandwidth_factor,
        distance as f64,
    )
}

/// Alternative hosts for one stage, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub candidates: Vec<(NodeId, f64)>,
}

impl CandidateSet {
    /// The `size` highest-weight ECNs with spare compute and a positive
    /// weight; ties go to the lower node id.
    pub fn rank(net: &PhysicalNetwork, prev_hosts: &[NodeId], size: usize) -> Self {
        let metrics = TopologyMetrics::of(net);
        let mut cache = PathCache::new(net, 1);
        Self::rank_with(&metrics, &mut cache, net, prev_hosts, size, 0.0)
    }

    /// As [`CandidateSet::rank`], keeping only ECNs whose spare compute
    /// exceeds `min_residual`.
    pub(crate) fn rank_with(
        metrics: &TopologyMetrics,
        cache: &mut PathCache,
        net: &PhysicalNetwork,
        prev_hosts: &[NodeId],
        size: usize,
        min_residual: f64,
    ) -> Self {
        let mut candidates: Vec<(NodeId, f64)> = net
            .ecns()
            .filter(|n| n.compute_capacity - n.compute_load - CPU_MARGIN > min_residual)
            .map(|n| n.id)
            .collect::<Vec<_>>()
            .into_iter()
            .map(|n| (n, node_weight_with(metrics, cache, net, n, prev_hosts)))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        candidates.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        candidates.truncate(size);
        Self { candidates }
    }

    pub fn hosts(&self) -> Vec<NodeId> {
        self.candidates.iter().map(|c| c.0).collect()
    }
}

/// Hop-based routes between node pairs over optical links, memoized for a
/// fixed topology.
#[derive(Debug, Clone)]
pub(crate) struct PathCache {
    k: usize,
    shortest: HashMap<(NodeId, NodeId), Vec<Path>>,
    min_hop: HashMap<(NodeId, NodeId), Vec<Path>>,
    hop_cost: Vec<f64>,
}

const MAX_EQUAL_COST_PATHS: usize = 64;

impl PathCache {
    pub(crate) fn new(net: &PhysicalNetwork, k: usize) -> Self {
        let hop_cost = net
            .links()
            .iter()
            .map(|l| if l.kind == LinkKind::Optical { 1.0 } else { f64::INFINITY })
            .collect();
        Self { k, shortest: HashMap::new(), min_hop: HashMap::new(), hop_cost }
    }

    /// Up to `k` loopless optical paths in hop order.
    pub(crate) fn k_hop(&mut self, net: &PhysicalNetwork, a: NodeId, b: NodeId) -> &[Path] {
        let (k, cost) = (self.k, &self.hop_cost);
        self.shortest.entry((a, b)).or_insert_with(|| k_shortest_paths(net, a, b, k, cost))
    }

    /// Every minimum-hop optical path (up to a fixed cap).
    pub(crate) fn min_hop(&mut self, net: &PhysicalNetwork, a: NodeId, b: NodeId) -> &[Path] {
        let cost = &self.hop_cost;
        self.min_hop.entry((a, b)).or_insert_with(|| {
            min_hop_paths(net, a, b, |l| cost[l.0].is_finite(), MAX_EQUAL_COST_PATHS)
        })
    }
}

/// Reusable deployment context for one fixed topology.
#[derive(Debug, Clone)]
pub struct Placer {
    params: PlacementParams,
    metrics: TopologyMetrics,
    cache: PathCache,
    shape: (usize, usize),
}

impl Placer {
    pub fn new(net: &PhysicalNetwork, params: PlacementParams) -> Self {
        let cache = PathCache::new(net, params.max_paths);
        Self {
            metrics: TopologyMetrics::of(net),
            cache,
            shape: (net.node_count(), net.link_count()),
            params,
        }
    }

    pub fn params(&self) -> &PlacementParams {
        &self.params
    }

    /// Plans `req` with `algorithm` and, if accepted, applies it to `net`.
    pub fn deploy(
        &mut self,
        algorithm: Algorithm,
        req: &ServiceChainRequest,
        net: &mut PhysicalNetwork,
    ) -> PlacementOutcome {
        assert_eq!(self.shape, (net.node_count(), net.link_count()), "placer built for another topology");
        if req.validate().is_err() || req.ingress.0 >= net.node_count() || req.egress.0 >= net.node_count()
        {
            return PlacementOutcome::Rejected(RejectReason::NoPath);
        }
        let planned = match algorithm {
            Algorithm::Gbmp => gbmp::plan(self, req, net),
            Algorithm::Ksmp => ksmp::plan(self, req, net),
            Algorithm::Ecmp => ecmp::plan(self, req, net),
            Algorithm::Ilps => ilps::plan(self, req, net),
        };
        let plan = match planned {
            Ok(plan) => plan,
            Err(reason) => return PlacementOutcome::Rejected(reason),
        };
        if let Err(violations) = check_feasibility(&plan, req, net) {
            return PlacementOutcome::Rejected(reason_for(&violations));
        }
        match apply_plan(net, &plan) {
            Ok(()) => PlacementOutcome::Accepted(plan),
            Err(_) => PlacementOutcome::Rejected(RejectReason::NoCapacity),
        }
    }
}

fn reason_for(violations: &[Violation]) -> RejectReason {
    if violations.iter().any(|v| matches!(v, Violation::Delay { .. })) {
        RejectReason::DelayViolation
    } else if violations.iter().any(|v| matches!(v, Violation::Compute { .. })) {
        RejectReason::NoCapacity
    } else {
        RejectReason::NoPath
    }
}

pub fn gbmp_deploy(
    req: &ServiceChainRequest,
    net: &mut PhysicalNetwork,
    params: &PlacementParams,
) -> PlacementOutcome {
    Placer::new(net, params.clone()).deploy(Algorithm::Gbmp, req, net)
}

pub fn ksmp_deploy(
    req: &ServiceChainRequest,
    net: &mut PhysicalNetwork,
    params: &PlacementParams,
) -> PlacementOutcome {
    Placer::new(net, params.clone()).deploy(Algorithm::Ksmp, req, net)
}

pub fn ecmp_deploy(
    req: &ServiceChainRequest,
    net: &mut PhysicalNetwork,
    params: &PlacementParams,
) -> PlacementOutcome {
    Placer::new(net, params.clone()).deploy(Algorithm::Ecmp, req, net)
}

pub fn ilps_deploy(
    req: &ServiceChainRequest,
    net: &mut PhysicalNetwork,
    params: &PlacementParams,
) -> PlacementOutcome {
    Placer::new(net, params.clone()).deploy(Algorithm::Ilps, req, net)
}
