//! Experiment engine: request streams for the two IoT workloads, sequential
//! admission runs and multi-seed sweeps.
//!
//! Streams depend only on the scenario, the run seed and the network, never on
//! the algorithm, so every algorithm in a sweep sees the same requests.

mod scenario;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{compute_lbi, DeploymentPlan, LoadBalanceIndicators, ServiceChainRequest, VnfKind};
use crate::placement::{Algorithm, PlacementParams, Placer};
use crate::topology::{build_tree_star, NodeId, PhysicalNetwork, TopologyConfig, TopologyError};

pub use scenario::{ScenarioConfig, ScenarioKind};

/// Combines two seeds into one (splitmix64 finalizer over a rotated xor).
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.rotate_left(32) ^ 0x9e37_79b9_7f4a_7c15;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `n` requests drawn from `scenario` with seed `scenario.rng_seed`. Ingress
/// and egress are distinct FiWi access nodes (any nodes if fewer than two
/// exist). The first `k` requests do not depend on `n`.
pub fn generate_requests(scenario: &ScenarioConfig, n: usize, net: &PhysicalNetwork) -> Vec<ServiceChainRequest> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.rng_seed);
    let mut endpoints = net.access_nodes();
    if endpoints.len() < 2 {
        endpoints = (0..net.node_count()).map(NodeId).collect();
    }
    (0..n)
        .map(|i| {
            let len = rng.gen_range(scenario.chain_len_min..=scenario.chain_len_max);
            let vnf_sequence =
                (0..len).map(|_| VnfKind(rng.gen_range(0..VnfKind::CATALOG_SIZE) as u16)).collect();
            let cpu_demand = uniform(&mut rng, scenario.cpu_demand_min, scenario.cpu_demand_max);
            let data_size = uniform(&mut rng, scenario.data_size_min, scenario.data_size_max);
            let pair: Vec<NodeId> = endpoints.choose_multiple(&mut rng, 2).copied().collect();
            ServiceChainRequest {
                id: i as u64,
                ingress: pair[0],
                egress: pair[1],
                vnf_sequence,
                cpu_demand,
                data_size,
                bandwidth_demand: 8.0 * data_size / scenario.transfer_window,
                delay_bound: scenario.delay_bound,
            }
        })
        .collect()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

/// Metrics after the first `n_requests` requests of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n_requests: usize,
    pub accepted: usize,
    pub acceptance_ratio: f64,
    /// Total link load over total link bandwidth.
    pub network_utilization: f64,
    /// Population standard deviation of link utilization.
    pub link_util_stddev: f64,
    pub lbi: LoadBalanceIndicators,
    /// Milliseconds since the run started.
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub algorithm: Algorithm,
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub points: Vec<Snapshot>,
}

/// A finished run with its final network state and the plans it admitted.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub result: SimulationResult,
    pub network: PhysicalNetwork,
    pub plans: Vec<DeploymentPlan>,
    pub requests: Vec<ServiceChainRequest>,
}

fn snapshot(net: &PhysicalNetwork, n: usize, accepted: usize, started: Instant, params: &PlacementParams) -> Snapshot {
    let (load, bw) = net.links().iter().fold((0.0, 0.0), |(l, b), x| (l + x.load, b + x.bandwidth));
    let lbi = compute_lbi(net).with_weights(&params.weights);
    Snapshot {
        n_requests: n,
        accepted,
        acceptance_ratio: if n == 0 { 1.0 } else { accepted as f64 / n as f64 },
        network_utilization: if bw > 0.0 { load / bw } else { 0.0 },
        link_util_stddev: lbi.lbi_n,
        lbi,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    }
}

/// Admits the scenario's requests one at a time (rejections do not stop the
/// run) and snapshots metrics at each configured request count. The stream is
/// generated from `mix_seed(scenario.rng_seed, seed)`.
pub fn run_trace(
    net: &PhysicalNetwork,
    scenario: &ScenarioConfig,
    algorithm: Algorithm,
    params: &PlacementParams,
    seed: u64,
) -> RunTrace {
    let started = Instant::now();
    let mut net = net.clone();
    let stream_cfg = ScenarioConfig { rng_seed: mix_seed(scenario.rng_seed, seed), ..scenario.clone() };
    let mut counts = scenario.request_counts.clone();
    counts.sort_unstable();
    counts.dedup();
    let total = counts.last().copied().unwrap_or(0);
    let requests = generate_requests(&stream_cfg, total, &net);
    let mut placer = Placer::new(&net, params.clone());
    let mut plans = Vec::new();
    let mut points = Vec::with_capacity(counts.len());
    let mut next = counts.iter().peekable();
    while next.peek() == Some(&&0) {
        points.push(snapshot(&net, 0, 0, started, params));
        next.next();
    }
    for (i, req) in requests.iter().enumerate() {
        if let Some(plan) = placer.deploy(algorithm, req, &mut net).plan() {
            plans.push(plan.clone());
        }
        while next.peek() == Some(&&(i + 1)) {
            points.push(snapshot(&net, i + 1, plans.len(), started, params));
            next.next();
        }
    }
    RunTrace {
        result: SimulationResult { algorithm, scenario: scenario.kind, seed, points },
        network: net,
        plans,
        requests,
    }
}

pub fn run_simulation(
    net: &PhysicalNetwork,
    scenario: &ScenarioConfig,
    algorithm: Algorithm,
    params: &PlacementParams,
    seed: u64,
) -> SimulationResult {
    run_trace(net, scenario, algorithm, params, seed).result
}

/// Network a sweep uses for run seed `seed`.
pub fn network_for_seed(net_config: &TopologyConfig, seed: u64) -> Result<PhysicalNetwork, TopologyError> {
    build_tree_star(&TopologyConfig { rng_seed: mix_seed(net_config.rng_seed, seed), ..net_config.clone() })
}

/// Every (algorithm, seed) pair on its own fresh network, run in parallel;
/// results come back ordered by algorithm, then seed.
pub fn sweep(
    net_config: &TopologyConfig,
    scenario: &ScenarioConfig,
    algorithms: &[Algorithm],
    seeds: &[u64],
    params: &PlacementParams,
) -> Result<Vec<SimulationResult>, TopologyError> {
    net_config.validate()?;
    let mut algs = algorithms.to_vec();
    algs.sort();
    algs.dedup();
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    let jobs: Vec<(Algorithm, u64)> = algs.iter().flat_map(|&a| seeds.iter().map(move |&s| (a, s))).collect();
    jobs.par_iter()
        .map(|&(alg, seed)| {
            let net = network_for_seed(net_config, seed)?;
            Ok(run_simulation(&net, scenario, alg, params, seed))
        })
        .collect()
}
