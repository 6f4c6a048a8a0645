//! Oracle-backed checks shared by the core integration tests and the
//! acceptance suite. Each returns a one-line summary, or the first mismatch.

use std::collections::BTreeMap;

use chainsim_core::chain::{release_plan, DeploymentPlan, ServiceChainRequest};
use chainsim_core::placement::{Algorithm, PlacementOutcome, PlacementParams, Placer};
use chainsim_core::simulator::{generate_requests, ScenarioConfig};
use chainsim_core::solvers::{greedy_bisection_minmax, simplex_min_cost, LoadMode, SolverError};
use chainsim_core::topology::{
    betweenness_centrality, build_tree_star, k_shortest_paths, quantize, LinkId, LinkKind, NodeId, PhysicalNetwork,
    TopologyConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

/// Random split problems with at most four candidates against the vertex
/// oracles.
pub fn solver_equivalence(problems: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut solved, mut infeasible) = (0, 0);
    for i in 0..problems {
        let mode = if i % 2 == 0 { LoadMode::Utilization } else { LoadMode::Absolute };
        let p = random_split_problem(&mut rng, mode);
        let min_cap = p.candidates.iter().map(|c| c.capacity).fold(f64::INFINITY, f64::min);
        let scale = if mode == LoadMode::Utilization { 1.0 / min_cap } else { 1.0 };
        let tol = 1e-6 * p.demand * scale;

        match (greedy_bisection_minmax(&p, 1e-12), minmax_oracle(&p)) {
            (Ok(sol), Some(best)) => {
                let sum: f64 = sol.ratios.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(format!("problem {i}: bisection ratios sum to {sum}"));
                }
                for (j, r) in sol.ratios.iter().enumerate() {
                    if *r < 0.0 || r * p.demand > p.limit(j) + 1e-9 * p.demand {
                        return Err(format!("problem {i}: bisection ratio {j} = {r} breaks its limit"));
                    }
                }
                let peak = p.peak_load(&sol.ratios);
                if (peak - best).abs() > tol {
                    return Err(format!("problem {i}: bisection peak {peak}, oracle {best}"));
                }
                solved += 1;
            }
            (Err(SolverError::Infeasible), None) => infeasible += 1,
            (got, want) => return Err(format!("problem {i}: bisection {got:?} vs oracle {want:?}")),
        }

        match (simplex_min_cost(&p), min_cost_oracle(&p)) {
            (Ok(sol), Some(best)) => {
                let cost = p.total_cost(&sol.ratios);
                if (cost - best).abs() > 1e-9 * best.abs().max(1.0) {
                    return Err(format!("problem {i}: simplex cost {cost}, oracle {best}"));
                }
                let sum: f64 = sol.ratios.iter().sum();
                if (sum - 1.0).abs() > 1e-9 || sol.ratios.iter().enumerate().any(|(j, r)| *r < -1e-12 || r * p.demand > p.limit(j) * (1.0 + 1e-9) + 1e-12) {
                    return Err(format!("problem {i}: simplex ratios {:?} are infeasible", sol.ratios));
                }
            }
            (Err(SolverError::Infeasible), None) => {}
            (got, want) => return Err(format!("problem {i}: simplex {got:?} vs oracle {want:?}")),
        }
    }
    Ok(format!("{problems} problems, {solved} feasible, {infeasible} infeasible"))
}

/// Random connected graphs of at most ten nodes against brute-force path
/// enumeration.
pub fn graph_equivalence(graphs: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries = 0;
    for g in 0..graphs {
        let n = rng.gen_range(2..=10);
        let net = random_graph(&mut rng, n);
        let want = brute_betweenness(&net);
        let got = betweenness_centrality(&net);
        for v in 0..n {
            if (got[v] - want[v]).abs() > 1e-9 * want[v].max(1.0) {
                return Err(format!("graph {g}: betweenness of n{v} is {}, oracle {}", got[v], want[v]));
            }
        }
        let cost: Vec<f64> = (0..net.link_count())
            .map(|_| if rng.gen_bool(0.1) { f64::INFINITY } else { rng.gen_range(1..=5) as f64 })
            .collect();
        for _ in 0..4 {
            let (s, t) = (NodeId(rng.gen_range(0..n)), NodeId(rng.gen_range(0..n)));
            if s == t {
                continue;
            }
            let k = rng.gen_range(1..=5);
            let got: Vec<(f64, Vec<NodeId>)> =
                k_shortest_paths(&net, s, t, k, &cost).into_iter().map(|p| (p.cost, p.nodes)).collect();
            let want = brute_k_shortest(&net, s, t, k, &cost);
            if got != want {
                return Err(format!("graph {g}: {k} shortest {s}->{t} = {got:?}, oracle {want:?}"));
            }
            queries += 1;
        }
    }
    Ok(format!("{graphs} graphs, {queries} path queries"))
}

fn mass_network(rng: &mut ChaCha8Rng, round: usize) -> PhysicalNetwork {
    let cfg = match round % 3 {
        0 => TopologyConfig { rng_seed: rng.gen(), ..TopologyConfig::default() },
        1 => TopologyConfig { ecn_count: 6, tree_depth: 1, tree_fanout: 3, rng_seed: rng.gen(), ..TopologyConfig::default() },
        _ => TopologyConfig {
            ecn_count: 8,
            tree_depth: 2,
            tree_fanout: 2,
            optical_bandwidth: 2.5e9,
            switch_capacity: 40.0,
            ecn_ring: rng.gen_bool(0.5),
            rng_seed: rng.gen(),
            ..TopologyConfig::default()
        },
    };
    build_tree_star(&cfg).unwrap()
}

fn mass_requests(rng: &mut ChaCha8Rng, net: &PhysicalNetwork, n: usize, round: usize) -> Vec<ServiceChainRequest> {
    let mut scenario = if round % 2 == 0 { ScenarioConfig::data_intensive() } else { ScenarioConfig::user_intensive() };
    scenario.rng_seed = rng.gen();
    scenario.transfer_window *= rng.gen_range(0.3..3.0);
    scenario.delay_bound *= rng.gen_range(0.2..2.0);
    scenario.chain_len_min = 1;
    scenario.cpu_demand_max *= rng.gen_range(1.0..20.0);
    let mut reqs = generate_requests(&scenario, n, net);
    for (i, r) in reqs.iter_mut().enumerate() {
        r.id = i as u64;
    }
    reqs
}

/// Randomized admission streams over every algorithm, with interleaved
/// releases. Every accepted plan must pass [`recheck_plan`] and every
/// rejection must leave the loads bit-identical.
pub fn feasibility_soundness(min_calls: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut calls, mut accepted, mut released) = (0usize, 0usize, 0usize);
    let mut round = 0;
    while calls < min_calls {
        let net0 = mass_network(&mut rng, round);
        let requests = mass_requests(&mut rng, &net0, 120, round);
        let params = PlacementParams { max_paths: rng.gen_range(1..=4), ..PlacementParams::default() };
        for alg in Algorithm::ALL {
            let mut net = net0.clone();
            let mut placer = Placer::new(&net, params.clone());
            let mut live: Vec<(DeploymentPlan, Vec<u64>)> = Vec::new();
            for req in &requests {
                let before = net.clone();
                let outcome = placer.deploy(alg, req, &mut net);
                calls += 1;
                match outcome {
                    PlacementOutcome::Accepted(plan) => {
                        let pair_paths = (alg != Algorithm::Ecmp).then_some(params.max_paths);
                        recheck_plan(&plan, req, &before, &net, params.max_paths, pair_paths, params.processing_window)
                            .map_err(|e| format!("{alg} request {} round {round}: {e}", req.id))?;
                        accepted += 1;
                        live.push((plan, load_bits(&before)));
                    }
                    PlacementOutcome::Rejected(reason) => {
                        if load_bits(&before) != load_bits(&net) {
                            return Err(format!("{alg} request {} rejected ({reason:?}) but changed loads", req.id));
                        }
                    }
                }
                if !live.is_empty() && rng.gen_bool(0.1) {
                    // Releasing the newest plan restores the state before it exactly.
                    let (plan, bits) = live.pop().unwrap();
                    release_plan(&mut net, &plan).map_err(|e| format!("{alg}: release failed: {e}"))?;
                    if load_bits(&net) != bits {
                        return Err(format!("{alg}: release of chain {} did not restore loads", plan.chain_id));
                    }
                    released += 1;
                }
            }
            while let Some((plan, _)) = live.pop() {
                release_plan(&mut net, &plan).map_err(|e| format!("{alg}: release failed: {e}"))?;
            }
            if load_bits(&net) != load_bits(&net0) {
                return Err(format!("{alg} round {round}: releasing every plan left residual load"));
            }
        }
        round += 1;
    }
    Ok(format!("{calls} deploys, {accepted} accepted, {released} released mid-stream, 0 violations"))
}

// ---------- exhaustive single-path oracle ----------

const CPU_MARGIN: f64 = 1.0;
const LINK_MARGIN: f64 = 1.0;

/// Widest minimum-hop optical path, first in node order among equals.
fn widest_min_hop(net: &PhysicalNetwork, a: NodeId, b: NodeId) -> Option<(Vec<NodeId>, Vec<LinkId>, f64)> {
    let paths = all_simple_paths(net, a, b, &|l| net.link(l).kind == LinkKind::Optical);
    let min = paths.iter().map(|p| p.1.len()).min()?;
    let mut best: Option<(Vec<NodeId>, Vec<LinkId>, f64)> = None;
    let mut shortest: Vec<_> = paths.into_iter().filter(|p| p.1.len() == min).collect();
    shortest.sort();
    for (nodes, links) in shortest {
        let width = links.iter().map(|&l| net.link(l).bandwidth - net.link(l).load).fold(f64::INFINITY, f64::min);
        if best.as_ref().map_or(true, |b| width > b.2) {
            best = Some((nodes, links, width));
        }
    }
    best
}

/// Best single-instance host sequence by exhaustive enumeration: `None` if
/// no sequence is feasible, else the score and every sequence within
/// `1e-9` of it in node order.
pub fn single_path_oracle(
    net: &PhysicalNetwork,
    req: &ServiceChainRequest,
    params: &PlacementParams,
) -> Option<(f64, Vec<Vec<NodeId>>)> {
    let demand = req.cpu_demand / params.processing_window;
    let hosts: Vec<NodeId> =
        net.nodes().iter().filter(|n| n.is_ecn() && n.compute_capacity - n.compute_load - CPU_MARGIN >= demand).map(|n| n.id).collect();
    let m = req.chain_len();
    let mut scored: Vec<(f64, Vec<NodeId>)> = Vec::new();
    let total = hosts.len().pow(m as u32);
    'seq: for code in 0..total {
        let seq: Vec<NodeId> = (0..m).map(|s| hosts[code / hosts.len().pow((m - 1 - s) as u32) % hosts.len()]).collect();
        let mut cpu = vec![0.0; net.node_count()];
        let mut link = vec![0.0; net.link_count()];
        let mut sw = vec![0.0; net.node_count()];
        let mut delay = 0.0;
        for &h in &seq {
            cpu[h.0] += quantize(demand);
            delay += req.cpu_demand / demand;
        }
        let mut stops = vec![req.ingress];
        stops.extend(&seq);
        stops.push(req.egress);
        for w in stops.windows(2) {
            if w[0] == w[1] {
                continue;
            }
            let Some((nodes, links, width)) = widest_min_hop(net, w[0], w[1]) else { continue 'seq };
            if width < req.bandwidth_demand + LINK_MARGIN {
                continue 'seq;
            }
            for &l in &links {
                link[l.0] += quantize(req.bandwidth_demand);
                delay += 8.0 * req.data_size / net.link(l).bandwidth + net.link(l).prop_delay;
            }
            for &n in &nodes {
                if !net.node(n).is_ecn() {
                    sw[n.0] += 1.0;
                }
            }
        }
        let fits = net.nodes().iter().all(|n| {
            (!n.is_ecn() || n.compute_load + cpu[n.id.0] <= n.compute_capacity - CPU_MARGIN)
                && (n.is_ecn() || n.switch_load + sw[n.id.0] <= n.switch_capacity)
        }) && net.links().iter().all(|l| l.load + link[l.id.0] <= l.bandwidth - LINK_MARGIN);
        if !fits || delay > req.delay_bound {
            continue;
        }
        let ecn: Vec<f64> = net.nodes().iter().filter(|n| n.is_ecn()).map(|n| (n.compute_load + cpu[n.id.0]) / n.compute_capacity).collect();
        let lu: Vec<f64> = net.links().iter().map(|l| (l.load + link[l.id.0]) / l.bandwidth).collect();
        let su: Vec<f64> = net.nodes().iter().filter(|n| !n.is_ecn()).map(|n| (n.switch_load + sw[n.id.0]) / n.switch_capacity).collect();
        scored.push((composite(&ecn, &lu, &su, &params.weights), seq));
    }
    let best = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return None;
    }
    let ties = scored.into_iter().filter(|s| s.0 <= best + 1e-9 * best.abs().max(1.0)).map(|s| s.1).collect();
    Some((best, ties))
}

/// ILPS against [`single_path_oracle`] on instances with at most four ECNs
/// and three stages.
pub fn ilps_exhaustive(instances: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = PlacementParams::default();
    let (mut accepted, mut rejected) = (0, 0);
    for i in 0..instances {
        let ecns = rng.gen_range(2..=4);
        let preload = rng.gen_bool(0.8);
        let mut net = small_network(&mut rng, ecns, preload);
        let stages = rng.gen_range(1..=3);
        let mut req = small_request(&mut rng, &net, stages);
        if rng.gen_bool(0.3) {
            // Tight resources exercise the rejection side.
            req.bandwidth_demand *= rng.gen_range(2.0..12.0);
            req.delay_bound = rng.gen_range(0.5..8.0);
        }
        let oracle = single_path_oracle(&net, &req, &params);
        let before = net.clone();
        let outcome = Placer::new(&net, params.clone()).deploy(Algorithm::Ilps, &req, &mut net);
        match (outcome.plan(), oracle) {
            (Some(plan), Some((best, ties))) => {
                let seq: Vec<NodeId> = plan.stages.iter().map(|s| s[0].host).collect();
                if !ties.contains(&seq) {
                    return Err(format!("instance {i}: ilps chose {seq:?}, oracle optimum {ties:?} at {best}"));
                }
                let score = composite_of(&net, &params.weights);
                if (score - best).abs() > 1e-9 * best.abs().max(1.0) {
                    return Err(format!("instance {i}: ilps objective {score}, oracle {best}"));
                }
                accepted += 1;
            }
            (None, None) => {
                if load_bits(&before) != load_bits(&net) {
                    return Err(format!("instance {i}: rejection changed loads"));
                }
                rejected += 1;
            }
            (got, want) => {
                return Err(format!("instance {i}: ilps accepted={} but oracle feasible={}", got.is_some(), want.is_some()))
            }
        }
    }
    Ok(format!("{instances} instances ({accepted} accepted, {rejected} rejected) match exactly"))
}

// ---------- unconstrained multipath optimum ----------

/// Ways to split `units` grid steps over `parts` hosts.
fn compositions(units: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![units]];
    }
    (0..=units)
        .flat_map(|first| {
            compositions(units - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Unit flow between two nodes spread evenly over every minimum-hop optical
/// path: link shares and per-path switch entries.
#[derive(Default, Clone)]
struct UnitRoute {
    links: Vec<(usize, f64)>,
    switches: Vec<usize>,
}

fn unit_route(net: &PhysicalNetwork, a: NodeId, b: NodeId, max_paths: usize) -> UnitRoute {
    if a == b {
        return UnitRoute::default();
    }
    let paths = all_simple_paths(net, a, b, &|l| net.link(l).kind == LinkKind::Optical);
    let min = paths.iter().map(|p| p.1.len()).min().expect("connected");
    let mut shortest: Vec<_> = paths.into_iter().filter(|p| p.1.len() == min).collect();
    shortest.sort();
    shortest.truncate(max_paths);
    let share = 1.0 / shortest.len() as f64;
    let mut links: BTreeMap<usize, f64> = BTreeMap::new();
    let mut switches = Vec::new();
    for (nodes, ls) in &shortest {
        for l in ls {
            *links.entry(l.0).or_default() += share;
        }
        switches.extend(nodes.iter().filter(|n| !net.node(**n).is_ecn()).map(|n| n.0));
    }
    UnitRoute { links: links.into_iter().collect(), switches }
}

/// Lowest composite objective over every placement of each stage's work on
/// a `1/grid` split grid, ignoring capacity and delay. Consecutive stages
/// keep co-located work local and ship the rest nearest host first.
pub fn multipath_optimum(net: &PhysicalNetwork, req: &ServiceChainRequest, params: &PlacementParams, grid: usize) -> f64 {
    let ecns: Vec<NodeId> = net.nodes().iter().filter(|n| n.is_ecn()).map(|n| n.id).collect();
    let e = ecns.len();
    let m = req.chain_len();
    let demand = req.cpu_demand / params.processing_window;
    let bw = req.bandwidth_demand;
    let mut stops = vec![req.ingress];
    stops.extend(&ecns);
    stops.push(req.egress);
    let routes: Vec<Vec<UnitRoute>> =
        stops.iter().map(|&a| stops.iter().map(|&b| unit_route(net, a, b, params.max_paths)).collect()).collect();
    let hops = |i: usize, j: usize| routes[i][j].links.iter().map(|x| x.1).sum::<f64>();
    let splits: Vec<Vec<f64>> = compositions(grid, e).into_iter().map(|c| c.iter().map(|&u| u as f64 / grid as f64).collect()).collect();

    let mut best = f64::INFINITY;
    let mut choice = vec![0usize; m];
    loop {
        let mut cpu: Vec<f64> = ecns.iter().map(|&h| net.node(h).compute_load).collect();
        let mut link: Vec<f64> = net.links().iter().map(|l| l.load).collect();
        let mut sw: Vec<f64> = net.nodes().iter().map(|n| n.switch_load).collect();
        let send = |from: usize, to: usize, amount: f64, link: &mut Vec<f64>, sw: &mut Vec<f64>| {
            if amount <= 0.0 {
                return;
            }
            for &(l, s) in &routes[from][to].links {
                link[l] += s * amount * bw;
            }
            for &n in &routes[from][to].switches {
                sw[n] += 1.0;
            }
        };
        // Stop index: 0 ingress, 1..=e ECNs, e + 1 egress.
        let mut prev: Vec<(usize, f64)> = vec![(0, 1.0)];
        for s in 0..m {
            let r = &splits[choice[s]];
            for h in 0..e {
                cpu[h] += r[h] * demand;
            }
            let mut supply: Vec<(usize, f64)> = prev.clone();
            let mut want: Vec<(usize, f64)> = (0..e).map(|h| (h + 1, r[h])).collect();
            for (si, sa) in supply.iter_mut() {
                if let Some(w) = want.iter_mut().find(|w| w.0 == *si) {
                    let f = sa.min(w.1);
                    *sa -= f;
                    w.1 -= f;
                }
            }
            let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
            for (a, (si, _)) in supply.iter().enumerate() {
                for (b, (wi, _)) in want.iter().enumerate() {
                    pairs.push((hops(*si, *wi), a, b));
                }
            }
            pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
            for (_, a, b) in pairs {
                let f = supply[a].1.min(want[b].1);
                if f > 1e-12 {
                    send(supply[a].0, want[b].0, f, &mut link, &mut sw);
                    supply[a].1 -= f;
                    want[b].1 -= f;
                }
            }
            prev = (0..e).filter(|&h| r[h] > 0.0).map(|h| (h + 1, r[h])).collect();
        }
        for (h, amount) in prev {
            send(h, e + 1, amount, &mut link, &mut sw);
        }
        let ecn_u: Vec<f64> = ecns.iter().zip(&cpu).map(|(&h, c)| c / net.node(h).compute_capacity).collect();
        let link_u: Vec<f64> = net.links().iter().map(|l| link[l.id.0] / l.bandwidth).collect();
        let sw_u: Vec<f64> = net.nodes().iter().filter(|n| !n.is_ecn()).map(|n| sw[n.id.0] / n.switch_capacity).collect();
        best = best.min(composite(&ecn_u, &link_u, &sw_u, &params.weights));

        let mut s = 0;
        loop {
            if s == m {
                return best;
            }
            choice[s] += 1;
            if choice[s] < splits.len() {
                break;
            }
            choice[s] = 0;
            s += 1;
        }
    }
}

/// Composite objective of GBMP and KSMP relative to [`multipath_optimum`]
/// on small instances; returns `(within_10pct, total)` per algorithm.
pub fn multipath_quality(instances: usize, seed: u64) -> [(Algorithm, usize, usize); 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = PlacementParams::default();
    let mut hits = [(Algorithm::Gbmp, 0, 0), (Algorithm::Ksmp, 0, 0)];
    for _ in 0..instances {
        let ecns = rng.gen_range(3..=4);
        let net = small_network(&mut rng, ecns, true);
        let stages = rng.gen_range(1..=2);
        let req = small_request(&mut rng, &net, stages);
        let opt = multipath_optimum(&net, &req, &params, 8);
        for h in hits.iter_mut() {
            let mut after = net.clone();
            let outcome = Placer::new(&net, params.clone()).deploy(h.0, &req, &mut after);
            if outcome.is_accepted() && composite_of(&after, &params.weights) <= 1.10 * opt {
                h.1 += 1;
            }
            h.2 += 1;
        }
    }
    hits
}
