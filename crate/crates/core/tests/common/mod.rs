//! Independent reference implementations used by the integration tests.
//! Nothing here calls the library's algorithms; only its data types.
#![allow(dead_code)]

pub mod checks;

use std::collections::BTreeMap;

use chainsim_core::chain::{DeploymentPlan, ObjectiveWeights, ServiceChainRequest, VnfKind};
use chainsim_core::solvers::{LoadMode, SplitCandidate, SplitProblem};
use chainsim_core::topology::{LinkId, LinkKind, NodeId, PhysicalNetwork};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const GIGA: f64 = 1e9;

// ---------- graphs ----------

/// Connected graph on `n` nodes: a random spanning tree plus extra edges.
/// Roughly a third of the nodes are ECNs; link bandwidths are integers.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> PhysicalNetwork {
    let mut net = PhysicalNetwork::new();
    for i in 0..n {
        if i % 3 == 2 {
            net.add_ecn(rng.gen_range(1..=8) as f64 * GIGA).unwrap();
        } else {
            net.add_switch(rng.gen_range(2..=50) as f64).unwrap();
        }
    }
    for v in 1..n {
        let u = rng.gen_range(0..v);
        net.add_link(NodeId(u), NodeId(v), LinkKind::Optical, rng.gen_range(1..=10) as f64 * GIGA, 1e-4).unwrap();
    }
    let extra = rng.gen_range(0..=n);
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b && net.link_between(NodeId(a), NodeId(b)).is_none() {
            net.add_link(NodeId(a), NodeId(b), LinkKind::Optical, rng.gen_range(1..=10) as f64 * GIGA, 1e-4).unwrap();
        }
    }
    net
}

/// Every simple path from `src` to `dst` as (nodes, links), by plain DFS.
pub fn all_simple_paths(net: &PhysicalNetwork, src: NodeId, dst: NodeId, usable: &dyn Fn(LinkId) -> bool) -> Vec<(Vec<NodeId>, Vec<LinkId>)> {
    fn go(
        net: &PhysicalNetwork,
        dst: NodeId,
        usable: &dyn Fn(LinkId) -> bool,
        nodes: &mut Vec<NodeId>,
        links: &mut Vec<LinkId>,
        out: &mut Vec<(Vec<NodeId>, Vec<LinkId>)>,
    ) {
        let u = *nodes.last().unwrap();
        if u == dst {
            out.push((nodes.clone(), links.clone()));
            return;
        }
        for l in net.links() {
            if !usable(l.id) || (l.endpoints.0 != u && l.endpoints.1 != u) {
                continue;
            }
            let v = l.other(u);
            if nodes.contains(&v) {
                continue;
            }
            nodes.push(v);
            links.push(l.id);
            go(net, dst, usable, nodes, links, out);
            nodes.pop();
            links.pop();
        }
    }
    let mut out = Vec::new();
    go(net, dst, usable, &mut vec![src], &mut Vec::new(), &mut out);
    out
}

/// Betweenness by counting, for every unordered pair, the fraction of its
/// shortest paths through each intermediate node.
pub fn brute_betweenness(net: &PhysicalNetwork) -> Vec<f64> {
    let n = net.node_count();
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let paths = all_simple_paths(net, NodeId(s), NodeId(t), &|_| true);
            let Some(min) = paths.iter().map(|p| p.1.len()).min() else { continue };
            let shortest: Vec<_> = paths.iter().filter(|p| p.1.len() == min).collect();
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let through = shortest.iter().filter(|p| p.0.contains(&NodeId(v))).count();
                bc[v] += through as f64 / shortest.len() as f64;
            }
        }
    }
    bc
}

/// The `k` cheapest simple paths, ties by node sequence.
pub fn brute_k_shortest(net: &PhysicalNetwork, src: NodeId, dst: NodeId, k: usize, cost: &[f64]) -> Vec<(f64, Vec<NodeId>)> {
    let mut all: Vec<(f64, Vec<NodeId>)> = all_simple_paths(net, src, dst, &|l| cost[l.0].is_finite())
        .into_iter()
        .map(|(nodes, links)| (links.iter().map(|l| cost[l.0]).sum(), nodes))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    all.truncate(k);
    all
}

// ---------- split solvers ----------

pub fn random_split_problem(rng: &mut ChaCha8Rng, mode: LoadMode) -> SplitProblem {
    let n = rng.gen_range(1..=4);
    let candidates: Vec<SplitCandidate> = (0..n)
        .map(|_| {
            let capacity = rng.gen_range(1..=100) as f64;
            SplitCandidate { load: capacity * rng.gen_range(0.0..0.9), capacity, unit_cost: rng.gen_range(0..20) as f64 }
        })
        .collect();
    let link_caps = (0..n).map(|_| if rng.gen_bool(0.3) { f64::INFINITY } else { rng.gen_range(0.0..60.0) }).collect();
    SplitProblem { candidates, demand: rng.gen_range(0.5..40.0), link_caps, mode }
}

fn level(p: &SplitProblem, j: usize, amount: f64) -> f64 {
    let c = &p.candidates[j];
    match p.mode {
        LoadMode::Absolute => c.load + amount,
        LoadMode::Utilization => (c.load + amount) / c.capacity,
    }
}

/// Amount that brings candidate `j` to `level`.
fn amount_at(p: &SplitProblem, j: usize, lvl: f64) -> f64 {
    let c = &p.candidates[j];
    match p.mode {
        LoadMode::Absolute => lvl - c.load,
        LoadMode::Utilization => lvl * c.capacity - c.load,
    }
}

fn cap_of(p: &SplitProblem, j: usize) -> f64 {
    let c = &p.candidates[j];
    p.link_caps[j].min(c.capacity - c.load).max(0.0)
}

/// Min-max vertex oracle: every candidate is empty, saturated, or shares a
/// common level with the other active ones; returns the best peak level, or
/// `None` if the demand cannot be placed.
pub fn minmax_oracle(p: &SplitProblem) -> Option<f64> {
    let n = p.candidates.len();
    let mut best: Option<f64> = None;
    for code in 0..3usize.pow(n as u32) {
        let state: Vec<usize> = (0..n).map(|j| code / 3usize.pow(j as u32) % 3).collect();
        let saturated: f64 = (0..n).filter(|&j| state[j] == 1).map(|j| cap_of(p, j)).sum();
        let active: Vec<usize> = (0..n).filter(|&j| state[j] == 2).collect();
        let rest = p.demand - saturated;
        let mut amounts = vec![0.0; n];
        for j in 0..n {
            if state[j] == 1 {
                amounts[j] = cap_of(p, j);
            }
        }
        if active.is_empty() {
            if rest.abs() > 1e-12 * p.demand {
                continue;
            }
        } else {
            // sum_j amount_at(L) = rest is linear in L.
            let (slope, offset): (f64, f64) = active.iter().fold((0.0, 0.0), |(s, o), &j| {
                let c = &p.candidates[j];
                match p.mode {
                    LoadMode::Absolute => (s + 1.0, o - c.load),
                    LoadMode::Utilization => (s + c.capacity, o - c.load),
                }
            });
            let lvl = (rest - offset) / slope;
            let tol = 1e-12 * p.demand;
            let mut ok = true;
            for &j in &active {
                let a = amount_at(p, j, lvl);
                ok &= a >= -tol && a <= cap_of(p, j) + tol;
                amounts[j] = a.clamp(0.0, cap_of(p, j));
            }
            if !ok {
                continue;
            }
        }
        let peak = (0..n).map(|j| level(p, j, amounts[j])).fold(f64::NEG_INFINITY, f64::max);
        if best.map_or(true, |b| peak < b) {
            best = Some(peak);
        }
    }
    best
}

/// Min-cost vertex oracle: basic solutions have at most one fractional
/// variable, every other ratio sits at 0 or its upper bound.
pub fn min_cost_oracle(p: &SplitProblem) -> Option<f64> {
    let n = p.candidates.len();
    let ub: Vec<f64> = (0..n).map(|j| (cap_of(p, j) / p.demand).min(1.0)).collect();
    let mut best: Option<f64> = None;
    for free in 0..n {
        for mask in 0..(1usize << n) {
            if mask >> free & 1 == 1 {
                continue;
            }
            let mut x = vec![0.0; n];
            for j in 0..n {
                if mask >> j & 1 == 1 {
                    x[j] = ub[j];
                }
            }
            let fixed: f64 = x.iter().sum();
            let xf = 1.0 - fixed;
            if xf < -1e-12 || xf > ub[free] + 1e-12 {
                continue;
            }
            x[free] = xf.clamp(0.0, ub[free]);
            let cost: f64 = (0..n).map(|j| p.candidates[j].unit_cost * x[j]).sum();
            if best.map_or(true, |b| cost < b) {
                best = Some(cost);
            }
        }
    }
    best
}

// ---------- plans ----------

/// Independent constraint re-check of an accepted plan. `before` and `after`
/// are the network states around the deploy call; `pair_paths` caps the
/// routes per instance pair. Returns the first problem found.
pub fn recheck_plan(
    plan: &DeploymentPlan,
    req: &ServiceChainRequest,
    before: &PhysicalNetwork,
    after: &PhysicalNetwork,
    max_paths: usize,
    pair_paths: Option<usize>,
    processing_window: f64,
) -> Result<(), String> {
    const TOL: f64 = 1e-9;
    let close = |a: f64, b: f64| (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0);
    let grid = 1.0 / 1024.0;
    let m = req.chain_len();
    if plan.stages.len() != m {
        return Err(format!("{} stages for chain of {m}", plan.stages.len()));
    }
    // C4: whole instances on distinct ECNs per stage, at most MP per stage.
    for (s, stage) in plan.stages.iter().enumerate() {
        if stage.is_empty() || stage.len() > max_paths {
            return Err(format!("stage {} has {} instances", s + 1, stage.len()));
        }
        for (j, inst) in stage.iter().enumerate() {
            if !before.node(inst.host).is_ecn() {
                return Err(format!("stage {} instance {j} on a switch", s + 1));
            }
            if stage[..j].iter().any(|o| o.host == inst.host) {
                return Err(format!("stage {} repeats host {}", s + 1, inst.host));
            }
            if inst.allocated_cpu * processing_window < req.cpu_demand * inst.share * (1.0 - TOL) {
                return Err(format!("stage {} instance {j} under-provisioned", s + 1));
            }
        }
    }
    let width = |s: usize| if s == 0 || s == m + 1 { 1 } else { plan.stages[s - 1].len() };
    let host = |s: usize, j: usize| {
        if s == 0 {
            req.ingress
        } else if s == m + 1 {
            req.egress
        } else {
            plan.stages[s - 1][j].host
        }
    };
    // Flow conservation and split ratios.
    if plan.splits.boundaries.len() != m + 1 {
        return Err("wrong boundary count".into());
    }
    for b in 0..=m {
        let mat = &plan.splits.boundaries[b];
        if mat.len() != width(b) || mat.iter().any(|r| r.len() != width(b + 1)) {
            return Err(format!("boundary {b} has the wrong shape"));
        }
        if mat.iter().flatten().any(|x| *x < 0.0) {
            return Err(format!("boundary {b} has a negative ratio"));
        }
        let total: f64 = mat.iter().flatten().sum();
        if !close(total, 1.0) {
            return Err(format!("boundary {b} sums to {total}"));
        }
    }
    for s in 1..=m {
        for j in 0..width(s) {
            let inflow: f64 = plan.splits.boundaries[s - 1].iter().map(|r| r[j]).sum();
            let outflow: f64 = plan.splits.boundaries[s][j].iter().sum();
            if !close(inflow, outflow) || !close(inflow, plan.stages[s - 1][j].share) {
                return Err(format!("stage {s} instance {j} leaks flow"));
            }
        }
    }
    // Routes carry exactly each pair's share over valid optical paths.
    let mut routed: BTreeMap<(usize, usize, usize), (f64, usize)> = BTreeMap::new();
    for r in &plan.routes {
        if r.boundary > m || r.from >= width(r.boundary) || r.to >= width(r.boundary + 1) {
            return Err("route index out of range".into());
        }
        let p = &r.path;
        if p.nodes.first() != Some(&host(r.boundary, r.from)) || p.nodes.last() != Some(&host(r.boundary + 1, r.to)) {
            return Err(format!("route on boundary {} has wrong endpoints", r.boundary));
        }
        if p.links.len() + 1 != p.nodes.len() {
            return Err("route path is malformed".into());
        }
        for (i, &l) in p.links.iter().enumerate() {
            let link = before.link(l);
            let (a, c) = (p.nodes[i], p.nodes[i + 1]);
            if !((link.endpoints == (a, c)) || (link.endpoints == (c, a))) || link.kind != LinkKind::Optical {
                return Err(format!("route uses link {l} incorrectly"));
            }
        }
        let mut sorted = p.nodes.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != p.nodes.len() {
            return Err("route path repeats a node".into());
        }
        let e = routed.entry((r.boundary, r.from, r.to)).or_default();
        e.0 += r.bandwidth;
        e.1 += 1;
    }
    for b in 0..=m {
        for j in 0..width(b) {
            for k in 0..width(b + 1) {
                let want = plan.splits.boundaries[b][j][k] * req.bandwidth_demand;
                match routed.get(&(b, j, k)) {
                    Some(&(got, _)) if !close(got, want) => return Err(format!("pair ({b},{j},{k}) routes {got} of {want}")),
                    None if want > 0.0 && host(b, j) != host(b + 1, k) => return Err(format!("pair ({b},{j},{k}) unrouted")),
                    _ => {}
                }
                if routed.get(&(b, j, k)).map_or(0, |x| x.1) > pair_paths.unwrap_or(usize::MAX) {
                    return Err(format!("pair ({b},{j},{k}) uses more than MP paths"));
                }
            }
        }
    }
    // C1, C2 and flow tables from fresh per-resource sums.
    let mut cpu: BTreeMap<NodeId, (f64, usize)> = BTreeMap::new();
    for inst in plan.stages.iter().flatten() {
        let e = cpu.entry(inst.host).or_default();
        e.0 += inst.allocated_cpu;
        e.1 += 1;
    }
    let mut link: BTreeMap<LinkId, (f64, usize)> = BTreeMap::new();
    let mut table: BTreeMap<NodeId, f64> = BTreeMap::new();
    for r in &plan.routes {
        for &l in &r.path.links {
            let e = link.entry(l).or_default();
            e.0 += r.bandwidth;
            e.1 += 1;
        }
        if !r.path.links.is_empty() {
            for &n in &r.path.nodes {
                if !before.node(n).is_ecn() {
                    *table.entry(n).or_default() += 1.0;
                }
            }
        }
    }
    for n in before.nodes() {
        let (add, count) = cpu.get(&n.id).copied().unwrap_or_default();
        let slack = grid * count as f64;
        if n.compute_load + add > n.compute_capacity + slack {
            return Err(format!("C1 on {}", n.id));
        }
        let got = after.node(n.id).compute_load - n.compute_load;
        if (got - add).abs() > slack + TOL * add {
            return Err(format!("cpu on {} moved by {got}, plan reserves {add}", n.id));
        }
        let t = table.get(&n.id).copied().unwrap_or(0.0);
        if n.switch_load + t > n.switch_capacity {
            return Err(format!("flow table on {}", n.id));
        }
        if after.node(n.id).switch_load - n.switch_load != t {
            return Err(format!("flow table on {} moved by the wrong amount", n.id));
        }
    }
    for l in before.links() {
        let (add, count) = link.get(&l.id).copied().unwrap_or_default();
        let slack = grid * count as f64;
        if l.load + add > l.bandwidth + slack {
            return Err(format!("C2 on {}", l.id));
        }
        let got = after.link(l.id).load - l.load;
        if (got - add).abs() > slack + TOL * add {
            return Err(format!("load on {} moved by {got}, plan routes {add}", l.id));
        }
    }
    // C3: worst delay over every instance chain that carries flow.
    let delay = worst_chain_delay(plan, req, before);
    if delay > req.delay_bound * (1.0 + TOL) {
        return Err(format!("C3: delay {delay} over {}", req.delay_bound));
    }
    Ok(())
}

/// Enumerates instance chains ingress -> one instance per stage -> egress
/// whose every hop has positive flow; per hop the slowest route, per
/// instance its processing time.
pub fn worst_chain_delay(plan: &DeploymentPlan, req: &ServiceChainRequest, net: &PhysicalNetwork) -> f64 {
    let m = req.chain_len();
    let hop = |b: usize, j: usize, k: usize| -> f64 {
        plan.routes
            .iter()
            .filter(|r| r.boundary == b && r.from == j && r.to == k)
            .map(|r| {
                let bits = 8.0 * req.data_size * r.bandwidth / req.bandwidth_demand;
                r.path.links.iter().map(|&l| bits / net.link(l).bandwidth + net.link(l).prop_delay).sum::<f64>()
            })
            .fold(0.0, f64::max)
    };
    let mut worst = 0.0f64;
    let mut stack: Vec<(usize, usize, f64)> = vec![(0, 0, 0.0)];
    while let Some((s, j, t)) = stack.pop() {
        if s == m + 1 {
            worst = worst.max(t);
            continue;
        }
        let next = if s + 1 == m + 1 { 1 } else { plan.stages[s].len() };
        for k in 0..next {
            if plan.splits.boundaries[s][j][k] <= 0.0 {
                continue;
            }
            let mut tk = t + hop(s, j, k);
            if s + 1 <= m {
                let inst = &plan.stages[s][k];
                tk += req.cpu_demand * inst.share / inst.allocated_cpu;
            }
            stack.push((s + 1, k, tk));
        }
    }
    worst
}

/// Bit patterns of every load field.
pub fn load_bits(net: &PhysicalNetwork) -> Vec<u64> {
    net.nodes()
        .iter()
        .flat_map(|n| [n.compute_load.to_bits(), n.switch_load.to_bits()])
        .chain(net.links().iter().map(|l| l.load.to_bits()))
        .collect()
}

// ---------- objective ----------

fn peak_over_mean(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
    if v.is_empty() || mean <= 0.0 {
        1.0
    } else {
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max) / mean
    }
}

fn pop_std(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Composite load-balance objective from utilization vectors.
pub fn composite(ecn: &[f64], links: &[f64], switches: &[f64], w: &ObjectiveWeights) -> f64 {
    w.alpha * peak_over_mean(ecn) + w.beta * pop_std(links) + w.gamma * peak_over_mean(switches)
}

/// Composite of a network's current state.
pub fn composite_of(net: &PhysicalNetwork, w: &ObjectiveWeights) -> f64 {
    let ecn: Vec<f64> = net.nodes().iter().filter(|n| n.is_ecn()).map(|n| n.compute_load / n.compute_capacity).collect();
    let links: Vec<f64> = net.links().iter().map(|l| l.load / l.bandwidth).collect();
    let sw: Vec<f64> = net.nodes().iter().filter(|n| !n.is_ecn()).map(|n| n.switch_load / n.switch_capacity).collect();
    composite(&ecn, &links, &sw, w)
}

// ---------- small instances ----------

/// Small FiWi-like network: `ecns` ECNs on a fiber ring, each attached to
/// one of two access switches joined through a root switch, with random
/// preloads.
pub fn small_network(rng: &mut ChaCha8Rng, ecns: usize, preload: bool) -> PhysicalNetwork {
    let mut net = PhysicalNetwork::new();
    let root = net.add_switch(1000.0).unwrap();
    let hubs = [net.add_access_switch(1000.0, 1e9).unwrap(), net.add_access_switch(1000.0, 1e9).unwrap()];
    for h in hubs {
        net.add_link(root, h, LinkKind::Optical, 10.0 * GIGA, 1e-4).unwrap();
    }
    let ids: Vec<NodeId> = (0..ecns).map(|_| net.add_ecn(rng.gen_range(20..=40) as f64 * GIGA).unwrap()).collect();
    for (i, &e) in ids.iter().enumerate() {
        net.add_link(hubs[i % 2], e, LinkKind::Optical, 10.0 * GIGA, 1e-4).unwrap();
    }
    if ecns > 2 {
        for i in 0..ecns {
            net.add_link(ids[i], ids[(i + 1) % ecns], LinkKind::Optical, 10.0 * GIGA, 1e-4).unwrap();
        }
    }
    if preload {
        for &e in &ids {
            let cap = net.node(e).compute_capacity;
            net.set_compute_load(e, cap * rng.gen_range(0.0..0.6)).unwrap();
        }
        for l in 0..net.link_count() {
            let bw = net.link(LinkId(l)).bandwidth;
            net.set_link_load(LinkId(l), bw * rng.gen_range(0.0..0.5)).unwrap();
        }
        // Loaded links imply flow-table entries on the switches they cross.
        for s in [root, hubs[0], hubs[1]] {
            net.set_switch_load(s, rng.gen_range(100..500) as f64).unwrap();
        }
    }
    net
}

pub fn small_request(rng: &mut ChaCha8Rng, net: &PhysicalNetwork, stages: usize) -> ServiceChainRequest {
    let access = net.access_nodes();
    let (ingress, egress) = if rng.gen_bool(0.5) { (access[0], access[1]) } else { (access[1], access[0]) };
    let data_size = rng.gen_range(50e6..300e6);
    ServiceChainRequest {
        id: 0,
        ingress,
        egress,
        vnf_sequence: (0..stages).map(|i| VnfKind(i as u16)).collect(),
        cpu_demand: rng.gen_range(1.0..6.0) * GIGA,
        data_size,
        bandwidth_demand: 8.0 * data_size / 1.0,
        delay_bound: 30.0,
    }
}
