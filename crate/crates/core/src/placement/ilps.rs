//! Single-path baseline: one instance per stage, every leg on one minimum-hop
//! path, host sequence chosen to minimize the composite load-balance
//! objective of the resulting network state.
//!
//! The search keeps running sums of utilizations so each candidate sequence is
//! scored in time proportional to its footprint. Sequences whose approximate
//! score ties the best within a relative 1e-7 are re-scored exactly on an
//! applied copy of the network; remaining ties go to the lexicographically
//! smallest host sequence.

use std::collections::HashMap;

use super::builder::PlanBuilder;
use super::{Placer, RejectReason, CPU_MARGIN, LINK_MARGIN};
use crate::chain::{
    apply_plan, composite_objective, compute_lbi, DeploymentPlan, ObjectiveWeights, ServiceChainRequest,
};
use crate::topology::{quantize, NodeId, Path, PhysicalNetwork};

const TIE: f64 = 1e-7;

/// Widest minimum-hop path on the current loads, lexicographically first
/// among equally wide ones; `None` if it cannot carry `bandwidth`.
fn leg_path(net: &PhysicalNetwork, paths: &[Path], bandwidth: f64) -> Option<Path> {
    let mut best: Option<(&Path, f64)> = None;
    for p in paths {
        let w = p.bottleneck(net);
        if best.map_or(true, |(_, bw)| w > bw) {
            best = Some((p, w));
        }
    }
    best.filter(|(_, w)| *w >= bandwidth).map(|(p, _)| p.clone())
}

#[derive(Debug, Clone, Copy)]
enum Change {
    Cpu(usize, f64),
    Link(usize, f64),
    Switch(usize),
}

#[derive(Debug, Clone, Copy)]
struct Sums {
    ecn_sum: f64,
    ecn_max: f64,
    link_sum: f64,
    link_sq: f64,
    sw_sum: f64,
    sw_max: f64,
    delay: f64,
}

struct Search<'a> {
    net: &'a PhysicalNetwork,
    req: &'a ServiceChainRequest,
    weights: ObjectiveWeights,
    demand: f64,
    stage_time: f64,
    legs: HashMap<(NodeId, NodeId), Option<Path>>,
    cpu: Vec<f64>,
    link: Vec<f64>,
    sw: Vec<f64>,
    counts: (f64, f64, f64),
    sums: Sums,
    log: Vec<Change>,
    saved: Vec<Sums>,
}

impl<'a> Search<'a> {
    fn new(placer: &mut Placer, req: &'a ServiceChainRequest, net: &'a PhysicalNetwork) -> Self {
        let ecn: Vec<f64> = net.ecns().map(|n| n.compute_utilization()).collect();
        let links: Vec<f64> = net.links().iter().map(|l| l.utilization()).collect();
        let sw: Vec<f64> = net.switches().map(|n| n.switch_load / n.switch_capacity).collect();
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sums = Sums {
            ecn_sum: ecn.iter().sum(),
            ecn_max: max(&ecn),
            link_sum: links.iter().sum(),
            link_sq: links.iter().map(|u| u * u).sum(),
            sw_sum: sw.iter().sum(),
            sw_max: max(&sw),
            delay: 0.0,
        };
        let demand = placer.params.stage_cpu(req);
        Self {
            net,
            req,
            weights: placer.params.weights,
            demand,
            stage_time: req.cpu_demand / demand,
            legs: HashMap::new(),
            cpu: vec![0.0; net.node_count()],
            link: vec![0.0; net.link_count()],
            sw: vec![0.0; net.node_count()],
            counts: (ecn.len() as f64, links.len() as f64, sw.len() as f64),
            sums,
            log: Vec::new(),
            saved: Vec::new(),
        }
    }

    fn leg(&mut self, placer: &mut Placer, a: NodeId, b: NodeId) -> Option<Path> {
        let (net, bw) = (self.net, self.req.bandwidth_demand);
        self.legs
            .entry((a, b))
            .or_insert_with(|| leg_path(net, placer.cache.min_hop(net, a, b), bw + LINK_MARGIN))
            .clone()
    }

    fn mark(&mut self) -> usize {
        self.saved.push(self.sums);
        self.log.len()
    }

    fn rollback(&mut self, mark: usize) {
        while self.log.len() > mark {
            match self.log.pop().expect("non-empty log") {
                Change::Cpu(n, a) => self.cpu[n] -= a,
                Change::Link(l, a) => self.link[l] -= a,
                Change::Switch(n) => self.sw[n] -= 1.0,
            }
        }
        self.sums = self.saved.pop().expect("matching mark");
    }

    fn push_cpu(&mut self, host: NodeId) -> bool {
        let node = self.net.node(host);
        let a = quantize(self.demand);
        let before = (node.compute_load + self.cpu[host.0]) / node.compute_capacity;
        self.cpu[host.0] += a;
        self.log.push(Change::Cpu(host.0, a));
        let load = node.compute_load + self.cpu[host.0];
        let after = load / node.compute_capacity;
        self.sums.ecn_sum += after - before;
        self.sums.ecn_max = self.sums.ecn_max.max(after);
        self.sums.delay += self.stage_time;
        load <= node.compute_capacity - CPU_MARGIN
    }

    fn push_leg(&mut self, placer: &mut Placer, a: NodeId, b: NodeId) -> bool {
        if a == b {
            return true;
        }
        let Some(path) = self.leg(placer, a, b) else { return false };
        let bw = quantize(self.req.bandwidth_demand);
        let bits = 8.0 * self.req.data_size;
        let mut ok = true;
        for &l in &path.links {
            let link = self.net.link(l);
            let before = (link.load + self.link[l.0]) / link.bandwidth;
            self.link[l.0] += bw;
            self.log.push(Change::Link(l.0, bw));
            let load = link.load + self.link[l.0];
            let after = load / link.bandwidth;
            self.sums.link_sum += after - before;
            self.sums.link_sq += after * after - before * before;
            self.sums.delay += bits / link.bandwidth + link.prop_delay;
            ok &= load <= link.bandwidth - LINK_MARGIN;
        }
        for &n in &path.nodes {
            let node = self.net.node(n);
            if node.is_ecn() {
                continue;
            }
            self.sw[n.0] += 1.0;
            self.log.push(Change::Switch(n.0));
            let load = node.switch_load + self.sw[n.0];
            self.sums.sw_sum += 1.0 / node.switch_capacity;
            self.sums.sw_max = self.sums.sw_max.max(load / node.switch_capacity);
            ok &= load <= node.switch_capacity;
        }
        ok && self.sums.delay <= self.req.delay_bound
    }

    fn objective(&self) -> f64 {
        let s = &self.sums;
        let (ne, nl, ns) = self.counts;
        let ratio = |max: f64, sum: f64, n: f64| if n > 0.0 && sum > 0.0 { max / (sum / n) } else { 1.0 };
        let lbi_c = ratio(s.ecn_max, s.ecn_sum, ne);
        let lbi_s = ratio(s.sw_max, s.sw_sum, ns);
        let lbi_n = if nl > 0.0 {
            let mean = s.link_sum / nl;
            (s.link_sq / nl - mean * mean).max(0.0).sqrt()
        } else {
            0.0
        };
        self.weights.alpha * lbi_c + self.weights.beta * lbi_n + self.weights.gamma * lbi_s
    }
}

/// Best approximate score seen and every sequence tying it.
#[derive(Default)]
struct Finalists {
    best: f64,
    seqs: Vec<(f64, Vec<NodeId>)>,
}

impl Finalists {
    fn offer(&mut self, score: f64, seq: &[NodeId]) {
        if self.seqs.is_empty() || score < self.best {
            self.best = score;
        }
        let tol = TIE * self.best.abs().max(1.0);
        if score <= self.best + tol {
            self.seqs.push((score, seq.to_vec()));
            let best = self.best;
            self.seqs.retain(|(s, _)| *s <= best + tol);
        }
    }
}

fn dfs(
    placer: &mut Placer,
    s: &mut Search,
    hosts: &[NodeId],
    seq: &mut Vec<NodeId>,
    out: &mut Finalists,
) {
    let m = s.req.chain_len();
    let prev = seq.last().copied().unwrap_or(s.req.ingress);
    for &h in hosts {
        let mark = s.mark();
        if s.push_cpu(h) && s.push_leg(placer, prev, h) {
            seq.push(h);
            if seq.len() == m {
                if s.push_leg(placer, h, s.req.egress) {
                    out.offer(s.objective(), seq);
                }
            } else {
                dfs(placer, s, hosts, seq, out);
            }
            seq.pop();
        }
        s.rollback(mark);
    }
}

fn beam(placer: &mut Placer, s: &mut Search, hosts: &[NodeId], width: usize) -> Finalists {
    let m = s.req.chain_len();
    let mut frontier: Vec<Vec<NodeId>> = vec![Vec::new()];
    let mut out = Finalists::default();
    for depth in 0..m {
        let mut next: Vec<(f64, Vec<NodeId>)> = Vec::new();
        for seq in &frontier {
            let base = s.mark();
            let mut prev = s.req.ingress;
            for &h in seq {
                s.push_cpu(h);
                s.push_leg(placer, prev, h);
                prev = h;
            }
            for &h in hosts {
                let mark = s.mark();
                if s.push_cpu(h) && s.push_leg(placer, prev, h) {
                    let mut grown = seq.clone();
                    grown.push(h);
                    if depth + 1 == m {
                        if s.push_leg(placer, h, s.req.egress) {
                            out.offer(s.objective(), &grown);
                        }
                    } else {
                        next.push((s.objective(), grown));
                    }
                }
                s.rollback(mark);
            }
            s.rollback(base);
        }
        next.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        next.truncate(width);
        frontier = next.into_iter().map(|(_, seq)| seq).collect();
    }
    out
}

fn build<'r>(
    placer: &mut Placer,
    s: &mut Search,
    req: &'r ServiceChainRequest,
    net: &PhysicalNetwork,
    seq: &[NodeId],
) -> Option<DeploymentPlan> {
    let mut b = PlanBuilder::new(req, net, s.demand);
    let mut prev = req.ingress;
    for &h in seq {
        if prev != h {
            let path = s.leg(placer, prev, h)?;
            b.add_route(0, 0, &path, req.bandwidth_demand);
        }
        b.place_stage(&[h], vec![vec![1.0]]);
        prev = h;
    }
    let last = prev;
    let out = if last != req.egress { Some(s.leg(placer, last, req.egress)?) } else { None };
    b.finish(|b, j, _, bandwidth| {
        if let Some(p) = &out {
            b.add_route(j, 0, p, bandwidth);
        }
        Ok(())
    })
    .ok()
}

pub(super) fn plan(
    placer: &mut Placer,
    req: &ServiceChainRequest,
    net: &PhysicalNetwork,
) -> Result<DeploymentPlan, RejectReason> {
    let demand = placer.params.stage_cpu(req);
    let hosts: Vec<NodeId> = net
        .ecns()
        .filter(|n| n.compute_capacity - n.compute_load - CPU_MARGIN >= demand)
        .map(|n| n.id)
        .collect();
    if hosts.is_empty() {
        return Err(RejectReason::NoCapacity);
    }
    let mut search = Search::new(placer, req, net);
    let exact = (hosts.len() as u64)
        .checked_pow(req.chain_len() as u32)
        .map_or(false, |n| n <= placer.params.ilps_exact_limit);
    let finalists = if exact {
        let mut out = Finalists::default();
        dfs(placer, &mut search, &hosts, &mut Vec::new(), &mut out);
        out
    } else {
        let width = placer.params.ilps_beam_width;
        beam(placer, &mut search, &hosts, width)
    };
    if finalists.seqs.is_empty() {
        let cpu_room: f64 = hosts.iter().map(|&h| net.node(h).residual_compute()).sum();
        return Err(if cpu_room < demand * req.chain_len() as f64 {
            RejectReason::NoCapacity
        } else {
            RejectReason::NoPath
        });
    }

    let mut finalists = finalists;
    finalists.seqs.sort_by(|a, b| a.1.cmp(&b.1));
    let weights = placer.params.weights;
    let mut chosen: Option<(f64, DeploymentPlan)> = None;
    for (_, seq) in &finalists.seqs {
        let Some(plan) = build(placer, &mut search, req, net, seq) else { continue };
        let mut after = net.clone();
        if apply_plan(&mut after, &plan).is_err() {
            continue;
        }
        let score = composite_objective(&compute_lbi(&after), &weights);
        if chosen.as_ref().map_or(true, |(best, _)| score < *best) {
            chosen = Some((score, plan));
        }
    }
    chosen.map(|(_, p)| p).ok_or(RejectReason::NoPath)
}
