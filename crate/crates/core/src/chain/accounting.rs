use std::collections::BTreeMap;
use std::fmt;

use super::{ChainError, DeploymentPlan, ServiceChainRequest};
use crate::topology::{quantize, LinkId, LinkKind, NodeId, PhysicalNetwork};

const FLOW_TOL: f64 = 1e-9;

/// A constraint broken by a plan.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Plan shape does not match the request or the network.
    Structure(String),
    /// C1: ECN compute capacity.
    Compute { node: NodeId, required: f64, capacity: f64 },
    /// C2: link bandwidth.
    Bandwidth { link: LinkId, required: f64, capacity: f64 },
    /// Switch flow-table capacity.
    SwitchTable { node: NodeId, required: f64, capacity: f64 },
    /// C3: end-to-end delay bound.
    Delay { delay: f64, bound: f64 },
    /// C4: each instance is a whole VNF on one ECN, one instance per ECN per stage.
    Placement { stage: usize, instance: usize, reason: String },
}

impl Violation {
    pub fn constraint(&self) -> &'static str {
        match self {
            Violation::Structure(_) => "structure",
            Violation::Compute { .. } => "C1",
            Violation::Bandwidth { .. } => "C2",
            Violation::SwitchTable { .. } => "switch",
            Violation::Delay { .. } => "C3",
            Violation::Placement { .. } => "C4",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Structure(m) => write!(f, "structure: {m}"),
            Violation::Compute { node, required, capacity } => {
                write!(f, "C1 on {node}: {required} > {capacity}")
            }
            Violation::Bandwidth { link, required, capacity } => {
                write!(f, "C2 on {link}: {required} > {capacity}")
            }
            Violation::SwitchTable { node, required, capacity } => {
                write!(f, "flow table on {node}: {required} > {capacity}")
            }
            Violation::Delay { delay, bound } => write!(f, "C3: delay {delay} > {bound}"),
            Violation::Placement { stage, instance, reason } => {
                write!(f, "C4 stage {stage} instance {instance}: {reason}")
            }
        }
    }
}

/// Load a plan adds to each resource, on the exact load grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Footprint {
    pub cpu: BTreeMap<NodeId, f64>,
    pub links: BTreeMap<LinkId, f64>,
    pub switches: BTreeMap<NodeId, f64>,
}

impl Footprint {
    /// Requires every referenced node and link to exist.
    pub fn of(plan: &DeploymentPlan, net: &PhysicalNetwork) -> Result<Self, ChainError> {
        let mut fp = Footprint::default();
        for inst in plan.instances() {
            if inst.host.0 >= net.node_count() {
                return Err(ChainError::MalformedPlan(format!("unknown host {}", inst.host)));
            }
            *fp.cpu.entry(inst.host).or_default() += quantize(inst.allocated_cpu);
        }
        for r in &plan.routes {
            if r.path.links.is_empty() {
                continue;
            }
            if !r.path.is_valid_in(net) {
                return Err(ChainError::MalformedPlan(format!("invalid path {:?}", r.path.nodes)));
            }
            let bw = quantize(r.bandwidth);
            for &l in &r.path.links {
                *fp.links.entry(l).or_default() += bw;
            }
            for &n in &r.path.nodes {
                if !net.node(n).is_ecn() {
                    *fp.switches.entry(n).or_default() += 1.0;
                }
            }
        }
        Ok(fp)
    }

    /// Capacity violations if this footprint were added to `net`.
    pub fn violations(&self, net: &PhysicalNetwork) -> Vec<Violation> {
        let mut out = Vec::new();
        for (&node, &add) in &self.cpu {
            let n = net.node(node);
            if n.compute_load + add > n.compute_capacity {
                out.push(Violation::Compute {
                    node,
                    required: n.compute_load + add,
                    capacity: n.compute_capacity,
                });
            }
        }
        for (&link, &add) in &self.links {
            let l = net.link(link);
            if l.load + add > l.bandwidth {
                out.push(Violation::Bandwidth { link, required: l.load + add, capacity: l.bandwidth });
            }
        }
        for (&node, &add) in &self.switches {
            let n = net.node(node);
            if n.switch_load + add > n.switch_capacity {
                out.push(Violation::SwitchTable {
                    node,
                    required: n.switch_load + add,
                    capacity: n.switch_capacity,
                });
            }
        }
        out
    }
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= FLOW_TOL * a.abs().max(b.abs()).max(1.0)
}

fn structural_violations(
    plan: &DeploymentPlan,
    req: &ServiceChainRequest,
    net: &PhysicalNetwork,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut bad = |m: String| out.push(Violation::Structure(m));
    let m = req.chain_len();
    if plan.chain_id != req.id {
        bad(format!("plan for chain {} checked against request {}", plan.chain_id, req.id));
    }
    if plan.stages.len() != m {
        bad(format!("{} stages planned for a chain of length {m}", plan.stages.len()));
        return out;
    }
    for n in [req.ingress, req.egress] {
        if n.0 >= net.node_count() {
            bad(format!("request endpoint {n} not in network"));
            return out;
        }
    }
    for (s, stage) in plan.stages.iter().enumerate() {
        if stage.is_empty() {
            bad(format!("stage {} has no instances", s + 1));
            return out;
        }
        for (j, inst) in stage.iter().enumerate() {
            if inst.stage != s + 1 || inst.instance != j || inst.chain_id != plan.chain_id {
                bad(format!("instance {j} of stage {} is mislabelled", s + 1));
            }
            if inst.host.0 >= net.node_count() {
                bad(format!("instance {j} of stage {} on unknown host {}", s + 1, inst.host));
                return out;
            }
            if !(inst.share >= 0.0 && inst.share <= 1.0 + FLOW_TOL) {
                bad(format!("instance {j} of stage {} has share {}", s + 1, inst.share));
            }
        }
    }
    if plan.splits.boundaries.len() != m + 1 {
        bad(format!("{} split boundaries for {} stages", plan.splits.boundaries.len(), m));
        return out;
    }
    for b in 0..=m {
        let mat = &plan.splits.boundaries[b];
        let (rows, cols) = (plan.width(b), plan.width(b + 1));
        if mat.len() != rows || mat.iter().any(|r| r.len() != cols) {
            bad(format!("boundary {b} split matrix is not {rows}x{cols}"));
            return out;
        }
        if mat.iter().flatten().any(|x| !(*x >= 0.0 && x.is_finite())) {
            bad(format!("boundary {b} has a negative or non-finite ratio"));
        }
        let total: f64 = mat.iter().flatten().sum();
        if !rel_close(total, 1.0) {
            bad(format!("boundary {b} carries {total} of the flow"));
        }
    }
    // Conservation through every instance.
    for s in 1..=m {
        for j in 0..plan.width(s) {
            let inflow: f64 = plan.splits.boundaries[s - 1].iter().map(|row| row[j]).sum();
            let outflow: f64 = plan.splits.boundaries[s][j].iter().sum();
            let share = plan.stages[s - 1][j].share;
            if !rel_close(inflow, outflow) || !rel_close(inflow, share) {
                bad(format!(
                    "stage {s} instance {j}: inflow {inflow}, outflow {outflow}, share {share}"
                ));
            }
        }
    }
    for r in &plan.routes {
        if r.boundary > m || r.from >= plan.width(r.boundary) || r.to >= plan.width(r.boundary + 1)
        {
            bad(format!("route ({}, {}, {}) out of range", r.boundary, r.from, r.to));
            continue;
        }
        if !r.path.is_valid_in(net) {
            bad(format!("route path {:?} is not a simple path", r.path.nodes));
            continue;
        }
        let (src, dst) = (plan.host(req, r.boundary, r.from), plan.host(req, r.boundary + 1, r.to));
        if r.path.source() != src || r.path.target() != dst {
            bad(format!("route on boundary {} does not join {src} and {dst}", r.boundary));
        }
        if r.path.links.iter().any(|&l| net.link(l).kind != LinkKind::Optical) {
            bad(format!("route on boundary {} uses a wireless link", r.boundary));
        }
        if !(r.bandwidth >= 0.0 && r.bandwidth.is_finite()) {
            bad(format!("route on boundary {} has bandwidth {}", r.boundary, r.bandwidth));
        }
    }
    for b in 0..=m {
        for j in 0..plan.width(b) {
            for k in 0..plan.width(b + 1) {
                let xi = plan.splits.get(b, j, k);
                let want = xi * req.bandwidth_demand;
                let routed: f64 = plan.routes_between(b, j, k).map(|r| r.bandwidth).sum();
                let has_route = plan.routes_between(b, j, k).next().is_some();
                let same_host = plan.host(req, b, j) == plan.host(req, b + 1, k);
                if xi > 0.0 && !has_route && !same_host {
                    bad(format!("boundary {b} pair ({j}, {k}) has flow but no route"));
                } else if has_route && !rel_close(routed, want) {
                    bad(format!("boundary {b} pair ({j}, {k}) routes {routed} of {want} bit/s"));
                }
            }
        }
    }
    out
}

fn placement_violations(plan: &DeploymentPlan, net: &PhysicalNetwork) -> Vec<Violation> {
    let mut out = Vec::new();
    for (s, stage) in plan.stages.iter().enumerate() {
        for (j, inst) in stage.iter().enumerate() {
            let reason = if !net.node(inst.host).is_ecn() {
                Some(format!("host {} is not an edge computing node", inst.host))
            } else if stage[..j].iter().any(|o| o.host == inst.host) {
                Some(format!("host {} already carries an instance of this stage", inst.host))
            } else if !(inst.allocated_cpu >= 0.0 && inst.allocated_cpu.is_finite()) {
                Some(format!("allocated cpu {}", inst.allocated_cpu))
            } else {
                None
            };
            if let Some(reason) = reason {
                out.push(Violation::Placement { stage: s + 1, instance: j, reason });
            }
        }
    }
    out
}

/// Checks C1-C4 (plus switch tables and plan shape) against the current loads
/// of `net`, returning every violation found.
pub fn check_feasibility(
    plan: &DeploymentPlan,
    req: &ServiceChainRequest,
    net: &PhysicalNetwork,
) -> Result<(), Vec<Violation>> {
    let mut out = structural_violations(plan, req, net);
    if !out.is_empty() {
        return Err(out);
    }
    out.extend(placement_violations(plan, net));
    match Footprint::of(plan, net) {
        Ok(fp) => out.extend(fp.violations(net)),
        Err(e) => out.push(Violation::Structure(e.to_string())),
    }
    match end_to_end_delay(plan, req, net) {
        Ok(d) if d > req.delay_bound => out.push(Violation::Delay { delay: d, bound: req.delay_bound }),
        Ok(_) => {}
        Err(e) => out.push(Violation::Structure(e.to_string())),
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Worst-case ingress-to-egress delay over every instance chain carrying
/// flow: per link `bits / bandwidth + propagation`, per instance
/// `cpu_demand * share / allocated_cpu`.
pub fn end_to_end_delay(
    plan: &DeploymentPlan,
    req: &ServiceChainRequest,
    net: &PhysicalNetwork,
) -> Result<f64, ChainError> {
    let m = req.chain_len();
    if plan.stages.len() != m || plan.splits.boundaries.len() != m + 1 {
        return Err(ChainError::MalformedPlan("stage count does not match request".into()));
    }
    // finish[j]: latest completion time at instance j of the current stage.
    let mut finish = vec![0.0f64];
    for b in 0..=m {
        let next_width = plan.width(b + 1);
        let mut arrive = vec![f64::NEG_INFINITY; next_width];
        for (j, &fj) in finish.iter().enumerate() {
            if fj == f64::NEG_INFINITY {
                continue;
            }
            for (k, slot) in arrive.iter_mut().enumerate() {
                if plan.splits.get(b, j, k) <= 0.0 {
                    continue;
                }
                let mut transit = 0.0f64;
                for r in plan.routes_between(b, j, k) {
                    let bits = 8.0 * req.data_size * r.bandwidth / req.bandwidth_demand;
                    let t: f64 = r
                        .path
                        .links
                        .iter()
                        .map(|&l| {
                            let link = net.link(l);
                            bits / link.bandwidth + link.prop_delay
                        })
                        .sum();
                    transit = transit.max(t);
                }
                *slot = slot.max(fj + transit);
            }
        }
        if b < m {
            for (k, a) in arrive.iter_mut().enumerate() {
                if *a == f64::NEG_INFINITY {
                    continue;
                }
                let inst = &plan.stages[b][k];
                if !(inst.allocated_cpu > 0.0) {
                    return Err(ChainError::ZeroAllocatedCpu { stage: b + 1, instance: k });
                }
                *a += req.cpu_demand * inst.share / inst.allocated_cpu;
            }
        }
        finish = arrive;
    }
    Ok(finish[0].max(0.0))
}

/// Adds the plan's allocations to `net`. Atomic: on any capacity violation
/// nothing is changed.
pub fn apply_plan(net: &mut PhysicalNetwork, plan: &DeploymentPlan) -> Result<(), ChainError> {
    let fp = Footprint::of(plan, net)?;
    let violations = fp.violations(net);
    if !violations.is_empty() {
        return Err(ChainError::Infeasible(violations));
    }
    for (&n, &c) in &fp.cpu {
        net.adjust_compute(n, c);
    }
    for (&l, &b) in &fp.links {
        net.adjust_link(l, b);
    }
    for (&n, &e) in &fp.switches {
        net.adjust_switch(n, e);
    }
    Ok(())
}

/// Removes a previously applied plan's allocations. Atomic.
pub fn release_plan(net: &mut PhysicalNetwork, plan: &DeploymentPlan) -> Result<(), ChainError> {
    let fp = Footprint::of(plan, net)?;
    let short = fp
        .cpu
        .iter()
        .find(|(&n, &c)| net.node(n).compute_load < c)
        .map(|(n, _)| n.to_string())
        .or_else(|| fp.links.iter().find(|(&l, &b)| net.link(l).load < b).map(|(l, _)| l.to_string()))
        .or_else(|| {
            fp.switches.iter().find(|(&n, &e)| net.node(n).switch_load < e).map(|(n, _)| n.to_string())
        });
    if let Some(what) = short {
        return Err(ChainError::NotApplied(format!("load on {what} is below the plan's share")));
    }
    for (&n, &c) in &fp.cpu {
        net.adjust_compute(n, -c);
    }
    for (&l, &b) in &fp.links {
        net.adjust_link(l, -b);
    }
    for (&n, &e) in &fp.switches {
        net.adjust_switch(n, -e);
    }
    Ok(())
}
