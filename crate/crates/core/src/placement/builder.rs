use std::collections::HashMap;

use super::{RejectReason, CPU_MARGIN, LINK_MARGIN};
use crate::chain::{DeploymentPlan, Route, ServiceChainRequest, SplitRatios, VnfInstance};
use crate::topology::{quantize, LinkId, NodeId, Path, PhysicalNetwork};

/// Fractions below this are dropped from split vectors before routing.
pub(crate) const SLIVER: f64 = 1e-9;

/// Incrementally assembles a plan while charging its loads to a private copy
/// of the network, so later stages see the residuals left by earlier ones.
#[derive(Debug, Clone)]
pub(crate) struct PlanBuilder<'r> {
    pub(crate) req: &'r ServiceChainRequest,
    pub(crate) work: PhysicalNetwork,
    stage_cpu: f64,
    stages: Vec<Vec<VnfInstance>>,
    boundaries: Vec<Vec<Vec<f64>>>,
    routes: Vec<Route>,
    prev: Vec<(NodeId, f64)>,
}

impl<'r> PlanBuilder<'r> {
    pub(crate) fn new(req: &'r ServiceChainRequest, net: &PhysicalNetwork, stage_cpu: f64) -> Self {
        Self {
            req,
            work: net.clone(),
            stage_cpu,
            stages: Vec::new(),
            boundaries: Vec::new(),
            routes: Vec::new(),
            prev: vec![(req.ingress, 1.0)],
        }
    }

    /// Hosts and traffic shares of the most recently placed stage (the
    /// ingress before stage 1).
    pub(crate) fn prev(&self) -> &[(NodeId, f64)] {
        &self.prev
    }

    pub(crate) fn prev_hosts(&self) -> Vec<NodeId> {
        self.prev.iter().map(|p| p.0).collect()
    }

    /// 1-based index of the stage being placed.
    pub(crate) fn stage(&self) -> usize {
        self.stages.len() + 1
    }

    pub(crate) fn boundary(&self) -> usize {
        self.stages.len()
    }

    pub(crate) fn link_residual(&self, l: LinkId) -> f64 {
        let link = self.work.link(l);
        (link.bandwidth - link.load - LINK_MARGIN).max(0.0)
    }

    pub(crate) fn cpu_residual(&self, n: NodeId) -> f64 {
        let node = self.work.node(n);
        (node.compute_capacity - node.compute_load - CPU_MARGIN).max(0.0)
    }

    fn switch_room(&self, path: &Path) -> bool {
        path.nodes.iter().all(|&n| {
            let node = self.work.node(n);
            node.is_ecn() || node.switch_load + 1.0 <= node.switch_capacity
        })
    }

    /// Planning bottleneck: infinite for a trivial path, zero when a switch
    /// on the path has no free flow entry.
    pub(crate) fn bottleneck(&self, path: &Path) -> f64 {
        if !self.switch_room(path) {
            return 0.0;
        }
        path.links.iter().map(|&l| self.link_residual(l)).fold(f64::INFINITY, f64::min)
    }

    /// Greedily places `amount` over `paths` on the residuals in `scratch`
    /// (seeded lazily from the working network); false if it does not fit.
    fn fill(&self, paths: &[Path], amount: f64, scratch: &mut HashMap<LinkId, f64>) -> bool {
        let mut remaining = amount;
        for p in paths {
            if remaining <= 0.0 {
                break;
            }
            if p.links.is_empty() {
                return true;
            }
            if !self.switch_room(p) {
                continue;
            }
            let cap = p
                .links
                .iter()
                .map(|l| *scratch.get(l).unwrap_or(&self.link_residual(*l)))
                .fold(f64::INFINITY, f64::min);
            let take = remaining.min(cap);
            if take > 0.0 {
                for &l in &p.links {
                    let r = scratch.entry(l).or_insert_with(|| self.link_residual(l));
                    *r -= take;
                }
                remaining -= take;
            }
        }
        remaining <= 0.0
    }

    /// Largest `x` in `[0, upper]` such that, after the `fixed` amounts, every
    /// leg in `legs` can carry `factor * x` over its paths at the same time.
    pub(crate) fn joint_capacity(&self, fixed: &[(&[Path], f64)], legs: &[(&[Path], f64)], upper: f64) -> f64 {
        let fits = |x: f64| {
            let mut scratch = HashMap::new();
            fixed.iter().all(|(p, a)| self.fill(p, *a, &mut scratch))
                && legs.iter().all(|(p, f)| self.fill(p, f * x, &mut scratch))
        };
        if !(upper > 0.0) || !fits(0.0) {
            return 0.0;
        }
        if fits(upper) {
            return upper;
        }
        let (mut lo, mut hi) = (0.0, upper);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    pub(crate) fn add_route(&mut self, from: usize, to: usize, path: &Path, bandwidth: f64) {
        if path.links.is_empty() {
            return;
        }
        let q = quantize(bandwidth);
        for &l in &path.links {
            self.work.adjust_link(l, q);
        }
        for &n in &path.nodes {
            if !self.work.node(n).is_ecn() {
                self.work.adjust_switch(n, 1.0);
            }
        }
        self.routes.push(Route { boundary: self.boundary(), from, to, path: path.clone(), bandwidth });
    }

    /// Carries as much of `bandwidth` as fits from `from` to `to` by filling
    /// `paths` in order; returns the amount left over.
    pub(crate) fn route_upto(&mut self, from: usize, to: usize, bandwidth: f64, paths: &[Path]) -> f64 {
        let mut remaining = bandwidth;
        for p in paths {
            if remaining <= 0.0 {
                break;
            }
            let cap = self.bottleneck(p);
            let amount = remaining.min(cap);
            if amount <= 0.0 || (amount < remaining && amount < SLIVER * bandwidth) {
                continue;
            }
            self.add_route(from, to, p, amount);
            remaining -= amount;
        }
        remaining.max(0.0)
    }

    /// Carries all of `bandwidth` from `from` to `to` by filling `paths` in order.
    pub(crate) fn route_greedy(
        &mut self,
        from: usize,
        to: usize,
        bandwidth: f64,
        paths: &[Path],
    ) -> Result<(), RejectReason> {
        if self.route_upto(from, to, bandwidth, paths) > 0.0 {
            Err(RejectReason::NoPath)
        } else {
            Ok(())
        }
    }

    /// Splits `bandwidth` evenly over every path; fails if any share does not fit.
    pub(crate) fn route_equal(
        &mut self,
        from: usize,
        to: usize,
        bandwidth: f64,
        paths: &[Path],
    ) -> Result<(), RejectReason> {
        if paths.is_empty() {
            return Err(RejectReason::NoPath);
        }
        let share = bandwidth / paths.len() as f64;
        for p in paths {
            if self.bottleneck(p) < share {
                return Err(RejectReason::NoPath);
            }
            self.add_route(from, to, p, share);
        }
        Ok(())
    }

    /// Closes the current stage. `flow[j][k]` is the fraction of total traffic
    /// sent from previous instance `j` to `hosts[k]`; routes for this boundary
    /// must already use those column indices. Zero-flow columns are dropped.
    pub(crate) fn place_stage(&mut self, hosts: &[NodeId], flow: Vec<Vec<f64>>) {
        debug_assert_eq!(flow.len(), self.prev.len());
        let shares: Vec<f64> = (0..hosts.len()).map(|k| flow.iter().map(|row| row[k]).sum()).collect();
        let keep: Vec<usize> = (0..hosts.len()).filter(|&k| shares[k] > 0.0).collect();
        let mut remap = vec![usize::MAX; hosts.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let b = self.boundary();
        for r in self.routes.iter_mut().filter(|r| r.boundary == b) {
            r.to = remap[r.to];
        }
        let stage = self.stage();
        let mut instances = Vec::with_capacity(keep.len());
        for (idx, &k) in keep.iter().enumerate() {
            let allocated = shares[k] * self.stage_cpu;
            self.work.adjust_compute(hosts[k], quantize(allocated));
            instances.push(VnfInstance {
                chain_id: self.req.id,
                stage,
                instance: idx,
                host: hosts[k],
                share: shares[k],
                allocated_cpu: allocated,
            });
        }
        self.boundaries.push(flow.iter().map(|row| keep.iter().map(|&k| row[k]).collect()).collect());
        self.prev = keep.iter().map(|&k| (hosts[k], shares[k])).collect();
        self.stages.push(instances);
    }

    /// Routes every last-stage instance to the egress with `router`, then
    /// returns the finished plan.
    pub(crate) fn finish(
        mut self,
        mut router: impl FnMut(&mut Self, usize, NodeId, f64) -> Result<(), RejectReason>,
    ) -> Result<DeploymentPlan, RejectReason> {
        let prev = self.prev.clone();
        let total = self.req.bandwidth_demand;
        for (j, &(host, share)) in prev.iter().enumerate() {
            router(&mut self, j, host, share * total)?;
        }
        self.boundaries.push(prev.iter().map(|&(_, s)| vec![s]).collect());
        Ok(DeploymentPlan {
            chain_id: self.req.id,
            stages: self.stages,
            splits: SplitRatios { boundaries: self.boundaries },
            routes: self.routes,
        })
    }
}

/// Drops fractions below [`SLIVER`] and rescales the rest to sum to 1.
pub(crate) fn clean_ratios(ratios: &mut [f64]) {
    for r in ratios.iter_mut() {
        if *r < SLIVER {
            *r = 0.0;
        }
    }
    let total: f64 = ratios.iter().sum();
    if total > 0.0 {
        for r in ratios.iter_mut() {
            *r /= total;
        }
    }
}
