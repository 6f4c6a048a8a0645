use super::builder::PlanBuilder;
use super::{node_weight_with, Placer, RejectReason};
use crate::chain::{DeploymentPlan, ServiceChainRequest};
use crate::topology::{NodeId, Path, PhysicalNetwork};

fn equal_cost_paths(placer: &mut Placer, net: &PhysicalNetwork, a: NodeId, b: NodeId) -> Vec<Path> {
    if a == b {
        vec![Path::trivial(a)]
    } else {
        placer.cache.min_hop(net, a, b).to_vec()
    }
}

/// One instance per stage on the highest-weight ECN with room for the whole
/// stage; traffic is split evenly over all minimum-hop paths.
pub(super) fn plan(
    placer: &mut Placer,
    req: &ServiceChainRequest,
    net: &PhysicalNetwork,
) -> Result<DeploymentPlan, RejectReason> {
    let demand = placer.params.stage_cpu(req);
    let bw = req.bandwidth_demand;
    let mut b = PlanBuilder::new(req, net, demand);

    while b.stage() <= req.chain_len() {
        let prev = b.prev().to_vec();
        let prev_hosts = b.prev_hosts();
        let mut best: Option<(NodeId, f64)> = None;
        for n in b.work.ecns().map(|n| n.id).collect::<Vec<_>>() {
            if b.cpu_residual(n) < demand {
                continue;
            }
            let w = node_weight_with(&placer.metrics, &mut placer.cache, &b.work, n, &prev_hosts);
            if best.map_or(true, |(_, bw)| w > bw) {
                best = Some((n, w));
            }
        }
        let Some((host, _)) = best else { return Err(RejectReason::NoCapacity) };
        for (j, &(h, r)) in prev.iter().enumerate() {
            let paths = equal_cost_paths(placer, &b.work, h, host);
            b.route_equal(j, 0, r * bw, &paths)?;
        }
        b.place_stage(&[host], prev.iter().map(|&(_, r)| vec![r]).collect());
    }

    b.finish(|b, j, host, bandwidth| {
        let paths = equal_cost_paths(placer, &b.work, host, req.egress);
        b.route_equal(j, 0, bandwidth, &paths)
    })
}
