use std::collections::HashMap;

use super::builder::{clean_ratios, PlanBuilder};
use super::{Placer, RejectReason, CPU_MARGIN};
use crate::chain::{DeploymentPlan, ServiceChainRequest};
use crate::solvers::{simplex_min_cost, SplitCandidate, SplitProblem};
use crate::topology::{k_shortest_paths, LinkKind, NodeId, Path, PhysicalNetwork};

/// Additive ranking cost: one per hop plus the link's utilization.
fn link_costs(net: &PhysicalNetwork) -> Vec<f64> {
    net.links()
        .iter()
        .map(|l| if l.kind == LinkKind::Optical { 1.0 + l.utilization() } else { f64::INFINITY })
        .collect()
}

/// Consumed share of a path's capacity, `(B - b) / B` with `B` the smallest
/// link bandwidth and `b` the smallest residual; zero for a trivial path.
fn consumed(net: &PhysicalNetwork, p: &Path) -> f64 {
    if p.links.is_empty() {
        return 0.0;
    }
    let cap = p.links.iter().map(|&l| net.link(l).bandwidth).fold(f64::INFINITY, f64::min);
    (1.0 - p.bottleneck(net) / cap).clamp(0.0, 1.0)
}

fn paths_between(net: &PhysicalNetwork, costs: &[f64], a: NodeId, b: NodeId, k: usize) -> Vec<Path> {
    if a == b {
        vec![Path::trivial(a)]
    } else {
        k_shortest_paths(net, a, b, k, costs)
    }
}

pub(super) fn plan(
    placer: &mut Placer,
    req: &ServiceChainRequest,
    net: &PhysicalNetwork,
) -> Result<DeploymentPlan, RejectReason> {
    let demand = placer.params.stage_cpu(req);
    let mp = placer.params.max_paths;
    let bw = req.bandwidth_demand;
    let mut b = PlanBuilder::new(req, net, demand);
    let last_stage = req.chain_len();
    let mut egress: HashMap<NodeId, Vec<Path>> = HashMap::new();

    while b.stage() <= last_stage {
        let is_last = b.stage() == last_stage;
        let prev = b.prev().to_vec();
        let costs = link_costs(&b.work);

        // Aggregate cost of every reachable ECN over its cheapest paths.
        let mut spare = 0.0;
        let mut scored: Vec<(f64, NodeId, Vec<Vec<Path>>, Vec<Path>)> = Vec::new();
        for n in b.work.ecns().map(|n| n.id).collect::<Vec<_>>() {
            let residual = b.cpu_residual(n);
            if residual <= 0.0 {
                continue;
            }
            spare += residual;
            let node = b.work.node(n);
            let cpu_term = node.compute_load / node.compute_capacity;
            let mut total = 0.0;
            let mut per_prev = Vec::with_capacity(prev.len());
            for &(h, r) in &prev {
                let paths = paths_between(&b.work, &costs, h, n, mp);
                match paths.first() {
                    Some(p) => total += r * (consumed(&b.work, p) + cpu_term),
                    None => break,
                }
                per_prev.push(paths);
            }
            if per_prev.len() < prev.len() {
                continue;
            }
            let out = if is_last { paths_between(&b.work, &costs, n, req.egress, mp) } else { Vec::new() };
            if is_last {
                match out.first() {
                    Some(p) => total += consumed(&b.work, p),
                    None => continue,
                }
            }
            scored.push((total, n, per_prev, out));
        }
        if spare < demand {
            return Err(RejectReason::NoCapacity);
        }
        if scored.is_empty() {
            return Err(RejectReason::NoPath);
        }
        scored.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        scored.truncate(mp);

        let pool: Vec<NodeId> = scored.iter().map(|s| s.1).collect();
        // Egress traffic already committed to each candidate (last stage only).
        let mut egress_bw = vec![0.0; pool.len()];
        let mut flow = vec![vec![0.0; pool.len()]; prev.len()];

        for (j, &(_, r)) in prev.iter().enumerate() {
            let part = r * demand;
            let mut candidates = Vec::with_capacity(pool.len());
            let mut caps = Vec::with_capacity(pool.len());
            for (k, (_, host, per_prev, out)) in scored.iter().enumerate() {
                let node = b.work.node(*host);
                let load = node.compute_load + egress_bw[k] / bw * demand;
                let capacity = (node.compute_capacity - CPU_MARGIN).max(load);
                let paths = &per_prev[j];
                let path_term = |ps: &[Path]| ps.first().map_or(1.0, |p| consumed(&b.work, p));
                let mut cost = path_term(paths) + load / node.compute_capacity;
                if is_last {
                    cost += path_term(out);
                }
                candidates.push(SplitCandidate { load, capacity, unit_cost: cost });
                let reach = if is_last {
                    b.joint_capacity(&[(out, egress_bw[k])], &[(paths, 1.0), (out, 1.0)], r * bw)
                } else {
                    b.joint_capacity(&[], &[(paths, 1.0)], r * bw)
                };
                caps.push((reach / bw * demand).min(part));
            }
            let problem = SplitProblem { candidates, demand: part, link_caps: caps, mode: placer.params.load_mode };
            let mut ratios = simplex_min_cost(&problem).map_err(|_| RejectReason::LpInfeasible)?.ratios;
            clean_ratios(&mut ratios);
            for (k, &x) in ratios.iter().enumerate() {
                if x <= 0.0 {
                    continue;
                }
                let f = r * x;
                b.route_greedy(j, k, f * bw, &scored[k].2[j])?;
                flow[j][k] = f;
                egress_bw[k] += f * bw;
            }
        }
        if is_last {
            egress = scored.iter().map(|s| (s.1, s.3.clone())).collect();
        }
        b.place_stage(&pool, flow);
    }

    b.finish(|b, j, host, bandwidth| {
        let paths = egress.remove(&host).unwrap_or_default();
        b.route_greedy(j, 0, bandwidth, &paths)
    })
}
