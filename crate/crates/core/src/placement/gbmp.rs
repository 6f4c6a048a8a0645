use super::builder::{clean_ratios, PlanBuilder, SLIVER};
use super::{CandidateSet, Placer, RejectReason, CPU_MARGIN};
use crate::chain::{DeploymentPlan, ServiceChainRequest};
use crate::solvers::{greedy_bisection_minmax, SolverError, SplitCandidate, SplitProblem};
use crate::topology::{NodeId, Path, PhysicalNetwork};

const ROUTING_ATTEMPTS: usize = 4;

/// Cached hop paths ordered by hop count, then widest residual first.
fn ordered_paths(placer: &mut Placer, b: &PlanBuilder, from: NodeId, to: NodeId) -> Vec<Path> {
    if from == to {
        return vec![Path::trivial(from)];
    }
    let mut paths = placer.cache.k_hop(&b.work, from, to).to_vec();
    paths.sort_by(|x, y| x.hops().cmp(&y.hops()).then(b.bottleneck(y).total_cmp(&b.bottleneck(x))));
    paths
}

pub(super) fn plan(
    placer: &mut Placer,
    req: &ServiceChainRequest,
    net: &PhysicalNetwork,
) -> Result<DeploymentPlan, RejectReason> {
    let demand = placer.params.stage_cpu(req);
    let pool_size = placer.params.pool_size();
    let mut b = PlanBuilder::new(req, net, demand);
    let last_stage = req.chain_len();

    while b.stage() <= last_stage {
        let is_last = b.stage() == last_stage;
        let prev_hosts = b.prev_hosts();
        let spare: f64 = b.work.ecns().map(|n| b.cpu_residual(n.id)).sum();
        if spare < demand {
            return Err(RejectReason::NoCapacity);
        }
        // A candidate must be able to take an even share of both the stage's
        // compute and its traffic, so any full pool can absorb the whole stage.
        let even = 1.0 / pool_size as f64;
        let min_room = demand * even;
        let ranked = CandidateSet::rank_with(
            &placer.metrics,
            &mut placer.cache,
            &b.work,
            &prev_hosts,
            usize::MAX,
            min_room,
        );
        if ranked.candidates.is_empty() {
            let roomy = b.work.ecns().any(|n| b.cpu_residual(n.id) > min_room);
            return Err(if roomy { RejectReason::NoPath } else { RejectReason::NoCapacity });
        }

        // Share of the total flow each candidate can receive over the network.
        let bw = req.bandwidth_demand;
        let mut pool: Vec<NodeId> = Vec::with_capacity(pool_size);
        let mut reach: Vec<f64> = Vec::with_capacity(pool_size);
        for k in ranked.hosts() {
            let mut legs: Vec<(Vec<Path>, f64)> =
                b.prev().iter().map(|&(h, r)| (ordered_paths(placer, &b, h, k), r * bw)).collect();
            if is_last {
                legs.push((ordered_paths(placer, &b, k, req.egress), bw));
            }
            let legs: Vec<(&[Path], f64)> = legs.iter().map(|(p, f)| (p.as_slice(), *f)).collect();
            let x = b.joint_capacity(&[], &legs, 1.0);
            if x >= even {
                pool.push(k);
                reach.push(x);
                if pool.len() == pool_size {
                    break;
                }
            }
        }
        if pool.is_empty() {
            return Err(RejectReason::NoPath);
        }

        let mean_util =
            b.work.ecns().map(|n| n.compute_utilization()).sum::<f64>() / b.work.ecns().count() as f64;
        let best = b.work.node(pool[0]);
        let mut single = (best.compute_load + demand) / best.compute_capacity <= mean_util
            && b.cpu_residual(pool[0]) >= demand
            && reach[0] >= 1.0;

        let mut placed = false;
        for _ in 0..ROUTING_ATTEMPTS {
            let ratios = if single {
                let mut r = vec![0.0; pool.len()];
                r[0] = 1.0;
                r
            } else {
                let problem = SplitProblem {
                    candidates: pool
                        .iter()
                        .map(|&k| {
                            let n = b.work.node(k);
                            let capacity = (n.compute_capacity - CPU_MARGIN).max(n.compute_load);
                            SplitCandidate { load: n.compute_load, capacity, unit_cost: 0.0 }
                        })
                        .collect(),
                    demand,
                    link_caps: reach.iter().map(|r| (r * demand).min(demand)).collect(),
                    mode: placer.params.load_mode,
                };
                match greedy_bisection_minmax(&problem, placer.params.bisection_tol) {
                    Ok(s) => s.ratios,
                    Err(SolverError::Infeasible) => {
                        let cpu_room: f64 = pool.iter().map(|&k| b.cpu_residual(k)).sum();
                        return Err(if cpu_room < demand {
                            RejectReason::NoCapacity
                        } else {
                            RejectReason::NoPath
                        });
                    }
                    Err(SolverError::InvalidProblem(_)) => return Err(RejectReason::NoCapacity),
                }
            };
            let mut ratios = ratios;
            clean_ratios(&mut ratios);

            let mut trial = b.clone();
            match route_stage(placer, &mut trial, &pool, &ratios) {
                Ok(flow) => {
                    trial.place_stage(&pool, flow);
                    b = trial;
                    placed = true;
                    break;
                }
                Err(k) => {
                    if single {
                        single = false;
                    } else {
                        reach[k] = ratios[k] * 0.5;
                    }
                }
            }
        }
        if !placed {
            return Err(RejectReason::NoPath);
        }
    }

    let egress = req.egress;
    b.finish(|b, j, host, bandwidth| {
        let paths = ordered_paths(placer, b, host, egress);
        b.route_greedy(j, 0, bandwidth, &paths)
    })
}

/// Routes the new shares `ratios` from the previous instances, filling
/// same-host pairs first and then the remaining pairs in order of hop
/// distance, each as far as the network allows. Returns the flow matrix
/// (fractions of total traffic), or the candidate left most short of its share.
fn route_stage(
    placer: &mut Placer,
    b: &mut PlanBuilder,
    pool: &[NodeId],
    ratios: &[f64],
) -> Result<Vec<Vec<f64>>, usize> {
    let prev = b.prev().to_vec();
    let bw = b.req.bandwidth_demand;
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for (j, &(h, _)) in prev.iter().enumerate() {
        for (k, &host) in pool.iter().enumerate() {
            if ratios[k] > 0.0 {
                pairs.push((placer.metrics.hops[h.0][host.0], j, k));
            }
        }
    }
    pairs.sort_unstable();
    // Bookkeeping in bit/s so each matrix entry matches its routes exactly.
    let mut supply: Vec<f64> = prev.iter().map(|p| p.1 * bw).collect();
    let mut want: Vec<f64> = ratios.iter().map(|r| r * bw).collect();
    let mut sent = vec![vec![0.0; pool.len()]; prev.len()];
    for &(_, j, k) in &pairs {
        let f = supply[j].min(want[k]);
        if f <= 0.0 {
            continue;
        }
        let paths = ordered_paths(placer, b, prev[j].0, pool[k]);
        let moved = f - b.route_upto(j, k, f, &paths);
        sent[j][k] += moved;
        supply[j] -= moved;
        want[k] -= moved;
    }
    let (worst, short) =
        want.iter().copied().enumerate().fold((0, 0.0), |acc, (k, w)| if w > acc.1 { (k, w) } else { acc });
    if short > SLIVER * bw {
        return Err(worst);
    }
    // Rounding residue rides along with each row's largest flow.
    for (j, row) in sent.iter_mut().enumerate() {
        if supply[j] > 0.0 {
            let k = (0..row.len()).max_by(|&a, &c| row[a].total_cmp(&row[c])).unwrap_or(0);
            let paths = ordered_paths(placer, b, prev[j].0, pool[k]);
            if b.route_upto(j, k, supply[j], &paths) > 0.0 {
                return Err(k);
            }
            row[k] += supply[j];
        }
    }
    let flow = sent.into_iter().map(|row| row.into_iter().map(|x| x / bw).collect()).collect();
    Ok(flow)
}
