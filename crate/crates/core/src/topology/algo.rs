use std::cmp::Ordering;
use std::collections::VecDeque;

use super::{LinkId, NodeId, Path, PhysicalNetwork, TopologyError};

/// BFS hop counts from `src` to every node (`None` when unreachable).
pub fn hop_distances_from(net: &PhysicalNetwork, src: NodeId) -> Vec<Option<usize>> {
    let mut dist = vec![None; net.node_count()];
    let mut queue = VecDeque::new();
    dist[src.0] = Some(0);
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let du = dist[u.0].unwrap();
        for &(v, _) in net.neighbors(u) {
            if dist[v.0].is_none() {
                dist[v.0] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

pub fn hop_distance(net: &PhysicalNetwork, a: NodeId, b: NodeId) -> Result<usize, TopologyError> {
    for n in [a, b] {
        if n.0 >= net.node_count() {
            return Err(TopologyError::UnknownNode(n));
        }
    }
    hop_distances_from(net, a)[b.0].ok_or(TopologyError::Unreachable(b, a))
}

/// Largest finite hop distance over all node pairs.
pub fn diameter(net: &PhysicalNetwork) -> usize {
    (0..net.node_count())
        .flat_map(|s| hop_distances_from(net, NodeId(s)).into_iter().flatten())
        .max()
        .unwrap_or(0)
}

/// Unnormalized hop-count betweenness (Brandes), counting each unordered pair once.
pub fn betweenness_centrality(net: &PhysicalNetwork) -> Vec<f64> {
    let n = net.node_count();
    let mut bc = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();

    for s in 0..n {
        sigma.iter_mut().for_each(|x| *x = 0.0);
        dist.iter_mut().for_each(|x| *x = usize::MAX);
        delta.iter_mut().for_each(|x| *x = 0.0);
        preds.iter_mut().for_each(Vec::clear);
        order.clear();

        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, _) in net.neighbors(NodeId(v)) {
                let w = w.0;
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    bc.iter_mut().for_each(|x| *x /= 2.0);
    bc
}

/// Every minimum-hop path from `src` to `dst` over usable links, in
/// lexicographic node order, truncated to `limit`.
pub fn min_hop_paths(
    net: &PhysicalNetwork,
    src: NodeId,
    dst: NodeId,
    usable: impl Fn(LinkId) -> bool,
    limit: usize,
) -> Vec<Path> {
    if src == dst {
        return vec![Path::trivial(src)];
    }
    // Distances to dst so the forward walk only follows shortest-path edges.
    let n = net.node_count();
    let mut to_dst = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    to_dst[dst.0] = 0;
    queue.push_back(dst);
    while let Some(u) = queue.pop_front() {
        for &(v, l) in net.neighbors(u) {
            if usable(l) && to_dst[v.0] == usize::MAX {
                to_dst[v.0] = to_dst[u.0] + 1;
                queue.push_back(v);
            }
        }
    }
    if to_dst[src.0] == usize::MAX {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut nodes = vec![src];
    let mut links = Vec::new();
    walk_min_hop(net, dst, &to_dst, &usable, &mut nodes, &mut links, &mut out, limit);
    out
}

#[allow(clippy::too_many_arguments)]
fn walk_min_hop(
    net: &PhysicalNetwork,
    dst: NodeId,
    to_dst: &[usize],
    usable: &impl Fn(LinkId) -> bool,
    nodes: &mut Vec<NodeId>,
    links: &mut Vec<LinkId>,
    out: &mut Vec<Path>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    let u = *nodes.last().unwrap();
    if u == dst {
        out.push(Path { nodes: nodes.clone(), links: links.clone(), cost: links.len() as f64 });
        return;
    }
    for &(v, l) in net.neighbors(u) {
        if usable(l) && to_dst[v.0] + 1 == to_dst[u.0] {
            nodes.push(v);
            links.push(l);
            walk_min_hop(net, dst, to_dst, usable, nodes, links, out, limit);
            nodes.pop();
            links.pop();
        }
    }
}

/// Orders paths by cost, then lexicographically by node sequence.
fn path_order(a_cost: f64, a: &[NodeId], b_cost: f64, b: &[NodeId]) -> Ordering {
    a_cost.total_cmp(&b_cost).then_with(|| a.cmp(b))
}

fn sum_cost(links: &[LinkId], link_cost: &[f64]) -> f64 {
    links.iter().fold(0.0, |acc, l| acc + link_cost[l.0])
}

/// Dijkstra returning the cheapest path, ties resolved to the lexicographically
/// smallest node sequence. Links with non-finite cost are never used.
fn lexmin_shortest_path(
    net: &PhysicalNetwork,
    src: NodeId,
    dst: NodeId,
    link_cost: &[f64],
    blocked_nodes: &[bool],
    blocked_links: &[bool],
) -> Option<(Vec<NodeId>, Vec<LinkId>)> {
    let n = net.node_count();
    let mut best: Vec<Option<(f64, Vec<NodeId>, Vec<LinkId>)>> = vec![None; n];
    let mut done = vec![false; n];
    best[src.0] = Some((0.0, vec![src], Vec::new()));
    loop {
        let mut pick: Option<usize> = None;
        for v in 0..n {
            if done[v] {
                continue;
            }
            if let Some((c, p, _)) = &best[v] {
                let better = match pick {
                    None => true,
                    Some(u) => {
                        let (cu, pu, _) = best[u].as_ref().unwrap();
                        path_order(*c, p, *cu, pu) == Ordering::Less
                    }
                };
                if better {
                    pick = Some(v);
                }
            }
        }
        let u = pick?;
        done[u] = true;
        if u == dst.0 {
            let (_, nodes, links) = best[u].take().unwrap();
            return Some((nodes, links));
        }
        let (cu, pu, lu) = best[u].clone().unwrap();
        for &(v, l) in net.neighbors(NodeId(u)) {
            let c = link_cost[l.0];
            if done[v.0] || blocked_nodes[v.0] || blocked_links[l.0] || !c.is_finite() {
                continue;
            }
            let cand = cu + c;
            let improves = match &best[v.0] {
                None => true,
                Some((cv, pv, _)) => match cand.total_cmp(cv) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        // Compare pu + [v] against pv without allocating.
                        let ord = pu.iter().chain(std::iter::once(&v)).cmp(pv.iter());
                        ord == Ordering::Less
                    }
                },
            };
            if improves {
                let mut p = pu.clone();
                p.push(v);
                let mut ls = lu.clone();
                ls.push(l);
                best[v.0] = Some((cand, p, ls));
            }
        }
    }
}

/// Up to `k` loopless paths from `src` to `dst` in nondecreasing cost (Yen),
/// ties broken by lexicographic node sequence. `link_cost` is indexed by link
/// id; links with a non-finite cost are excluded. Costs must be nonnegative.
pub fn k_shortest_paths(
    net: &PhysicalNetwork,
    src: NodeId,
    dst: NodeId,
    k: usize,
    link_cost: &[f64],
) -> Vec<Path> {
    assert_eq!(link_cost.len(), net.link_count(), "one cost per link");
    if k == 0 {
        return Vec::new();
    }
    if src == dst {
        return vec![Path::trivial(src)];
    }
    let n = net.node_count();
    let no_nodes = vec![false; n];
    let no_links = vec![false; net.link_count()];
    let Some((nodes, links)) = lexmin_shortest_path(net, src, dst, link_cost, &no_nodes, &no_links)
    else {
        return Vec::new();
    };
    let cost = sum_cost(&links, link_cost);
    let mut accepted = vec![Path { nodes, links, cost }];
    let mut candidates: Vec<Path> = Vec::new();

    while accepted.len() < k {
        let last = accepted.last().unwrap().clone();
        for spur_idx in 0..last.nodes.len() - 1 {
            let spur = last.nodes[spur_idx];
            let root_nodes = &last.nodes[..=spur_idx];
            let mut blocked_links = no_links.clone();
            for p in &accepted {
                if p.nodes.len() > spur_idx + 1 && &p.nodes[..=spur_idx] == root_nodes {
                    blocked_links[p.links[spur_idx].0] = true;
                }
            }
            let mut blocked_nodes = no_nodes.clone();
            for &r in &root_nodes[..spur_idx] {
                blocked_nodes[r.0] = true;
            }
            if let Some((spur_nodes, spur_links)) =
                lexmin_shortest_path(net, spur, dst, link_cost, &blocked_nodes, &blocked_links)
            {
                let mut nodes = root_nodes.to_vec();
                nodes.extend_from_slice(&spur_nodes[1..]);
                let mut links = last.links[..spur_idx].to_vec();
                links.extend(spur_links);
                let cost = sum_cost(&links, link_cost);
                let known = accepted.iter().chain(candidates.iter()).any(|p| p.nodes == nodes);
                if !known {
                    candidates.push(Path { nodes, links, cost });
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        let best = (0..candidates.len())
            .min_by(|&a, &b| {
                let (pa, pb) = (&candidates[a], &candidates[b]);
                path_order(pa.cost, &pa.nodes, pb.cost, &pb.nodes)
            })
            .unwrap();
        accepted.push(candidates.swap_remove(best));
    }
    accepted
}
