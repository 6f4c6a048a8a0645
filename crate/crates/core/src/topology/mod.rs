//! Physical substrate: edge computing nodes, switching nodes and the optical /
//! wireless links between them, plus the graph algorithms the placement
//! heuristics rely on.

mod algo;
mod dump;
mod generate;

use std::fmt;

use thiserror::Error;

pub use algo::{
    betweenness_centrality, diameter, hop_distance, hop_distances_from, k_shortest_paths,
    min_hop_paths,
};
pub use dump::to_dump;
pub use generate::{build_tree_star, TopologyConfig};

/// Loads are kept on a 1/1024 grid so that adding and removing an allocation
/// is exact in `f64` (all magnitudes stay far below 2^43).
pub const LOAD_GRID: f64 = 1024.0;

/// Snap a load amount onto the exact-arithmetic grid.
pub fn quantize(amount: f64) -> f64 {
    (amount * LOAD_GRID).round() / LOAD_GRID
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    EdgeCompute,
    Switching,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    Optical,
    Wireless,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkNode {
    pub id: NodeId,
    pub kind: NodeKind,
    /// Cycles/s; zero on switching nodes.
    pub compute_capacity: f64,
    pub compute_load: f64,
    /// Flow-table entries; zero on compute nodes.
    pub switch_capacity: f64,
    pub switch_load: f64,
    /// Aggregate wireless capacity (bits/s) of a FiWi access node, zero elsewhere.
    pub access_capacity: f64,
}

impl NetworkNode {
    pub fn is_ecn(&self) -> bool {
        self.kind == NodeKind::EdgeCompute
    }

    pub fn is_access(&self) -> bool {
        self.access_capacity > 0.0
    }

    pub fn compute_utilization(&self) -> f64 {
        if self.compute_capacity > 0.0 {
            self.compute_load / self.compute_capacity
        } else {
            0.0
        }
    }

    pub fn residual_compute(&self) -> f64 {
        (self.compute_capacity - self.compute_load).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLink {
    pub id: LinkId,
    pub endpoints: (NodeId, NodeId),
    pub kind: LinkKind,
    /// Bits/s.
    pub bandwidth: f64,
    pub load: f64,
    /// Seconds.
    pub prop_delay: f64,
}

impl NetworkLink {
    pub fn utilization(&self) -> f64 {
        self.load / self.bandwidth
    }

    pub fn residual(&self) -> f64 {
        (self.bandwidth - self.load).max(0.0)
    }

    pub fn other(&self, node: NodeId) -> NodeId {
        if self.endpoints.0 == node {
            self.endpoints.1
        } else {
            self.endpoints.0
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("invalid topology config: {0}")]
    InvalidConfig(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("self-loop on {0}")]
    SelfLoop(NodeId),
    #[error("parallel link between {0} and {1}")]
    ParallelLink(NodeId, NodeId),
    #[error("{0} is not reachable from {1}")]
    Unreachable(NodeId, NodeId),
    #[error("invalid value: {0}")]
    InvalidValue(String),
}

/// A loopless route through the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
    pub cost: f64,
}

impl Path {
    /// The zero-length path that stays on `node`.
    pub fn trivial(node: NodeId) -> Self {
        Path { nodes: vec![node], links: Vec::new(), cost: 0.0 }
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn target(&self) -> NodeId {
        *self.nodes.last().expect("path has at least one node")
    }

    pub fn hops(&self) -> usize {
        self.links.len()
    }

    /// Smallest residual bandwidth along the path; infinite for a trivial path.
    pub fn bottleneck(&self, net: &PhysicalNetwork) -> f64 {
        self.links.iter().map(|&l| net.link(l).residual()).fold(f64::INFINITY, f64::min)
    }

    /// Checks simplicity and that each listed link joins consecutive nodes.
    pub fn is_valid_in(&self, net: &PhysicalNetwork) -> bool {
        if self.nodes.is_empty() || self.links.len() + 1 != self.nodes.len() {
            return false;
        }
        let mut seen = std::collections::HashSet::new();
        if !self.nodes.iter().all(|n| n.0 < net.node_count() && seen.insert(*n)) {
            return false;
        }
        self.links.iter().enumerate().all(|(i, &l)| {
            l.0 < net.link_count() && {
                let (a, b) = net.link(l).endpoints;
                let (u, v) = (self.nodes[i], self.nodes[i + 1]);
                (a == u && b == v) || (a == v && b == u)
            }
        })
    }
}

/// Undirected substrate graph with per-element capacities and current loads.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhysicalNetwork {
    nodes: Vec<NetworkNode>,
    links: Vec<NetworkLink>,
    adjacency: Vec<Vec<(NodeId, LinkId)>>,
}

impl PhysicalNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_ecn(&mut self, compute_capacity: f64) -> Result<NodeId, TopologyError> {
        if !(compute_capacity > 0.0 && compute_capacity.is_finite()) {
            return Err(TopologyError::InvalidValue(format!(
                "compute capacity {compute_capacity} must be positive"
            )));
        }
        Ok(self.push_node(NodeKind::EdgeCompute, compute_capacity, 0.0, 0.0))
    }

    pub fn add_switch(&mut self, switch_capacity: f64) -> Result<NodeId, TopologyError> {
        self.add_access_switch(switch_capacity, 0.0)
    }

    /// A switching node that also terminates wireless access (a FiWi node).
    pub fn add_access_switch(
        &mut self,
        switch_capacity: f64,
        access_capacity: f64,
    ) -> Result<NodeId, TopologyError> {
        if !(switch_capacity > 0.0 && switch_capacity.is_finite()) || access_capacity < 0.0 {
            return Err(TopologyError::InvalidValue(format!(
                "switch capacity {switch_capacity} must be positive"
            )));
        }
        Ok(self.push_node(NodeKind::Switching, 0.0, switch_capacity, access_capacity))
    }

    fn push_node(&mut self, kind: NodeKind, cpu: f64, table: f64, access: f64) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(NetworkNode {
            id,
            kind,
            compute_capacity: cpu,
            compute_load: 0.0,
            switch_capacity: table,
            switch_load: 0.0,
            access_capacity: access,
        });
        self.adjacency.push(Vec::new());
        id
    }

    pub fn add_link(
        &mut self,
        a: NodeId,
        b: NodeId,
        kind: LinkKind,
        bandwidth: f64,
        prop_delay: f64,
    ) -> Result<LinkId, TopologyError> {
        for n in [a, b] {
            if n.0 >= self.nodes.len() {
                return Err(TopologyError::UnknownNode(n));
            }
        }
        if a == b {
            return Err(TopologyError::SelfLoop(a));
        }
        if self.link_between(a, b).is_some() {
            return Err(TopologyError::ParallelLink(a, b));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) || !(prop_delay >= 0.0) {
            return Err(TopologyError::InvalidValue(format!(
                "link bandwidth {bandwidth} / delay {prop_delay}"
            )));
        }
        let id = LinkId(self.links.len());
        self.links.push(NetworkLink { id, endpoints: (a, b), kind, bandwidth, load: 0.0, prop_delay });
        for (u, v) in [(a, b), (b, a)] {
            let adj = &mut self.adjacency[u.0];
            let pos = adj.partition_point(|&(n, _)| n < v);
            adj.insert(pos, (v, id));
        }
        Ok(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn node(&self, id: NodeId) -> &NetworkNode {
        &self.nodes[id.0]
    }

    pub fn link(&self, id: LinkId) -> &NetworkLink {
        &self.links[id.0]
    }

    pub fn nodes(&self) -> &[NetworkNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[NetworkLink] {
        &self.links
    }

    /// Neighbours of `id` with the connecting link, sorted by neighbour id.
    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, LinkId)] {
        &self.adjacency[id.0]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adjacency[id.0].len()
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.adjacency.get(a.0)?.iter().find(|&&(n, _)| n == b).map(|&(_, l)| l)
    }

    pub fn ecns(&self) -> impl Iterator<Item = &NetworkNode> + '_ {
        self.nodes.iter().filter(|n| n.is_ecn())
    }

    pub fn switches(&self) -> impl Iterator<Item = &NetworkNode> + '_ {
        self.nodes.iter().filter(|n| !n.is_ecn())
    }

    /// FiWi access nodes, where chain traffic enters and leaves.
    pub fn access_nodes(&self) -> Vec<NodeId> {
        self.nodes.iter().filter(|n| n.is_access()).map(|n| n.id).collect()
    }

    pub fn max_link_bandwidth(&self) -> f64 {
        self.links.iter().map(|l| l.bandwidth).fold(0.0, f64::max)
    }

    pub fn is_connected(&self) -> bool {
        self.nodes.is_empty() || hop_distances_from(self, NodeId(0)).iter().all(|d| d.is_some())
    }

    pub fn set_compute_load(&mut self, id: NodeId, load: f64) -> Result<(), TopologyError> {
        let node = self.nodes.get_mut(id.0).ok_or(TopologyError::UnknownNode(id))?;
        let load = quantize(load);
        if !node.is_ecn() || load < 0.0 || load > node.compute_capacity {
            return Err(TopologyError::InvalidValue(format!("compute load {load} on {id}")));
        }
        node.compute_load = load;
        Ok(())
    }

    pub fn set_switch_load(&mut self, id: NodeId, load: f64) -> Result<(), TopologyError> {
        let node = self.nodes.get_mut(id.0).ok_or(TopologyError::UnknownNode(id))?;
        let load = quantize(load);
        if node.is_ecn() || load < 0.0 || load > node.switch_capacity {
            return Err(TopologyError::InvalidValue(format!("switch load {load} on {id}")));
        }
        node.switch_load = load;
        Ok(())
    }

    pub fn set_link_load(&mut self, id: LinkId, load: f64) -> Result<(), TopologyError> {
        let link = self.links.get_mut(id.0).ok_or(TopologyError::UnknownLink(id))?;
        let load = quantize(load);
        if load < 0.0 || load > link.bandwidth {
            return Err(TopologyError::InvalidValue(format!("link load {load} on {id}")));
        }
        link.load = load;
        Ok(())
    }

    /// Zero every load field.
    pub fn reset_loads(&mut self) {
        for n in &mut self.nodes {
            n.compute_load = 0.0;
            n.switch_load = 0.0;
        }
        for l in &mut self.links {
            l.load = 0.0;
        }
    }

    // Raw, unchecked adjustments used by plan accounting; callers validate first.
    pub(crate) fn adjust_compute(&mut self, id: NodeId, delta: f64) {
        self.nodes[id.0].compute_load += delta;
    }

    pub(crate) fn adjust_switch(&mut self, id: NodeId, delta: f64) {
        self.nodes[id.0].switch_load += delta;
    }

    pub(crate) fn adjust_link(&mut self, id: LinkId, delta: f64) {
        self.links[id.0].load += delta;
    }
}
