//! Tree-to-star FiWi topology generator.
//!
//! Layout rule:
//! 1. A complete tree of switching nodes, `tree_depth` levels below the root,
//!    each internal switch with `tree_fanout` children, numbered breadth first.
//!    Every child is joined to its parent by an optical link.
//! 2. The deepest level switches are star hubs and FiWi access nodes; each
//!    carries `wireless_channels * wireless_bandwidth` of access capacity.
//! 3. ECN `e` attaches to hub `e mod hubs` over an optical link; a hub takes
//!    at most `star_leaves_per_hub` ECNs.
//! 4. With `ecn_ring` set, ECNs are additionally chained into a fiber ring
//!    (`e -- e+1 mod n`), which provides the inter-ECN path diversity.
//!
//! Node ids: switches first (breadth first), then ECNs in order. Link ids:
//! tree links in child order, then ECN attachments, then ring links.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{LinkKind, NodeId, PhysicalNetwork, TopologyError};

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyConfig {
    pub ecn_count: usize,
    pub tree_depth: usize,
    pub tree_fanout: usize,
    pub star_leaves_per_hub: usize,
    /// Bits/s.
    pub optical_bandwidth: f64,
    /// Bits/s per wireless channel.
    pub wireless_bandwidth: f64,
    pub wireless_channels: usize,
    /// Cycles/s.
    pub compute_capacity_mean: f64,
    pub compute_capacity_spread: f64,
    /// Flow-table entries per switch.
    pub switch_capacity: f64,
    /// Seconds.
    pub optical_prop_delay: f64,
    pub wireless_prop_delay: f64,
    pub ecn_ring: bool,
    pub rng_seed: u64,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            ecn_count: 15,
            tree_depth: 2,
            tree_fanout: 3,
            star_leaves_per_hub: 2,
            optical_bandwidth: 10e9,
            wireless_bandwidth: 54e6,
            wireless_channels: 4,
            compute_capacity_mean: 30e9,
            compute_capacity_spread: 10e9,
            switch_capacity: 10_000.0,
            optical_prop_delay: 1e-4,
            wireless_prop_delay: 5e-4,
            ecn_ring: true,
            rng_seed: 1,
        }
    }
}

impl TopologyConfig {
    pub fn hub_count(&self) -> usize {
        self.tree_fanout.pow(self.tree_depth as u32)
    }

    pub fn switch_count(&self) -> usize {
        (0..=self.tree_depth).map(|l| self.tree_fanout.pow(l as u32)).sum()
    }

    pub fn validate(&self) -> Result<(), TopologyError> {
        let bad = |m: &str| Err(TopologyError::InvalidConfig(m.to_string()));
        if self.ecn_count == 0 {
            return bad("ecn_count must be at least 1");
        }
        if self.tree_depth > 0 && self.tree_fanout == 0 {
            return bad("tree_fanout must be at least 1 when tree_depth > 0");
        }
        if self.star_leaves_per_hub == 0 {
            return bad("star_leaves_per_hub must be at least 1");
        }
        if self.ecn_count > self.hub_count() * self.star_leaves_per_hub {
            return bad("ecn_count exceeds hub_count * star_leaves_per_hub");
        }
        for (name, v) in [
            ("optical_bandwidth", self.optical_bandwidth),
            ("wireless_bandwidth", self.wireless_bandwidth),
            ("compute_capacity_mean", self.compute_capacity_mean),
            ("switch_capacity", self.switch_capacity),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TopologyError::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.wireless_channels == 0 {
            return bad("wireless_channels must be at least 1");
        }
        if !(self.compute_capacity_spread >= 0.0)
            || self.compute_capacity_spread >= self.compute_capacity_mean
        {
            return bad("compute_capacity_spread must be in [0, mean)");
        }
        if !(self.optical_prop_delay >= 0.0) || !(self.wireless_prop_delay >= 0.0) {
            return bad("propagation delays must be nonnegative");
        }
        Ok(())
    }
}

pub fn build_tree_star(config: &TopologyConfig) -> Result<PhysicalNetwork, TopologyError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut net = PhysicalNetwork::new();
    let access = config.wireless_channels as f64 * config.wireless_bandwidth;

    let mut level: Vec<NodeId> = Vec::new();
    let root = if config.tree_depth == 0 {
        net.add_access_switch(config.switch_capacity, access)?
    } else {
        net.add_switch(config.switch_capacity)?
    };
    level.push(root);
    let mut tree_edges = Vec::new();
    for depth in 1..=config.tree_depth {
        let mut next = Vec::new();
        for &parent in &level {
            for _ in 0..config.tree_fanout {
                let child = if depth == config.tree_depth {
                    net.add_access_switch(config.switch_capacity, access)?
                } else {
                    net.add_switch(config.switch_capacity)?
                };
                tree_edges.push((parent, child));
                next.push(child);
            }
        }
        level = next;
    }
    let hubs = level;

    let lo = config.compute_capacity_mean - config.compute_capacity_spread;
    let hi = config.compute_capacity_mean + config.compute_capacity_spread;
    let ecns: Vec<NodeId> = (0..config.ecn_count)
        .map(|_| {
            let cap = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            net.add_ecn(cap)
        })
        .collect::<Result<_, _>>()?;

    let optical = |net: &mut PhysicalNetwork, a, b| {
        net.add_link(a, b, LinkKind::Optical, config.optical_bandwidth, config.optical_prop_delay)
    };
    for (parent, child) in tree_edges {
        optical(&mut net, parent, child)?;
    }
    for (e, &ecn) in ecns.iter().enumerate() {
        optical(&mut net, hubs[e % hubs.len()], ecn)?;
    }
    if config.ecn_ring && ecns.len() >= 2 {
        let n = ecns.len();
        let ring_links = if n == 2 { 1 } else { n };
        for e in 0..ring_links {
            optical(&mut net, ecns[e], ecns[(e + 1) % n])?;
        }
    }
    Ok(net)
}
