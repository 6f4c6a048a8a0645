use std::fmt::Write;

use super::{LinkKind, NodeKind, PhysicalNetwork};

/// Line-oriented text dump of the static network description:
///
/// ```text
/// node <id> <kind> <capacity>
/// link <id> <a> <b> <kind> <bandwidth_bps> <prop_delay_s>
/// ```
///
/// `kind` is `ecn`, `switch` or `fiwi` (a switch that terminates wireless
/// access) for nodes, `optical` or `wireless` for links. Node capacity is
/// cycles/s for ECNs and flow-table entries for switches.
pub fn to_dump(net: &PhysicalNetwork) -> String {
    let mut out = String::new();
    for n in net.nodes() {
        let (kind, cap) = match n.kind {
            NodeKind::EdgeCompute => ("ecn", n.compute_capacity),
            NodeKind::Switching if n.is_access() => ("fiwi", n.switch_capacity),
            NodeKind::Switching => ("switch", n.switch_capacity),
        };
        writeln!(out, "node {} {} {}", n.id.0, kind, cap).unwrap();
    }
    for l in net.links() {
        let kind = match l.kind {
            LinkKind::Optical => "optical",
            LinkKind::Wireless => "wireless",
        };
        writeln!(
            out,
            "link {} {} {} {} {} {}",
            l.id.0, l.endpoints.0 .0, l.endpoints.1 .0, kind, l.bandwidth, l.prop_delay
        )
        .unwrap();
    }
    out
}
