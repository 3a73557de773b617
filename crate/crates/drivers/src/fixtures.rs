//! Committed wire documents pinning each controller dialect.
//!
//! These files are the compatibility contract between this crate and the
//! controllers it speaks to. The render tests require byte-for-byte equality
//! against the request-body fixtures, and the parsers must accept the
//! response-body fixtures, so any change to the wire format surfaces as a
//! fixture diff. They are exported so downstream tests can exercise the same
//! documents.

/// ONOS REST dialect documents.
pub mod onos {
    /// POST body installing a MAC-match forward rule.
    pub const FLOW_OUTPUT: &str = include_str!("../fixtures/onos/flow_output.json");
    /// POST body installing a wildcard drop rule.
    pub const FLOW_DROP: &str = include_str!("../fixtures/onos/flow_drop.json");
    /// Devices listing for a three-switch linear topology.
    pub const DEVICES_LINEAR3: &str = include_str!("../fixtures/onos/devices_linear3.json");
    /// Links listing for the same topology (four directed entries).
    pub const LINKS_LINEAR3: &str = include_str!("../fixtures/onos/links_linear3.json");
    /// Hosts listing for the same topology (two hosts).
    pub const HOSTS_LINEAR3: &str = include_str!("../fixtures/onos/hosts_linear3.json");
    /// Flows listing with two entries carrying counters.
    pub const FLOWS_LISTING: &str = include_str!("../fixtures/onos/flows_listing.json");
    /// Port statistics body for one device.
    pub const PORT_STATS: &str = include_str!("../fixtures/onos/port_stats.json");
}

/// OpenDaylight RESTCONF dialect documents.
pub mod odl {
    /// PUT body installing a MAC-match forward rule.
    pub const FLOW_OUTPUT: &str = include_str!("../fixtures/odl/flow_output.json");
    /// PUT body installing a wildcard drop rule.
    pub const FLOW_DROP: &str = include_str!("../fixtures/odl/flow_drop.json");
    /// Operational topology body: three switches, two tracked hosts.
    pub const TOPOLOGY_LINEAR3: &str = include_str!("../fixtures/odl/topology_linear3.json");
    /// Operational inventory body for the same three switches.
    pub const INVENTORY_LINEAR3: &str = include_str!("../fixtures/odl/inventory_linear3.json");
    /// Config datastore listing with three flows across two nodes.
    pub const CONFIG_NODES: &str = include_str!("../fixtures/odl/config_nodes.json");
    /// Operational per-flow read carrying statistics.
    pub const FLOW_STATS: &str = include_str!("../fixtures/odl/flow_stats_operational.json");
    /// Operational per-node read carrying port statistics.
    pub const NODE_OPERATIONAL: &str = include_str!("../fixtures/odl/node2_operational.json");
}
