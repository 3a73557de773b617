//! OpenDaylight RESTCONF driver.
//!
//! The dialect this driver speaks is pinned by the JSON documents in
//! [`crate::fixtures::odl`]. Key points:
//!
//! * node ids travel as `openflow:` + decimal datapath id, and connector ids
//!   as `openflow:{dpid}:{port}` (the `LOCAL` and `CONTROLLER` connectors are
//!   skipped);
//! * topology and statistics are read from the operational datastore, flow
//!   writes go to the config datastore, per the standard RESTCONF split;
//! * flows are PUT under a caller-chosen id, so installs are idempotent:
//!   writing the same rule twice leaves one configured flow;
//! * the flow id is a deterministic content hash over (device, table,
//!   priority, match), computed by [`flow_id`], and doubles as the flow
//!   handle, so removal needs no controller-assigned identifiers;
//! * inside flow bodies the table field is spelled `table_id` (underscore),
//!   unlike the dialect's other hyphenated keys.
//!
//! A RESTCONF 404 on a datastore read means "no data", so listings treat it
//! as empty rather than as a missing endpoint.

use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use umbrella_core::driver::{CapabilitySet, Driver, DriverConfig, DriverError};
use umbrella_core::model::{
    normalize_device_id, Action, DeviceId, FlowHandle, FlowRule, FlowStats, Host, Link, MacAddr,
    MatchFields, PortId, PortStats, TopologySnapshot,
};
use umbrella_core::time::monotonic_now_ns;

use crate::http::{parse_json, unexpected_status, HttpClient};

/// Endpoint paths, overridable through `DriverConfig.extras`.
#[derive(Clone, Debug)]
struct Paths {
    topology: String,
    nodes: String,
    nodes_config: String,
}

impl Paths {
    fn from_extras(extras: &BTreeMap<String, String>) -> Self {
        let pick = |key: &str, default: &str| {
            extras.get(key).cloned().unwrap_or_else(|| default.to_string())
        };
        Paths {
            topology: pick(
                "path.topology",
                "/restconf/operational/network-topology:network-topology",
            ),
            nodes: pick("path.nodes", "/restconf/operational/opendaylight-inventory:nodes"),
            nodes_config: pick(
                "path.nodes_config",
                "/restconf/config/opendaylight-inventory:nodes",
            ),
        }
    }
}

fn protocol(detail: impl Into<String>) -> DriverError {
    DriverError::ProtocolError(detail.into())
}

fn parse_device(text: &str) -> Result<DeviceId, DriverError> {
    normalize_device_id(text).map_err(|e| protocol(e.to_string()))
}

fn parse_mac(text: &str) -> Result<MacAddr, DriverError> {
    text.parse().map_err(|_| protocol(format!("malformed MAC {text:?}")))
}

// Wire shapes for flow bodies. Field order matters for rendered documents:
// serialization follows declaration order and the fixtures pin the bytes.

#[derive(Serialize, Deserialize)]
struct FlowDocument {
    #[serde(rename = "flow-node-inventory:flow")]
    flow: Vec<FlowObject>,
}

#[derive(Serialize, Deserialize)]
struct FlowObject {
    id: String,
    // Spelled with an underscore in this dialect, unlike every other key.
    table_id: u8,
    priority: u16,
    #[serde(rename = "idle-timeout", default)]
    idle_timeout: u32,
    #[serde(rename = "hard-timeout", default)]
    hard_timeout: u32,
    #[serde(rename = "match", default)]
    match_fields: MatchObject,
    #[serde(default)]
    instructions: Instructions,
}

#[derive(Serialize, Deserialize, Default)]
struct MatchObject {
    #[serde(rename = "in-port", default, skip_serializing_if = "Option::is_none")]
    in_port: Option<String>,
    #[serde(rename = "ethernet-match", default, skip_serializing_if = "Option::is_none")]
    ethernet: Option<EthernetMatch>,
    #[serde(rename = "ipv4-source", default, skip_serializing_if = "Option::is_none")]
    ipv4_source: Option<String>,
    #[serde(rename = "ipv4-destination", default, skip_serializing_if = "Option::is_none")]
    ipv4_destination: Option<String>,
}

#[derive(Serialize, Deserialize, Default)]
struct EthernetMatch {
    #[serde(rename = "ethernet-source", default, skip_serializing_if = "Option::is_none")]
    source: Option<MacObject>,
    #[serde(rename = "ethernet-destination", default, skip_serializing_if = "Option::is_none")]
    destination: Option<MacObject>,
    #[serde(rename = "ethernet-type", default, skip_serializing_if = "Option::is_none")]
    eth_type: Option<EthTypeObject>,
}

#[derive(Serialize, Deserialize)]
struct MacObject {
    address: String,
}

#[derive(Serialize, Deserialize)]
struct EthTypeObject {
    #[serde(rename = "type")]
    value: u32,
}

#[derive(Serialize, Deserialize, Default)]
struct Instructions {
    #[serde(default)]
    instruction: Vec<InstructionObject>,
}

#[derive(Serialize, Deserialize)]
struct InstructionObject {
    order: u32,
    #[serde(rename = "apply-actions")]
    apply_actions: ApplyActions,
}

#[derive(Serialize, Deserialize, Default)]
struct ApplyActions {
    #[serde(default)]
    action: Vec<ActionObject>,
}

#[derive(Serialize, Deserialize)]
struct ActionObject {
    order: u32,
    #[serde(rename = "output-action", default, skip_serializing_if = "Option::is_none")]
    output: Option<OutputAction>,
    #[serde(rename = "drop-action", default, skip_serializing_if = "Option::is_none")]
    drop: Option<EmptyObject>,
    #[serde(rename = "set-dl-dst-action", default, skip_serializing_if = "Option::is_none")]
    set_dl_dst: Option<MacObject>,
}

#[derive(Serialize, Deserialize, Default)]
struct EmptyObject {}

#[derive(Serialize, Deserialize)]
struct OutputAction {
    #[serde(rename = "output-node-connector")]
    connector: String,
    #[serde(rename = "max-length")]
    max_length: u32,
}

// Topology and inventory read shapes.

#[derive(Deserialize, Default)]
struct InventoryBody {
    #[serde(default)]
    nodes: InventoryNodes,
}

#[derive(Deserialize, Default)]
struct InventoryNodes {
    #[serde(default)]
    node: Vec<InventoryNode>,
}

#[derive(Deserialize)]
struct InventoryNode {
    id: String,
    #[serde(rename = "node-connector", default)]
    connectors: Vec<InventoryConnector>,
}

#[derive(Deserialize)]
struct InventoryConnector {
    id: String,
}

#[derive(Deserialize, Default)]
struct TopologyBody {
    #[serde(rename = "network-topology", default)]
    network_topology: NetworkTopology,
}

#[derive(Deserialize, Default)]
struct NetworkTopology {
    #[serde(default)]
    topology: Vec<TopologyEntry>,
}

#[derive(Deserialize)]
struct TopologyEntry {
    #[serde(default)]
    node: Vec<TopologyNode>,
    #[serde(default)]
    link: Vec<TopologyLink>,
}

#[derive(Deserialize)]
struct TopologyNode {
    #[serde(rename = "node-id")]
    node_id: String,
    #[serde(rename = "host-tracker-service:addresses", default)]
    addresses: Vec<HostAddress>,
    #[serde(rename = "host-tracker-service:attachment-points", default)]
    attachment_points: Vec<AttachmentPoint>,
}

#[derive(Deserialize)]
struct HostAddress {
    mac: String,
    #[serde(default)]
    ip: Option<String>,
}

#[derive(Deserialize)]
struct AttachmentPoint {
    #[serde(rename = "tp-id")]
    tp_id: String,
}

#[derive(Deserialize)]
struct TopologyLink {
    source: LinkSource,
    destination: LinkDestination,
}

#[derive(Deserialize)]
struct LinkSource {
    #[serde(rename = "source-node")]
    node: String,
    #[serde(rename = "source-tp")]
    tp: String,
}

#[derive(Deserialize)]
struct LinkDestination {
    #[serde(rename = "dest-node")]
    node: String,
    #[serde(rename = "dest-tp")]
    tp: String,
}

// Config datastore listing shapes.

#[derive(Deserialize, Default)]
struct ConfigNodesBody {
    #[serde(default)]
    nodes: ConfigNodes,
}

#[derive(Deserialize, Default)]
struct ConfigNodes {
    #[serde(default)]
    node: Vec<ConfigNode>,
}

#[derive(Deserialize)]
struct ConfigNode {
    id: String,
    #[serde(rename = "flow-node-inventory:table", default)]
    table: Vec<ConfigTable>,
}

#[derive(Deserialize)]
struct ConfigTable {
    id: u8,
    #[serde(default)]
    flow: Vec<FlowObject>,
}

// Operational statistics shapes.

#[derive(Deserialize)]
struct OperationalFlowBody {
    #[serde(rename = "flow-node-inventory:flow")]
    flow: Vec<OperationalFlow>,
}

#[derive(Deserialize)]
struct OperationalFlow {
    id: String,
    #[serde(rename = "opendaylight-flow-statistics:flow-statistics", default)]
    statistics: Option<FlowStatistics>,
}

#[derive(Deserialize)]
struct FlowStatistics {
    #[serde(rename = "packet-count")]
    packet_count: u64,
    #[serde(rename = "byte-count")]
    byte_count: u64,
    duration: DurationObject,
}

#[derive(Deserialize)]
struct DurationObject {
    second: u64,
}

#[derive(Deserialize, Default)]
struct OperationalNodeBody {
    #[serde(default)]
    node: Vec<OperationalNode>,
}

#[derive(Deserialize)]
struct OperationalNode {
    id: String,
    #[serde(rename = "node-connector", default)]
    connectors: Vec<OperationalConnector>,
}

#[derive(Deserialize)]
struct OperationalConnector {
    id: String,
    #[serde(
        rename = "opendaylight-port-statistics:flow-capable-node-connector-statistics",
        default
    )]
    statistics: Option<ConnectorStatistics>,
}

#[derive(Deserialize)]
struct ConnectorStatistics {
    packets: TrafficCounters,
    bytes: TrafficCounters,
}

#[derive(Deserialize)]
struct TrafficCounters {
    received: u64,
    transmitted: u64,
}

/// The deterministic flow id for a rule: `umbrella-{table}-{hash16}` where
/// `hash16` is the first 16 hex digits of
/// `sha256("{dpid}|{table}|{priority}|{match canonical key}")`.
///
/// Reinstalling a rule with the same keyed fields therefore overwrites the
/// configured flow instead of duplicating it, and the id doubles as the flow
/// handle. The scheme is part of the compatibility contract; changing it
/// orphans flows written by earlier builds.
pub fn flow_id(rule: &FlowRule) -> String {
    let input = format!(
        "{}|{}|{}|{}",
        rule.device().dpid(),
        rule.table_id(),
        rule.priority(),
        rule.match_fields().canonical_key()
    );
    let digest = Sha256::digest(input.as_bytes());
    let mut hash16 = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        hash16.push_str(&format!("{byte:02x}"));
    }
    format!("umbrella-{}-{}", rule.table_id(), hash16)
}

/// The table number embedded in an id produced by [`flow_id`], if the id
/// follows that scheme.
fn parse_umbrella_table(id: &str) -> Option<u8> {
    let rest = id.strip_prefix("umbrella-")?;
    let (table, hash) = rest.split_once('-')?;
    if hash.len() != 16 || !hash.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    table.parse().ok()
}

fn connector_name(device: DeviceId, port: u32) -> String {
    format!("{}:{}", device.render_odl(), port)
}

/// Splits a termination point id `openflow:{dpid}:{port}` into its parts.
fn parse_connector(tp_id: &str) -> Result<PortId, DriverError> {
    let (node, port) = tp_id
        .rsplit_once(':')
        .ok_or_else(|| protocol(format!("malformed termination point {tp_id:?}")))?;
    let device = parse_device(node)?;
    let port_no = port
        .parse()
        .map_err(|_| protocol(format!("malformed port in termination point {tp_id:?}")))?;
    Ok(PortId::new(device, port_no))
}

fn render_match(rule: &FlowRule) -> MatchObject {
    let m = rule.match_fields();
    let ethernet = if m.eth_src.is_some() || m.eth_dst.is_some() || m.eth_type.is_some() {
        Some(EthernetMatch {
            source: m.eth_src.map(|mac| MacObject { address: mac.to_string() }),
            destination: m.eth_dst.map(|mac| MacObject { address: mac.to_string() }),
            eth_type: m.eth_type.map(|t| EthTypeObject { value: t as u32 }),
        })
    } else {
        None
    };
    MatchObject {
        in_port: m.in_port.map(|p| connector_name(rule.device(), p)),
        ethernet,
        ipv4_source: m.ipv4_src.map(|p| p.to_string()),
        ipv4_destination: m.ipv4_dst.map(|p| p.to_string()),
    }
}

fn render_actions(actions: &[Action]) -> Vec<ActionObject> {
    actions
        .iter()
        .enumerate()
        .map(|(i, action)| {
            let order = i as u32;
            match action {
                Action::Output(port) => ActionObject {
                    order,
                    output: Some(OutputAction {
                        connector: port.to_string(),
                        max_length: 65535,
                    }),
                    drop: None,
                    set_dl_dst: None,
                },
                Action::Drop => ActionObject {
                    order,
                    output: None,
                    drop: Some(EmptyObject {}),
                    set_dl_dst: None,
                },
                Action::SetEthDst(mac) => ActionObject {
                    order,
                    output: None,
                    drop: None,
                    set_dl_dst: Some(MacObject { address: mac.to_string() }),
                },
            }
        })
        .collect()
}

/// Renders the PUT document installing `rule` under its [`flow_id`].
pub fn render_flow(rule: &FlowRule) -> String {
    let object = FlowObject {
        id: flow_id(rule),
        table_id: rule.table_id(),
        priority: rule.priority(),
        idle_timeout: rule.idle_timeout_s(),
        hard_timeout: rule.hard_timeout_s(),
        match_fields: render_match(rule),
        instructions: Instructions {
            instruction: vec![InstructionObject {
                order: 0,
                apply_actions: ApplyActions { action: render_actions(rule.actions()) },
            }],
        },
    };
    serde_json::to_string(&FlowDocument { flow: vec![object] }).expect("flow document serializes")
}

/// Parses a document produced by [`render_flow`] back into the flow id and
/// rule. The device comes from the caller because the node id lives in the
/// request URL, not the body.
pub fn parse_flow(device: DeviceId, body: &str) -> Result<(String, FlowRule), DriverError> {
    let document: FlowDocument = parse_json(body, "flow")?;
    let [object]: [FlowObject; 1] = document
        .flow
        .try_into()
        .map_err(|_| protocol("flow document must carry exactly one flow"))?;
    let rule = build_rule(device, object.table_id, &object)?;
    Ok((object.id, rule))
}

fn build_rule(
    device: DeviceId,
    table_id: u8,
    object: &FlowObject,
) -> Result<FlowRule, DriverError> {
    if object.table_id != table_id {
        return Err(protocol(format!(
            "flow {} claims table {} but sits in table {}",
            object.id, object.table_id, table_id
        )));
    }
    FlowRule::builder(device)
        .table_id(table_id)
        .priority(object.priority)
        .match_fields(object_to_match(device, &object.match_fields)?)
        .actions(object_to_actions(&object.instructions)?)
        .idle_timeout_s(object.idle_timeout)
        .hard_timeout_s(object.hard_timeout)
        .build()
        .map_err(|e| protocol(format!("flow violates the rule model: {e}")))
}

fn object_to_match(device: DeviceId, object: &MatchObject) -> Result<MatchFields, DriverError> {
    let mut m = MatchFields::default();
    if let Some(text) = &object.in_port {
        let port = parse_connector(text)?;
        if port.device != device {
            return Err(protocol(format!(
                "in-port {text:?} names a different node than the flow's device {device}"
            )));
        }
        m.in_port = Some(port.port_no);
    }
    if let Some(ethernet) = &object.ethernet {
        if let Some(source) = &ethernet.source {
            m.eth_src = Some(parse_mac(&source.address)?);
        }
        if let Some(destination) = &ethernet.destination {
            m.eth_dst = Some(parse_mac(&destination.address)?);
        }
        if let Some(eth_type) = &ethernet.eth_type {
            let value = u16::try_from(eth_type.value)
                .map_err(|_| protocol(format!("ethernet-type {} out of range", eth_type.value)))?;
            m.eth_type = Some(value);
        }
    }
    if let Some(text) = &object.ipv4_source {
        m.ipv4_src =
            Some(text.parse().map_err(|_| protocol(format!("malformed prefix {text:?}")))?);
    }
    if let Some(text) = &object.ipv4_destination {
        m.ipv4_dst =
            Some(text.parse().map_err(|_| protocol(format!("malformed prefix {text:?}")))?);
    }
    Ok(m)
}

fn object_to_actions(instructions: &Instructions) -> Result<Vec<Action>, DriverError> {
    let mut actions = Vec::new();
    if instructions.instruction.len() > 1 {
        return Err(protocol("flow carries more than one instruction"));
    }
    if let Some(instruction) = instructions.instruction.first() {
        let mut objects: Vec<&ActionObject> = instruction.apply_actions.action.iter().collect();
        objects.sort_by_key(|a| a.order);
        for object in objects {
            let action = match (&object.output, &object.drop, &object.set_dl_dst) {
                (Some(output), None, None) => {
                    let port = output.connector.parse().map_err(|_| {
                        protocol(format!("malformed output connector {:?}", output.connector))
                    })?;
                    Action::Output(port)
                }
                (None, Some(_), None) => Action::Drop,
                (None, None, Some(mac)) => Action::SetEthDst(parse_mac(&mac.address)?),
                (None, None, None) => return Err(protocol("action object names no action")),
                _ => return Err(protocol("action object names several actions")),
            };
            actions.push(action);
        }
    }
    Ok(actions)
}

/// Assembles a snapshot from the operational topology and inventory bodies.
///
/// Inventory nodes become devices and their connectors become ports (skipping
/// `LOCAL` and `CONTROLLER`); host-tracker nodes become hosts; links between
/// switch nodes become links, links touching host nodes are dropped. A host
/// or link referencing a device or port the inventory lacks breaks referential
/// closure and fails with [`DriverError::ProtocolError`].
pub fn parse_topology(
    topology_body: &str,
    inventory_body: &str,
    captured_at_ns: u64,
) -> Result<TopologySnapshot, DriverError> {
    let inventory: InventoryBody = parse_json(inventory_body, "inventory")?;
    let topology: TopologyBody = parse_json(topology_body, "topology")?;

    let mut devices: BTreeMap<DeviceId, BTreeSet<u32>> = BTreeMap::new();
    for node in &inventory.nodes.node {
        if !node.id.starts_with("openflow:") {
            continue;
        }
        let device = parse_device(&node.id)?;
        let ports = devices.entry(device).or_default();
        for connector in &node.connectors {
            let suffix = connector.id.strip_prefix(&format!("{}:", node.id)).ok_or_else(|| {
                protocol(format!(
                    "connector {:?} does not belong to node {:?}",
                    connector.id, node.id
                ))
            })?;
            if suffix == "LOCAL" || suffix == "CONTROLLER" {
                continue;
            }
            let port_no: u32 = suffix.parse().map_err(|_| {
                protocol(format!("malformed connector id {:?}", connector.id))
            })?;
            ports.insert(port_no);
        }
    }

    let mut links = BTreeSet::new();
    let mut hosts = Vec::new();
    for entry in &topology.network_topology.topology {
        for node in &entry.node {
            if !node.node_id.starts_with("host:") {
                continue;
            }
            let address = node
                .addresses
                .first()
                .ok_or_else(|| protocol(format!("host node {:?} has no addresses", node.node_id)))?;
            let attachment = node.attachment_points.first().ok_or_else(|| {
                protocol(format!("host node {:?} has no attachment points", node.node_id))
            })?;
            let mac = parse_mac(&address.mac)?;
            let ip = address.ip.as_deref().and_then(|text| text.parse::<Ipv4Addr>().ok());
            hosts.push(Host::new(mac, ip, parse_connector(&attachment.tp_id)?));
        }
        for link in &entry.link {
            if !link.source.node.starts_with("openflow:")
                || !link.destination.node.starts_with("openflow:")
            {
                continue;
            }
            for (node, tp) in [
                (&link.source.node, &link.source.tp),
                (&link.destination.node, &link.destination.tp),
            ] {
                if !tp.starts_with(&format!("{node}:")) {
                    return Err(protocol(format!(
                        "termination point {tp:?} does not belong to node {node:?}"
                    )));
                }
            }
            links.insert(Link::new(
                parse_connector(&link.source.tp)?,
                parse_connector(&link.destination.tp)?,
            ));
        }
    }

    TopologySnapshot::new(devices, links, hosts, captured_at_ns)
        .map_err(|e| protocol(format!("snapshot rejected: {e}")))
}

fn parse_config_flows(body: &str) -> Result<Vec<(DeviceId, u8, FlowObject)>, DriverError> {
    let config: ConfigNodesBody = parse_json(body, "configured nodes")?;
    let mut result = Vec::new();
    for node in config.nodes.node {
        let device = parse_device(&node.id)?;
        for table in node.table {
            for object in table.flow {
                result.push((device, table.id, object));
            }
        }
    }
    Ok(result)
}

fn parse_flow_stats_body(handle: &FlowHandle, body: &str) -> Result<FlowStats, DriverError> {
    let document: OperationalFlowBody = parse_json(body, "flow statistics")?;
    let flow = document
        .flow
        .first()
        .ok_or_else(|| protocol("flow statistics body carries no flow"))?;
    if flow.id != handle.driver_flow_id {
        return Err(protocol(format!(
            "flow statistics body is for {:?}, expected {:?}",
            flow.id, handle.driver_flow_id
        )));
    }
    let statistics = flow
        .statistics
        .as_ref()
        .ok_or_else(|| protocol(format!("flow {} carries no statistics", handle)))?;
    Ok(FlowStats {
        handle: handle.clone(),
        packets: statistics.packet_count,
        bytes: statistics.byte_count,
        duration_s: statistics.duration.second,
    })
}

fn parse_port_stats_body(device: DeviceId, body: &str) -> Result<Vec<PortStats>, DriverError> {
    let document: OperationalNodeBody = parse_json(body, "node statistics")?;
    let node = document
        .node
        .first()
        .ok_or_else(|| protocol("node statistics body carries no node"))?;
    if parse_device(&node.id)? != device {
        return Err(protocol(format!(
            "node statistics body is for {:?}, expected {}",
            node.id, device
        )));
    }
    let mut result = Vec::new();
    for connector in &node.connectors {
        let suffix = connector
            .id
            .strip_prefix(&format!("{}:", node.id))
            .ok_or_else(|| protocol(format!("malformed connector id {:?}", connector.id)))?;
        if suffix == "LOCAL" || suffix == "CONTROLLER" {
            continue;
        }
        let port_no: u32 = suffix
            .parse()
            .map_err(|_| protocol(format!("malformed connector id {:?}", connector.id)))?;
        let statistics = connector.statistics.as_ref().ok_or_else(|| {
            protocol(format!("connector {:?} carries no statistics", connector.id))
        })?;
        result.push(PortStats {
            port: PortId::new(device, port_no),
            rx_packets: statistics.packets.received,
            tx_packets: statistics.packets.transmitted,
            rx_bytes: statistics.bytes.received,
            tx_bytes: statistics.bytes.transmitted,
        });
    }
    result.sort_by_key(|s| s.port.port_no);
    Ok(result)
}

/// Driver for the OpenDaylight RESTCONF northbound interface.
pub struct OdlDriver {
    http: HttpClient,
    paths: Paths,
}

impl OdlDriver {
    /// Builds a driver from endpoint, credentials, and path overrides.
    pub fn new(config: &DriverConfig) -> Result<Self, DriverError> {
        Ok(OdlDriver {
            http: HttpClient::new(config)?,
            paths: Paths::from_extras(&config.extras),
        })
    }

    fn flow_path(&self, device: DeviceId, table: u8, flow_id: &str) -> String {
        format!(
            "{}/node/{}/flow-node-inventory:table/{}/flow/{}",
            self.paths.nodes_config,
            device.render_odl(),
            table,
            flow_id
        )
    }

    fn read_config_flows(&self) -> Result<Vec<(DeviceId, u8, FlowObject)>, DriverError> {
        let response = self.http.get(&self.paths.nodes_config)?;
        match response.status {
            s if (200..300).contains(&s) => parse_config_flows(&response.body),
            // RESTCONF answers 404 when the datastore holds no data at all.
            404 => Ok(Vec::new()),
            _ => Err(protocol(format!(
                "configured nodes endpoint returned HTTP {}",
                response.status
            ))),
        }
    }

    /// The table a handle's flow sits in: parsed from ids this driver minted,
    /// looked up in the config datastore for foreign (preinstalled) ids.
    fn locate_table(&self, handle: &FlowHandle) -> Result<u8, DriverError> {
        if let Some(table) = parse_umbrella_table(&handle.driver_flow_id) {
            return Ok(table);
        }
        for (device, table, object) in self.read_config_flows()? {
            if device == handle.device && object.id == handle.driver_flow_id {
                return Ok(table);
            }
        }
        Err(DriverError::NotFound(format!("flow {handle}")))
    }

    fn read_operational(&self, path: &str, what: &str) -> Result<String, DriverError> {
        let response = self.http.get(path)?;
        match response.status {
            s if (200..300).contains(&s) => Ok(response.body),
            // Treat "no data" as an empty container, per RESTCONF semantics.
            404 => Ok(String::from("{}")),
            _ => Err(protocol(format!("{what} endpoint returned HTTP {}", response.status))),
        }
    }
}

impl Driver for OdlDriver {
    fn capabilities(&self) -> CapabilitySet {
        CapabilitySet {
            topology_read: true,
            flow_write: true,
            flow_stats: true,
            port_stats: true,
            event_push: false,
        }
    }

    fn get_topology(&self) -> Result<TopologySnapshot, DriverError> {
        let topology = self.read_operational(&self.paths.topology, "topology")?;
        let inventory = self.read_operational(&self.paths.nodes, "inventory")?;
        parse_topology(&topology, &inventory, monotonic_now_ns())
    }

    fn install_flow(&self, rule: &FlowRule) -> Result<FlowHandle, DriverError> {
        let id = flow_id(rule);
        let path = self.flow_path(rule.device(), rule.table_id(), &id);
        let response = self.http.put_json(&path, render_flow(rule))?;
        match response.status {
            200 | 201 | 204 => Ok(FlowHandle::new(rule.device(), id)),
            404 => Err(DriverError::NotFound(format!("device {}", rule.device()))),
            _ => Err(unexpected_status("install flow", &response)),
        }
    }

    fn remove_flow(&self, handle: &FlowHandle) -> Result<(), DriverError> {
        let table = self.locate_table(handle)?;
        let path = self.flow_path(handle.device, table, &handle.driver_flow_id);
        let response = self.http.delete(&path)?;
        match response.status {
            200 | 204 => Ok(()),
            404 => Err(DriverError::NotFound(format!("flow {handle}"))),
            _ => Err(unexpected_status("remove flow", &response)),
        }
    }

    fn list_flows(
        &self,
        device: Option<DeviceId>,
    ) -> Result<Vec<(FlowHandle, FlowRule)>, DriverError> {
        let mut result = Vec::new();
        for (flow_device, table, object) in self.read_config_flows()? {
            if device.is_some_and(|d| d != flow_device) {
                continue;
            }
            let rule = build_rule(flow_device, table, &object)?;
            result.push((FlowHandle::new(flow_device, object.id), rule));
        }
        Ok(result)
    }

    fn get_flow_stats(&self, handle: &FlowHandle) -> Result<FlowStats, DriverError> {
        let table = self.locate_table(handle)?;
        let path = format!(
            "{}/node/{}/flow-node-inventory:table/{}/flow/{}",
            self.paths.nodes,
            handle.device.render_odl(),
            table,
            handle.driver_flow_id
        );
        let response = self.http.get(&path)?;
        match response.status {
            s if (200..300).contains(&s) => parse_flow_stats_body(handle, &response.body),
            404 => Err(DriverError::NotFound(format!("flow {handle}"))),
            _ => Err(unexpected_status("flow stats", &response)),
        }
    }

    fn get_port_stats(&self, device: DeviceId) -> Result<Vec<PortStats>, DriverError> {
        let path = format!("{}/node/{}", self.paths.nodes, device.render_odl());
        let response = self.http.get(&path)?;
        match response.status {
            s if (200..300).contains(&s) => parse_port_stats_body(device, &response.body),
            404 => Err(DriverError::NotFound(format!("device {device}"))),
            _ => Err(unexpected_status("port stats", &response)),
        }
    }
}
