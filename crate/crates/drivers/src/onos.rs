//! ONOS REST driver: translates the unified model to and from the ONOS
//! northbound wire dialect.
//!
//! The dialect this driver speaks is pinned by the JSON documents in
//! [`crate::fixtures::onos`]; the render functions must reproduce those bodies
//! byte for byte and the parser must accept them. Key points of the dialect:
//!
//! * device ids travel as `of:` + 16 hex digits;
//! * flow installs POST to the device-scoped flows path and read the
//!   controller-assigned flow id from the `Location` response header;
//! * selector criteria and treatment instructions are tagged objects
//!   (`{"type":"ETH_DST","mac":...}`);
//! * a drop rule is an empty instruction list;
//! * ports in device and host bodies are strings, counters are unsigned.
//!
//! Topology reads exclude devices marked unavailable, silently dropping links
//! and hosts that touch them; a link or host naming a device the devices body
//! never mentioned at all is a broken response and fails with
//! [`DriverError::ProtocolError`].

use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use umbrella_core::driver::{CapabilitySet, Driver, DriverConfig, DriverError};
use umbrella_core::model::{
    normalize_device_id, Action, DeviceId, FlowHandle, FlowRule, FlowStats, Host, Link,
    MatchFields, PortId, PortStats, TopologySnapshot,
};
use umbrella_core::time::monotonic_now_ns;

use crate::http::{parse_json, unexpected_status, HttpClient};

/// Endpoint paths, overridable through `DriverConfig.extras`.
#[derive(Clone, Debug)]
struct Paths {
    devices: String,
    links: String,
    hosts: String,
    flows: String,
    stats_ports: String,
}

impl Paths {
    fn from_extras(extras: &BTreeMap<String, String>) -> Self {
        let pick = |key: &str, default: &str| {
            extras.get(key).cloned().unwrap_or_else(|| default.to_string())
        };
        Paths {
            devices: pick("path.devices", "/onos/v1/devices"),
            links: pick("path.links", "/onos/v1/links"),
            hosts: pick("path.hosts", "/onos/v1/hosts"),
            flows: pick("path.flows", "/onos/v1/flows"),
            stats_ports: pick("path.stats_ports", "/onos/v1/statistics/ports"),
        }
    }
}

// Wire shapes. Field order matters for rendered bodies: serialization follows
// declaration order, and the fixtures pin the byte sequence.

#[derive(Serialize, Deserialize)]
struct FlowBody {
    priority: u16,
    timeout: u32,
    #[serde(rename = "hardTimeout", default)]
    hard_timeout: u32,
    #[serde(rename = "isPermanent")]
    is_permanent: bool,
    #[serde(rename = "tableId", default)]
    table_id: u8,
    #[serde(rename = "deviceId")]
    device_id: String,
    treatment: Treatment,
    selector: Selector,
}

#[derive(Serialize, Deserialize, Default)]
struct Treatment {
    instructions: Vec<Instruction>,
}

#[derive(Serialize, Deserialize)]
struct Instruction {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subtype: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mac: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    port: Option<String>,
}

#[derive(Serialize, Deserialize, Default)]
struct Selector {
    criteria: Vec<Criterion>,
}

#[derive(Serialize, Deserialize)]
struct Criterion {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    port: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mac: Option<String>,
    #[serde(rename = "ethType", default, skip_serializing_if = "Option::is_none")]
    eth_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ip: Option<String>,
}

/// One entry of a flows listing; carries counters next to the rule.
#[derive(Deserialize)]
struct FlowEntry {
    id: String,
    #[serde(rename = "deviceId")]
    device_id: String,
    #[serde(rename = "tableId", default)]
    table_id: u8,
    priority: u16,
    #[serde(default)]
    timeout: u32,
    #[serde(rename = "hardTimeout", default)]
    hard_timeout: u32,
    #[serde(default)]
    life: u64,
    #[serde(default)]
    packets: u64,
    #[serde(default)]
    bytes: u64,
    #[serde(default)]
    treatment: Treatment,
    #[serde(default)]
    selector: Selector,
}

#[derive(Deserialize)]
struct FlowsListing {
    flows: Vec<FlowEntry>,
}

#[derive(Deserialize)]
struct DevicesBody {
    devices: Vec<DeviceEntry>,
}

#[derive(Deserialize)]
struct DeviceEntry {
    id: String,
    available: bool,
}

#[derive(Deserialize)]
struct LinksBody {
    links: Vec<LinkEntry>,
}

#[derive(Deserialize)]
struct LinkEntry {
    src: ConnectPoint,
    dst: ConnectPoint,
}

#[derive(Deserialize)]
struct ConnectPoint {
    device: String,
    port: String,
}

#[derive(Deserialize)]
struct HostsBody {
    hosts: Vec<HostEntry>,
}

#[derive(Deserialize)]
struct HostEntry {
    mac: String,
    #[serde(rename = "ipAddresses", default)]
    ip_addresses: Vec<String>,
    #[serde(default)]
    locations: Vec<HostLocation>,
}

#[derive(Deserialize)]
struct HostLocation {
    #[serde(rename = "elementId")]
    element_id: String,
    port: String,
}

#[derive(Deserialize)]
struct StatisticsBody {
    statistics: Vec<DevicePortStats>,
}

#[derive(Deserialize)]
struct DevicePortStats {
    device: String,
    #[serde(default)]
    ports: Vec<PortStatEntry>,
}

#[derive(Deserialize)]
struct PortStatEntry {
    port: u32,
    #[serde(rename = "packetsReceived")]
    packets_received: u64,
    #[serde(rename = "packetsSent")]
    packets_sent: u64,
    #[serde(rename = "bytesReceived")]
    bytes_received: u64,
    #[serde(rename = "bytesSent")]
    bytes_sent: u64,
}

fn protocol(detail: impl Into<String>) -> DriverError {
    DriverError::ProtocolError(detail.into())
}

fn parse_device(text: &str) -> Result<DeviceId, DriverError> {
    normalize_device_id(text).map_err(|e| protocol(e.to_string()))
}

fn parse_mac(text: &str) -> Result<umbrella_core::model::MacAddr, DriverError> {
    text.parse().map_err(|_| protocol(format!("malformed MAC {text:?}")))
}

fn parse_port_number(text: &str) -> Result<u32, DriverError> {
    text.parse().map_err(|_| protocol(format!("malformed port number {text:?}")))
}

/// Renders the request body installing `rule`.
///
/// The output is byte-identical to the committed fixture bodies; `timeout`
/// carries the idle timeout and `isPermanent` is true exactly when both
/// timeouts are zero, matching how the listing reports rules back.
pub fn render_flow(rule: &FlowRule) -> String {
    let m = rule.match_fields();
    let mut criteria = Vec::new();
    if let Some(port) = m.in_port {
        criteria.push(Criterion {
            kind: "IN_PORT".into(),
            port: Some(port),
            mac: None,
            eth_type: None,
            ip: None,
        });
    }
    if let Some(mac) = m.eth_src {
        criteria.push(Criterion {
            kind: "ETH_SRC".into(),
            port: None,
            mac: Some(mac.to_string()),
            eth_type: None,
            ip: None,
        });
    }
    if let Some(mac) = m.eth_dst {
        criteria.push(Criterion {
            kind: "ETH_DST".into(),
            port: None,
            mac: Some(mac.to_string()),
            eth_type: None,
            ip: None,
        });
    }
    if let Some(eth_type) = m.eth_type {
        criteria.push(Criterion {
            kind: "ETH_TYPE".into(),
            port: None,
            mac: None,
            eth_type: Some(format!("0x{eth_type:x}")),
            ip: None,
        });
    }
    if let Some(prefix) = m.ipv4_src {
        criteria.push(Criterion {
            kind: "IPV4_SRC".into(),
            port: None,
            mac: None,
            eth_type: None,
            ip: Some(prefix.to_string()),
        });
    }
    if let Some(prefix) = m.ipv4_dst {
        criteria.push(Criterion {
            kind: "IPV4_DST".into(),
            port: None,
            mac: None,
            eth_type: None,
            ip: Some(prefix.to_string()),
        });
    }

    let mut instructions = Vec::new();
    for action in rule.actions() {
        match action {
            Action::Output(port) => instructions.push(Instruction {
                kind: "OUTPUT".into(),
                subtype: None,
                mac: None,
                port: Some(port.to_string()),
            }),
            Action::SetEthDst(mac) => instructions.push(Instruction {
                kind: "L2MODIFICATION".into(),
                subtype: Some("ETH_DST".into()),
                mac: Some(mac.to_string()),
                port: None,
            }),
            // A drop is the absence of instructions.
            Action::Drop => {}
        }
    }

    let body = FlowBody {
        priority: rule.priority(),
        timeout: rule.idle_timeout_s(),
        hard_timeout: rule.hard_timeout_s(),
        is_permanent: rule.idle_timeout_s() == 0 && rule.hard_timeout_s() == 0,
        table_id: rule.table_id(),
        device_id: rule.device().render_onos(),
        treatment: Treatment { instructions },
        selector: Selector { criteria },
    };
    serde_json::to_string(&body).expect("flow body serializes")
}

/// Parses a request body produced by [`render_flow`] back into a rule.
pub fn parse_flow(body: &str) -> Result<FlowRule, DriverError> {
    let body: FlowBody = parse_json(body, "flow")?;
    let device = parse_device(&body.device_id)?;
    build_rule(
        device,
        body.table_id,
        body.priority,
        body.timeout,
        body.hard_timeout,
        &body.selector,
        &body.treatment,
    )
}

fn build_rule(
    device: DeviceId,
    table_id: u8,
    priority: u16,
    idle_timeout_s: u32,
    hard_timeout_s: u32,
    selector: &Selector,
    treatment: &Treatment,
) -> Result<FlowRule, DriverError> {
    FlowRule::builder(device)
        .table_id(table_id)
        .priority(priority)
        .match_fields(criteria_to_match(&selector.criteria)?)
        .actions(instructions_to_actions(&treatment.instructions)?)
        .idle_timeout_s(idle_timeout_s)
        .hard_timeout_s(hard_timeout_s)
        .build()
        .map_err(|e| protocol(format!("flow violates the rule model: {e}")))
}

fn criteria_to_match(criteria: &[Criterion]) -> Result<MatchFields, DriverError> {
    fn set_once<T>(slot: &mut Option<T>, value: T, kind: &str) -> Result<(), DriverError> {
        if slot.is_some() {
            return Err(protocol(format!("duplicate {kind} criterion")));
        }
        *slot = Some(value);
        Ok(())
    }

    let mut m = MatchFields::default();
    for criterion in criteria {
        let kind = criterion.kind.as_str();
        match kind {
            "IN_PORT" => {
                let port = criterion
                    .port
                    .ok_or_else(|| protocol("IN_PORT criterion without port"))?;
                set_once(&mut m.in_port, port, kind)?;
            }
            "ETH_SRC" | "ETH_DST" => {
                let text = criterion
                    .mac
                    .as_deref()
                    .ok_or_else(|| protocol(format!("{kind} criterion without mac")))?;
                let mac = parse_mac(text)?;
                let slot = if kind == "ETH_SRC" { &mut m.eth_src } else { &mut m.eth_dst };
                set_once(slot, mac, kind)?;
            }
            "ETH_TYPE" => {
                let text = criterion
                    .eth_type
                    .as_deref()
                    .ok_or_else(|| protocol("ETH_TYPE criterion without ethType"))?;
                let hex = text
                    .strip_prefix("0x")
                    .ok_or_else(|| protocol(format!("ethType {text:?} lacks 0x prefix")))?;
                let value = u16::from_str_radix(hex, 16)
                    .map_err(|_| protocol(format!("malformed ethType {text:?}")))?;
                set_once(&mut m.eth_type, value, kind)?;
            }
            "IPV4_SRC" | "IPV4_DST" => {
                let text = criterion
                    .ip
                    .as_deref()
                    .ok_or_else(|| protocol(format!("{kind} criterion without ip")))?;
                let prefix = text
                    .parse()
                    .map_err(|_| protocol(format!("malformed prefix {text:?}")))?;
                let slot = if kind == "IPV4_SRC" { &mut m.ipv4_src } else { &mut m.ipv4_dst };
                set_once(slot, prefix, kind)?;
            }
            other => return Err(protocol(format!("unsupported criterion type {other:?}"))),
        }
    }
    Ok(m)
}

fn instructions_to_actions(instructions: &[Instruction]) -> Result<Vec<Action>, DriverError> {
    let mut actions = Vec::new();
    for instruction in instructions {
        match instruction.kind.as_str() {
            "OUTPUT" => {
                let text = instruction
                    .port
                    .as_deref()
                    .ok_or_else(|| protocol("OUTPUT instruction without port"))?;
                actions.push(Action::Output(parse_port_number(text)?));
            }
            "L2MODIFICATION" => {
                match instruction.subtype.as_deref() {
                    Some("ETH_DST") => {}
                    other => {
                        return Err(protocol(format!(
                            "unsupported L2MODIFICATION subtype {other:?}"
                        )));
                    }
                }
                let text = instruction
                    .mac
                    .as_deref()
                    .ok_or_else(|| protocol("L2MODIFICATION instruction without mac"))?;
                actions.push(Action::SetEthDst(parse_mac(text)?));
            }
            // Some controllers spell an empty treatment explicitly.
            "NOACTION" => {}
            other => return Err(protocol(format!("unsupported instruction type {other:?}"))),
        }
    }
    // An empty list normalizes to a drop inside the rule builder.
    Ok(actions)
}

/// Assembles a snapshot from the three topology listing bodies.
///
/// Devices marked unavailable are excluded together with links and hosts
/// touching them; a link or host naming a device absent from the devices body
/// is a protocol error. Port sets are derived from link endpoints and host
/// attachment points, since the dialect has no standalone port listing.
pub fn parse_topology(
    devices_body: &str,
    links_body: &str,
    hosts_body: &str,
    captured_at_ns: u64,
) -> Result<TopologySnapshot, DriverError> {
    let devices: DevicesBody = parse_json(devices_body, "devices")?;
    let links: LinksBody = parse_json(links_body, "links")?;
    let hosts: HostsBody = parse_json(hosts_body, "hosts")?;

    let mut known = BTreeSet::new();
    let mut ports: BTreeMap<DeviceId, BTreeSet<u32>> = BTreeMap::new();
    for entry in &devices.devices {
        let id = parse_device(&entry.id)?;
        known.insert(id);
        if entry.available {
            ports.entry(id).or_default();
        }
    }

    let endpoint = |point: &ConnectPoint| -> Result<PortId, DriverError> {
        let device = parse_device(&point.device)?;
        if !known.contains(&device) {
            return Err(protocol(format!(
                "link endpoint references unknown device {}",
                point.device
            )));
        }
        Ok(PortId::new(device, parse_port_number(&point.port)?))
    };

    let mut kept_links = BTreeSet::new();
    for entry in &links.links {
        let src = endpoint(&entry.src)?;
        let dst = endpoint(&entry.dst)?;
        if !ports.contains_key(&src.device) || !ports.contains_key(&dst.device) {
            continue;
        }
        ports.get_mut(&src.device).expect("present").insert(src.port_no);
        ports.get_mut(&dst.device).expect("present").insert(dst.port_no);
        kept_links.insert(Link::new(src, dst));
    }

    let mut kept_hosts = Vec::new();
    for entry in &hosts.hosts {
        let mac = parse_mac(&entry.mac)?;
        let location = entry
            .locations
            .first()
            .ok_or_else(|| protocol(format!("host {} has no location", entry.mac)))?;
        let device = parse_device(&location.element_id)?;
        if !known.contains(&device) {
            return Err(protocol(format!(
                "host {} attached to unknown device {}",
                entry.mac, location.element_id
            )));
        }
        if !ports.contains_key(&device) {
            continue;
        }
        let port_no = parse_port_number(&location.port)?;
        ports.get_mut(&device).expect("present").insert(port_no);
        let ip = entry
            .ip_addresses
            .iter()
            .find_map(|text| text.parse::<Ipv4Addr>().ok());
        kept_hosts.push(Host::new(mac, ip, PortId::new(device, port_no)));
    }

    TopologySnapshot::new(ports, kept_links, kept_hosts, captured_at_ns)
        .map_err(|e| protocol(format!("snapshot rejected: {e}")))
}

/// Parses a device's port statistics body into per-port counters, ascending
/// by port number.
pub fn parse_port_stats(body: &str, device: DeviceId) -> Result<Vec<PortStats>, DriverError> {
    let stats: StatisticsBody = parse_json(body, "port statistics")?;
    let mut result = Vec::new();
    for block in &stats.statistics {
        if parse_device(&block.device)? != device {
            continue;
        }
        for entry in &block.ports {
            result.push(PortStats {
                port: PortId::new(device, entry.port),
                rx_packets: entry.packets_received,
                tx_packets: entry.packets_sent,
                rx_bytes: entry.bytes_received,
                tx_bytes: entry.bytes_sent,
            });
        }
    }
    result.sort_by_key(|s| s.port.port_no);
    Ok(result)
}

fn parse_listing(body: &str) -> Result<Vec<(FlowHandle, FlowRule, FlowEntry)>, DriverError> {
    let listing: FlowsListing = parse_json(body, "flows")?;
    let mut result = Vec::new();
    for entry in listing.flows {
        let device = parse_device(&entry.device_id)?;
        let rule = build_rule(
            device,
            entry.table_id,
            entry.priority,
            entry.timeout,
            entry.hard_timeout,
            &entry.selector,
            &entry.treatment,
        )?;
        let handle = FlowHandle::new(device, entry.id.clone());
        result.push((handle, rule, entry));
    }
    Ok(result)
}

/// Parses a flows listing body into handle/rule pairs.
pub fn parse_flows(body: &str) -> Result<Vec<(FlowHandle, FlowRule)>, DriverError> {
    Ok(parse_listing(body)?
        .into_iter()
        .map(|(handle, rule, _)| (handle, rule))
        .collect())
}

/// Driver for the ONOS northbound REST interface.
pub struct OnosDriver {
    http: HttpClient,
    paths: Paths,
}

impl OnosDriver {
    /// Builds a driver from endpoint, credentials, and path overrides.
    pub fn new(config: &DriverConfig) -> Result<Self, DriverError> {
        Ok(OnosDriver {
            http: HttpClient::new(config)?,
            paths: Paths::from_extras(&config.extras),
        })
    }

    fn read_listing_body(&self, path: &str, what: &str) -> Result<String, DriverError> {
        let response = self.http.get(path)?;
        if !response.is_success() {
            return Err(protocol(format!(
                "{what} endpoint returned HTTP {}",
                response.status
            )));
        }
        Ok(response.body)
    }

    fn device_flows_body(&self, device: DeviceId) -> Result<String, DriverError> {
        let path = format!("{}/{}", self.paths.flows, device.render_onos());
        let response = self.http.get(&path)?;
        match response.status {
            s if (200..300).contains(&s) => Ok(response.body),
            404 => Err(DriverError::NotFound(format!("device {device}"))),
            _ => Err(unexpected_status("list flows", &response)),
        }
    }
}

impl Driver for OnosDriver {
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
        let devices = self.read_listing_body(&self.paths.devices, "devices")?;
        let links = self.read_listing_body(&self.paths.links, "links")?;
        let hosts = self.read_listing_body(&self.paths.hosts, "hosts")?;
        parse_topology(&devices, &links, &hosts, monotonic_now_ns())
    }

    fn install_flow(&self, rule: &FlowRule) -> Result<FlowHandle, DriverError> {
        let path = format!("{}/{}", self.paths.flows, rule.device().render_onos());
        let response = self.http.post_json(&path, render_flow(rule))?;
        match response.status {
            200 | 201 => {
                let location = response
                    .location
                    .as_deref()
                    .ok_or_else(|| protocol("install response carries no Location header"))?;
                let id = location
                    .rsplit('/')
                    .next()
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| protocol(format!("unusable Location header {location:?}")))?;
                Ok(FlowHandle::new(rule.device(), id))
            }
            404 => Err(DriverError::NotFound(format!("device {}", rule.device()))),
            _ => Err(unexpected_status("install flow", &response)),
        }
    }

    fn remove_flow(&self, handle: &FlowHandle) -> Result<(), DriverError> {
        let path = format!(
            "{}/{}/{}",
            self.paths.flows,
            handle.device.render_onos(),
            handle.driver_flow_id
        );
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
        let body = match device {
            Some(device) => self.device_flows_body(device)?,
            None => self.read_listing_body(&self.paths.flows, "flows")?,
        };
        parse_flows(&body)
    }

    fn get_flow_stats(&self, handle: &FlowHandle) -> Result<FlowStats, DriverError> {
        let body = self.device_flows_body(handle.device)?;
        let entries = parse_listing(&body)?;
        for (candidate, _, entry) in entries {
            if candidate.driver_flow_id == handle.driver_flow_id {
                return Ok(FlowStats {
                    handle: handle.clone(),
                    packets: entry.packets,
                    bytes: entry.bytes,
                    duration_s: entry.life,
                });
            }
        }
        Err(DriverError::NotFound(format!("flow {handle}")))
    }

    fn get_port_stats(&self, device: DeviceId) -> Result<Vec<PortStats>, DriverError> {
        let path = format!("{}/{}", self.paths.stats_ports, device.render_onos());
        let response = self.http.get(&path)?;
        match response.status {
            s if (200..300).contains(&s) => parse_port_stats(&response.body, device),
            404 => Err(DriverError::NotFound(format!("device {device}"))),
            _ => Err(unexpected_status("port stats", &response)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::onos as fixtures;
    use crate::testgen::sample_rules;
    use umbrella_core::model::MacAddr;

    fn canonical_output_rule() -> FlowRule {
        let m = MatchFields {
            eth_dst: Some("aa:bb:cc:dd:ee:01".parse().unwrap()),
            ..MatchFields::default()
        };
        FlowRule::new(DeviceId::new(1), 100, m, vec![Action::Output(2)]).unwrap()
    }

    fn canonical_drop_rule() -> FlowRule {
        FlowRule::new(DeviceId::new(1), 0, MatchFields::any(), vec![Action::Drop]).unwrap()
    }

    #[test]
    fn render_matches_committed_output_fixture() {
        assert_eq!(render_flow(&canonical_output_rule()), fixtures::FLOW_OUTPUT.trim_end());
    }

    #[test]
    fn render_matches_committed_drop_fixture() {
        assert_eq!(render_flow(&canonical_drop_rule()), fixtures::FLOW_DROP.trim_end());
    }

    #[test]
    fn canonical_rules_round_trip() {
        for rule in [canonical_output_rule(), canonical_drop_rule()] {
            assert_eq!(parse_flow(&render_flow(&rule)).unwrap(), rule);
        }
    }

    #[test]
    fn corpus_round_trips_semantically() {
        let rules = sample_rules(0x0705_0001, 500);
        for rule in &rules {
            let back = parse_flow(&render_flow(rule)).unwrap();
            assert_eq!(&back, rule, "round trip changed the rule");
        }
    }

    #[test]
    fn fixture_topology_has_expected_shape() {
        let snapshot = parse_topology(
            fixtures::DEVICES_LINEAR3,
            fixtures::LINKS_LINEAR3,
            fixtures::HOSTS_LINEAR3,
            7,
        )
        .unwrap();
        assert_eq!(snapshot.device_count(), 3);
        assert_eq!(snapshot.links().len(), 4);
        assert_eq!(snapshot.host_count(), 2);
        for dpid in 1..=3 {
            let ports = snapshot.device_ports(DeviceId::new(dpid)).unwrap();
            assert_eq!(ports.iter().copied().collect::<Vec<_>>(), vec![1, 2]);
        }
        let h1 = snapshot.host("00:00:00:00:00:01".parse().unwrap()).unwrap();
        assert_eq!(h1.ip, Some("10.0.0.1".parse().unwrap()));
        assert_eq!(h1.attachment, PortId::new(DeviceId::new(1), 1));
    }

    #[test]
    fn empty_listings_parse_to_empty_snapshot() {
        let snapshot =
            parse_topology(r#"{"devices":[]}"#, r#"{"links":[]}"#, r#"{"hosts":[]}"#, 0).unwrap();
        assert!(snapshot.is_empty());
    }

    #[test]
    fn link_to_device_absent_from_devices_body_is_protocol_error() {
        let links = r#"{"links":[{"src":{"port":"2","device":"of:0000000000000001"},"dst":{"port":"1","device":"of:00000000000000aa"}}]}"#;
        let err = parse_topology(fixtures::DEVICES_LINEAR3, links, r#"{"hosts":[]}"#, 0)
            .unwrap_err();
        assert!(matches!(err, DriverError::ProtocolError(_)), "got {err:?}");
    }

    #[test]
    fn unavailable_device_is_excluded_with_its_links_and_hosts() {
        let devices = r#"{"devices":[{"id":"of:0000000000000001","available":true},{"id":"of:0000000000000002","available":false}]}"#;
        let links = r#"{"links":[{"src":{"port":"2","device":"of:0000000000000001"},"dst":{"port":"1","device":"of:0000000000000002"}},{"src":{"port":"1","device":"of:0000000000000002"},"dst":{"port":"2","device":"of:0000000000000001"}}]}"#;
        let hosts = r#"{"hosts":[{"mac":"00:00:00:00:00:01","ipAddresses":["10.0.0.1"],"locations":[{"elementId":"of:0000000000000001","port":"1"}]},{"mac":"00:00:00:00:00:02","ipAddresses":[],"locations":[{"elementId":"of:0000000000000002","port":"1"}]}]}"#;
        let snapshot = parse_topology(devices, links, hosts, 0).unwrap();
        assert_eq!(snapshot.device_count(), 1);
        assert!(snapshot.links().is_empty());
        assert_eq!(snapshot.host_count(), 1);
        assert!(snapshot.contains_device(DeviceId::new(1)));
    }

    #[test]
    fn fixture_flows_listing_parses_rules_and_counters() {
        let entries = parse_listing(fixtures::FLOWS_LISTING).unwrap();
        assert_eq!(entries.len(), 2);

        let (handle, rule, entry) = &entries[0];
        assert_eq!(handle.device, DeviceId::new(1));
        assert_eq!(handle.driver_flow_id, "281475000000001");
        assert_eq!(rule.match_fields().in_port, Some(1));
        assert_eq!(
            rule.match_fields().eth_dst,
            Some("aa:bb:cc:dd:ee:01".parse::<MacAddr>().unwrap())
        );
        assert_eq!(rule.actions(), &[Action::Output(2)]);
        assert_eq!(entry.packets, 120);
        assert_eq!(entry.bytes, 12000);
        assert_eq!(entry.life, 39);

        let (_, rule2, entry2) = &entries[1];
        assert_eq!(rule2.match_fields().eth_type, Some(0x0800));
        assert_eq!(
            rule2.match_fields().ipv4_dst,
            Some("10.0.0.0/24".parse().unwrap())
        );
        assert_eq!(rule2.idle_timeout_s(), 10);
        assert_eq!(rule2.actions(), &[Action::Drop]);
        assert_eq!(entry2.packets, 0);
    }

    #[test]
    fn negative_counter_is_protocol_error() {
        let body = r#"{"flows":[{"id":"1","deviceId":"of:0000000000000001","priority":1,"packets":-5,"selector":{"criteria":[]},"treatment":{"instructions":[]}}]}"#;
        assert!(matches!(
            parse_flows(body),
            Err(DriverError::ProtocolError(_))
        ));
    }

    #[test]
    fn fixture_port_stats_parse_with_exact_counters() {
        let stats = parse_port_stats(fixtures::PORT_STATS, DeviceId::new(2)).unwrap();
        assert_eq!(stats.len(), 2);
        assert_eq!(stats[0].port, PortId::new(DeviceId::new(2), 1));
        assert_eq!(stats[0].rx_packets, 500);
        assert_eq!(stats[0].tx_packets, 499);
        assert_eq!(stats[0].rx_bytes, 50000);
        assert_eq!(stats[0].tx_bytes, 49900);
        assert_eq!(stats[1].port.port_no, 2);
    }

    #[test]
    fn port_stats_for_other_devices_are_ignored() {
        let stats = parse_port_stats(fixtures::PORT_STATS, DeviceId::new(9)).unwrap();
        assert!(stats.is_empty());
    }

    #[test]
    fn unknown_criterion_type_is_protocol_error() {
        let body = r#"{"priority":1,"timeout":0,"hardTimeout":0,"isPermanent":true,"tableId":0,"deviceId":"of:0000000000000001","treatment":{"instructions":[]},"selector":{"criteria":[{"type":"VLAN_VID","port":7}]}}"#;
        assert!(matches!(parse_flow(body), Err(DriverError::ProtocolError(_))));
    }

    #[test]
    fn duplicate_criterion_is_protocol_error() {
        let body = r#"{"priority":1,"timeout":0,"hardTimeout":0,"isPermanent":true,"tableId":0,"deviceId":"of:0000000000000001","treatment":{"instructions":[]},"selector":{"criteria":[{"type":"IN_PORT","port":1},{"type":"IN_PORT","port":2}]}}"#;
        assert!(matches!(parse_flow(body), Err(DriverError::ProtocolError(_))));
    }

    #[test]
    fn unknown_instruction_type_is_protocol_error() {
        let body = r#"{"priority":1,"timeout":0,"hardTimeout":0,"isPermanent":true,"tableId":0,"deviceId":"of:0000000000000001","treatment":{"instructions":[{"type":"GROUP","port":"1"}]},"selector":{"criteria":[]}}"#;
        assert!(matches!(parse_flow(body), Err(DriverError::ProtocolError(_))));
    }

    #[test]
    fn eth_type_renders_as_short_hex() {
        let m = MatchFields { eth_type: Some(0x0806), ..MatchFields::default() };
        let rule = FlowRule::new(DeviceId::new(1), 5, m, vec![Action::Drop]).unwrap();
        let body = render_flow(&rule);
        assert!(body.contains(r#"{"type":"ETH_TYPE","ethType":"0x806"}"#), "{body}");
        assert_eq!(parse_flow(&body).unwrap(), rule);
    }

    #[test]
    fn noaction_treatment_parses_as_drop() {
        let body = r#"{"priority":1,"timeout":0,"hardTimeout":0,"isPermanent":true,"tableId":0,"deviceId":"of:0000000000000001","treatment":{"instructions":[{"type":"NOACTION"}]},"selector":{"criteria":[]}}"#;
        assert_eq!(parse_flow(body).unwrap().actions(), &[Action::Drop]);
    }

    #[test]
    fn host_without_location_is_protocol_error() {
        let hosts = r#"{"hosts":[{"mac":"00:00:00:00:00:01","ipAddresses":[],"locations":[]}]}"#;
        let err = parse_topology(
            r#"{"devices":[{"id":"of:0000000000000001","available":true}]}"#,
            r#"{"links":[]}"#,
            hosts,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, DriverError::ProtocolError(_)));
    }
}
