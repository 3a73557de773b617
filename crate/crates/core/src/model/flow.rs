//! Flow rules, their match/action vocabulary, and statistics records.

use std::fmt;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use super::{DeviceId, Ipv4Prefix, MacAddr, ModelError, PortId};

/// EtherType of IPv4; IPv4 matches imply it.
pub const ETH_TYPE_IPV4: u16 = 0x0800;

/// Header fields a rule can constrain. Absent fields are wildcards.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MatchFields {
    /// Ingress port number on the rule's device.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_port: Option<u32>,
    /// Source MAC.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eth_src: Option<MacAddr>,
    /// Destination MAC.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eth_dst: Option<MacAddr>,
    /// EtherType; IPv4 matches require `0x0800`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eth_type: Option<u16>,
    /// Source IPv4 prefix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ipv4_src: Option<Ipv4Prefix>,
    /// Destination IPv4 prefix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ipv4_dst: Option<Ipv4Prefix>,
}

impl MatchFields {
    /// A match with every field wildcarded.
    pub fn any() -> Self {
        MatchFields::default()
    }

    /// True when no field is constrained.
    pub fn is_wildcard(&self) -> bool {
        *self == MatchFields::default()
    }

    /// Whether a concrete packet satisfies every constrained field.
    pub fn matches(&self, packet: &PacketDescriptor) -> bool {
        if self.in_port.is_some_and(|p| p != packet.in_port) {
            return false;
        }
        if self.eth_src.is_some_and(|m| m != packet.eth_src) {
            return false;
        }
        if self.eth_dst.is_some_and(|m| m != packet.eth_dst) {
            return false;
        }
        if self.eth_type.is_some_and(|t| t != packet.eth_type) {
            return false;
        }
        if let Some(prefix) = self.ipv4_src {
            match packet.ipv4_src {
                Some(ip) if prefix.contains(ip) => {}
                _ => return false,
            }
        }
        if let Some(prefix) = self.ipv4_dst {
            match packet.ipv4_dst {
                Some(ip) if prefix.contains(ip) => {}
                _ => return false,
            }
        }
        true
    }

    /// A stable text form used as hashing input for content-derived flow ids.
    ///
    /// The format is part of the driver compatibility contract: changing it
    /// changes every OpenDaylight flow id this framework generates.
    pub fn canonical_key(&self) -> String {
        fn opt<T: fmt::Display>(v: &Option<T>) -> String {
            match v {
                Some(x) => x.to_string(),
                None => "*".to_string(),
            }
        }
        format!(
            "in_port={};eth_src={};eth_dst={};eth_type={};ipv4_src={};ipv4_dst={}",
            opt(&self.in_port),
            opt(&self.eth_src),
            opt(&self.eth_dst),
            match self.eth_type {
                Some(t) => format!("0x{t:04x}"),
                None => "*".to_string(),
            },
            opt(&self.ipv4_src),
            opt(&self.ipv4_dst),
        )
    }
}

/// What a rule does with a matched packet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// Forward out the given port.
    Output(u32),
    /// Discard the packet.
    Drop,
    /// Rewrite the destination MAC, then continue with later actions.
    SetEthDst(MacAddr),
}

/// A flow rule as applications see it: pure semantics, no driver identifiers.
///
/// Equality covers everything stored here, so two rules compare equal exactly
/// when any driver would treat them the same. Construction normalizes:
///
/// * an empty action list becomes `[Drop]`;
/// * IPv4 matches force `eth_type` to `0x0800`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFlowRule")]
pub struct FlowRule {
    device: DeviceId,
    table_id: u8,
    priority: u16,
    #[serde(rename = "match")]
    match_fields: MatchFields,
    actions: Vec<Action>,
    idle_timeout_s: u32,
    hard_timeout_s: u32,
}

/// Serde mirror of [`FlowRule`] used to validate on deserialization.
#[derive(Deserialize)]
struct RawFlowRule {
    device: DeviceId,
    #[serde(default)]
    table_id: u8,
    priority: u16,
    #[serde(rename = "match", default)]
    match_fields: MatchFields,
    #[serde(default)]
    actions: Vec<Action>,
    #[serde(default)]
    idle_timeout_s: u32,
    #[serde(default)]
    hard_timeout_s: u32,
}

impl TryFrom<RawFlowRule> for FlowRule {
    type Error = ModelError;

    fn try_from(raw: RawFlowRule) -> Result<Self, Self::Error> {
        FlowRule::builder(raw.device)
            .table_id(raw.table_id)
            .priority(raw.priority)
            .match_fields(raw.match_fields)
            .actions(raw.actions)
            .idle_timeout_s(raw.idle_timeout_s)
            .hard_timeout_s(raw.hard_timeout_s)
            .build()
    }
}

impl FlowRule {
    /// Shorthand for a table-0 rule with zero timeouts.
    pub fn new(
        device: DeviceId,
        priority: u16,
        match_fields: MatchFields,
        actions: Vec<Action>,
    ) -> Result<Self, ModelError> {
        FlowRule::builder(device)
            .priority(priority)
            .match_fields(match_fields)
            .actions(actions)
            .build()
    }

    /// Starts building a rule for `device`.
    pub fn builder(device: DeviceId) -> FlowRuleBuilder {
        FlowRuleBuilder {
            device,
            table_id: 0,
            priority: 0,
            match_fields: MatchFields::default(),
            actions: Vec::new(),
            idle_timeout_s: 0,
            hard_timeout_s: 0,
        }
    }

    /// Device the rule lives on.
    pub fn device(&self) -> DeviceId {
        self.device
    }

    /// OpenFlow table the rule goes into.
    pub fn table_id(&self) -> u8 {
        self.table_id
    }

    /// Match priority; higher wins.
    pub fn priority(&self) -> u16 {
        self.priority
    }

    /// The match fields.
    pub fn match_fields(&self) -> &MatchFields {
        &self.match_fields
    }

    /// The action list, in application order.
    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// Idle timeout in seconds; 0 means none.
    pub fn idle_timeout_s(&self) -> u32 {
        self.idle_timeout_s
    }

    /// Hard timeout in seconds; 0 means none.
    pub fn hard_timeout_s(&self) -> u32 {
        self.hard_timeout_s
    }

    /// Whether the rule matches a concrete packet.
    pub fn matches(&self, packet: &PacketDescriptor) -> bool {
        self.match_fields.matches(packet)
    }
}

/// Builder for [`FlowRule`]; `build` validates and normalizes.
#[derive(Clone, Debug)]
pub struct FlowRuleBuilder {
    device: DeviceId,
    table_id: u8,
    priority: u16,
    match_fields: MatchFields,
    actions: Vec<Action>,
    idle_timeout_s: u32,
    hard_timeout_s: u32,
}

impl FlowRuleBuilder {
    /// Sets the OpenFlow table.
    pub fn table_id(mut self, table_id: u8) -> Self {
        self.table_id = table_id;
        self
    }

    /// Sets the priority.
    pub fn priority(mut self, priority: u16) -> Self {
        self.priority = priority;
        self
    }

    /// Sets the whole match.
    pub fn match_fields(mut self, match_fields: MatchFields) -> Self {
        self.match_fields = match_fields;
        self
    }

    /// Replaces the action list.
    pub fn actions(mut self, actions: Vec<Action>) -> Self {
        self.actions = actions;
        self
    }

    /// Appends one action.
    pub fn action(mut self, action: Action) -> Self {
        self.actions.push(action);
        self
    }

    /// Sets the idle timeout.
    pub fn idle_timeout_s(mut self, seconds: u32) -> Self {
        self.idle_timeout_s = seconds;
        self
    }

    /// Sets the hard timeout.
    pub fn hard_timeout_s(mut self, seconds: u32) -> Self {
        self.hard_timeout_s = seconds;
        self
    }

    /// Validates and produces the rule.
    pub fn build(self) -> Result<FlowRule, ModelError> {
        let mut actions = self.actions;
        if actions.is_empty() {
            actions.push(Action::Drop);
        }
        let outputs = actions
            .iter()
            .filter(|a| matches!(a, Action::Output(_)))
            .count();
        if outputs > 1 {
            return Err(ModelError::InvalidRule(
                "at most one Output action is allowed".into(),
            ));
        }
        let drops = actions.iter().filter(|a| matches!(a, Action::Drop)).count();
        if drops > 0 && actions.len() > 1 {
            return Err(ModelError::InvalidRule(
                "Drop cannot be combined with other actions".into(),
            ));
        }
        let mut match_fields = self.match_fields;
        if match_fields.ipv4_src.is_some() || match_fields.ipv4_dst.is_some() {
            match match_fields.eth_type {
                None => match_fields.eth_type = Some(ETH_TYPE_IPV4),
                Some(ETH_TYPE_IPV4) => {}
                Some(other) => {
                    return Err(ModelError::InvalidRule(format!(
                        "IPv4 match requires eth_type 0x0800, got 0x{other:04x}"
                    )));
                }
            }
        }
        Ok(FlowRule {
            device: self.device,
            table_id: self.table_id,
            priority: self.priority,
            match_fields,
            actions,
            idle_timeout_s: self.idle_timeout_s,
            hard_timeout_s: self.hard_timeout_s,
        })
    }
}

/// Opaque reference to one installed rule on one device.
///
/// The id's format is driver-specific; handles are only meaningful to the
/// driver that issued them, within its session.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlowHandle {
    /// Device the rule was installed on.
    pub device: DeviceId,
    /// Driver-assigned identifier.
    pub driver_flow_id: String,
}

impl FlowHandle {
    /// Builds a handle from its parts.
    pub fn new(device: DeviceId, driver_flow_id: impl Into<String>) -> Self {
        FlowHandle { device, driver_flow_id: driver_flow_id.into() }
    }
}

impl fmt::Display for FlowHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.device, self.driver_flow_id)
    }
}

/// Counters for one installed rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlowStats {
    /// The rule the counters belong to.
    pub handle: FlowHandle,
    /// Packets matched.
    pub packets: u64,
    /// Bytes matched.
    pub bytes: u64,
    /// Seconds the rule has been installed.
    pub duration_s: u64,
}

/// Counters for one switch port.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PortStats {
    /// The port the counters belong to.
    pub port: PortId,
    /// Packets received.
    pub rx_packets: u64,
    /// Packets transmitted.
    pub tx_packets: u64,
    /// Bytes received.
    pub rx_bytes: u64,
    /// Bytes transmitted.
    pub tx_bytes: u64,
}

/// A concrete packet as seen at one hop. Every field a match can name is
/// present; IPv4 addresses are absent for non-IP frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PacketDescriptor {
    /// Port the packet arrived on.
    pub in_port: u32,
    /// Source MAC.
    pub eth_src: MacAddr,
    /// Destination MAC.
    pub eth_dst: MacAddr,
    /// EtherType.
    pub eth_type: u16,
    /// IPv4 source, when the frame carries IPv4.
    pub ipv4_src: Option<Ipv4Addr>,
    /// IPv4 destination, when the frame carries IPv4.
    pub ipv4_dst: Option<Ipv4Addr>,
}

/// Wildcard-aware matching: every field the rule constrains must equal the
/// packet's value; IPv4 prefixes match by containment.
pub fn flow_matches(rule: &FlowRule, packet: &PacketDescriptor) -> bool {
    rule.matches(packet)
}
