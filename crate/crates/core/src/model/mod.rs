//! The controller-independent network data model.
//!
//! Every type here is a plain value: snapshots are immutable once built,
//! rules compare by their semantic content, and identifiers normalize the
//! spellings different controllers use into one canonical form.

mod addr;
mod event;
mod flow;
mod id;
mod topology;

pub use addr::{Ipv4Prefix, MacAddr};
pub use event::{TopologyEvent, TopologyEventKind};
pub use flow::{
    flow_matches, Action, FlowHandle, FlowRule, FlowRuleBuilder, FlowStats, MatchFields,
    PacketDescriptor, PortStats, ETH_TYPE_IPV4,
};
pub use id::{normalize_device_id, DeviceId, PortId};
pub use topology::{Host, Link, TopologySnapshot};

use std::fmt;

/// Errors raised while building or parsing model values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// A device identifier was not in any accepted spelling.
    MalformedId(String),
    /// A MAC address string could not be parsed.
    MalformedMac(String),
    /// An IPv4 address or prefix string could not be parsed.
    MalformedPrefix(String),
    /// Snapshot contents violate referential closure or uniqueness.
    InvalidSnapshot(String),
    /// A flow rule's match or action set is contradictory.
    InvalidRule(String),
    /// A topology description is unusable.
    InvalidSpec(String),
    /// A topology event cannot be applied to the given snapshot.
    EventNotApplicable(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::MalformedId(s) => write!(f, "malformed device id: {s}"),
            ModelError::MalformedMac(s) => write!(f, "malformed MAC address: {s}"),
            ModelError::MalformedPrefix(s) => write!(f, "malformed IPv4 prefix: {s}"),
            ModelError::InvalidSnapshot(s) => write!(f, "invalid topology snapshot: {s}"),
            ModelError::InvalidRule(s) => write!(f, "invalid flow rule: {s}"),
            ModelError::InvalidSpec(s) => write!(f, "invalid topology description: {s}"),
            ModelError::EventNotApplicable(s) => write!(f, "event not applicable: {s}"),
        }
    }
}

impl std::error::Error for ModelError {}
