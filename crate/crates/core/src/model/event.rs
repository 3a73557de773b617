//! Topology change events.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{DeviceId, Host, Link};

/// One observed topology change.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TopologyEvent {
    /// What changed.
    pub kind: TopologyEventKind,
    /// When the change was observed, on the observer's monotonic clock.
    pub observed_at_ns: u64,
}

impl TopologyEvent {
    /// Pairs a change with its observation time.
    pub fn new(kind: TopologyEventKind, observed_at_ns: u64) -> Self {
        TopologyEvent { kind, observed_at_ns }
    }
}

/// The change itself.
///
/// `DeviceAdded` carries the device's port set so that replaying an event
/// list over the old snapshot reconstructs the new one exactly. A device
/// whose port set changes between snapshots diffs as a removal followed by
/// an addition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyEventKind {
    /// A device appeared, with its ports.
    DeviceAdded {
        /// The new device.
        device: DeviceId,
        /// Its full port set.
        ports: BTreeSet<u32>,
    },
    /// A device disappeared.
    DeviceRemoved(DeviceId),
    /// A directed link appeared.
    LinkAdded(Link),
    /// A directed link disappeared.
    LinkRemoved(Link),
    /// A host appeared.
    HostAdded(Host),
    /// A host disappeared.
    HostRemoved(Host),
}

impl fmt::Display for TopologyEventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyEventKind::DeviceAdded { device, ports } => {
                write!(f, "device {device} added with {} ports", ports.len())
            }
            TopologyEventKind::DeviceRemoved(d) => write!(f, "device {d} removed"),
            TopologyEventKind::LinkAdded(l) => write!(f, "link {l} added"),
            TopologyEventKind::LinkRemoved(l) => write!(f, "link {l} removed"),
            TopologyEventKind::HostAdded(h) => write!(f, "host {} added at {}", h.mac, h.attachment),
            TopologyEventKind::HostRemoved(h) => write!(f, "host {} removed", h.mac),
        }
    }
}
