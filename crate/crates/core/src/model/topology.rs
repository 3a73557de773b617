//! Hosts, links, and immutable topology snapshots.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::net::Ipv4Addr;

use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Deserialize, Serialize, Serializer};

use super::{DeviceId, MacAddr, ModelError, PortId};

/// An end host attached to one switch port.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Host {
    /// The host's MAC address; unique within a snapshot.
    pub mac: MacAddr,
    /// Optional IPv4 address learned for the host.
    pub ip: Option<Ipv4Addr>,
    /// The switch port the host hangs off.
    pub attachment: PortId,
}

impl Host {
    /// Builds a host record.
    pub fn new(mac: MacAddr, ip: Option<Ipv4Addr>, attachment: PortId) -> Self {
        Host { mac, ip, attachment }
    }
}

/// A directed link from one switch port to another.
///
/// A bidirectional physical cable appears as two `Link` values, one per
/// direction.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link {
    /// Egress side.
    pub src: PortId,
    /// Ingress side.
    pub dst: PortId,
}

impl Link {
    /// Builds a directed link. Both endpoints must be distinct devices.
    pub fn new(src: PortId, dst: PortId) -> Self {
        Link { src, dst }
    }

    /// The same cable traversed the other way.
    pub fn reversed(&self) -> Link {
        Link { src: self.dst, dst: self.src }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.src, self.dst)
    }
}

impl fmt::Debug for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Link({} -> {})", self.src, self.dst)
    }
}

/// An immutable, referentially closed picture of the network at one instant.
///
/// Closure means every link endpoint and every host attachment names a device
/// and port present in the snapshot; construction rejects anything else.
///
/// Equality compares topology content only: two snapshots of the same
/// network taken at different times are equal. `captured_at_ns` is metadata.
#[derive(Clone, Debug)]
pub struct TopologySnapshot {
    devices: BTreeMap<DeviceId, BTreeSet<u32>>,
    links: BTreeSet<Link>,
    hosts: BTreeMap<MacAddr, Host>,
    captured_at_ns: u64,
}

impl TopologySnapshot {
    /// Validates closure and builds a snapshot.
    pub fn new(
        devices: BTreeMap<DeviceId, BTreeSet<u32>>,
        links: BTreeSet<Link>,
        hosts: impl IntoIterator<Item = Host>,
        captured_at_ns: u64,
    ) -> Result<Self, ModelError> {
        for (device, ports) in &devices {
            if ports.contains(&0) {
                return Err(ModelError::InvalidSnapshot(format!(
                    "device {device} lists port 0; physical ports are numbered from 1"
                )));
            }
        }
        let port_exists = |p: &PortId| {
            devices
                .get(&p.device)
                .is_some_and(|ports| ports.contains(&p.port_no))
        };
        for link in &links {
            if link.src.device == link.dst.device {
                return Err(ModelError::InvalidSnapshot(format!(
                    "link {link} loops back to its own device"
                )));
            }
            for end in [&link.src, &link.dst] {
                if !port_exists(end) {
                    return Err(ModelError::InvalidSnapshot(format!(
                        "link {link} references missing port {end}"
                    )));
                }
            }
        }
        let mut host_map = BTreeMap::new();
        for host in hosts {
            if !port_exists(&host.attachment) {
                return Err(ModelError::InvalidSnapshot(format!(
                    "host {} attached to missing port {}",
                    host.mac, host.attachment
                )));
            }
            if host_map.insert(host.mac, host.clone()).is_some() {
                return Err(ModelError::InvalidSnapshot(format!(
                    "duplicate host MAC {}",
                    host.mac
                )));
            }
        }
        Ok(TopologySnapshot { devices, links, hosts: host_map, captured_at_ns })
    }

    /// An empty snapshot.
    pub fn empty(captured_at_ns: u64) -> Self {
        TopologySnapshot {
            devices: BTreeMap::new(),
            links: BTreeSet::new(),
            hosts: BTreeMap::new(),
            captured_at_ns,
        }
    }

    /// Devices and their port sets.
    pub fn devices(&self) -> &BTreeMap<DeviceId, BTreeSet<u32>> {
        &self.devices
    }

    /// Ports of one device, if present.
    pub fn device_ports(&self, device: DeviceId) -> Option<&BTreeSet<u32>> {
        self.devices.get(&device)
    }

    /// Whether the device is in the snapshot.
    pub fn contains_device(&self, device: DeviceId) -> bool {
        self.devices.contains_key(&device)
    }

    /// Whether the exact port exists.
    pub fn contains_port(&self, port: PortId) -> bool {
        self.device_ports(port.device)
            .is_some_and(|ports| ports.contains(&port.port_no))
    }

    /// All directed links.
    pub fn links(&self) -> &BTreeSet<Link> {
        &self.links
    }

    /// All hosts, ordered by MAC.
    pub fn hosts(&self) -> impl Iterator<Item = &Host> {
        self.hosts.values()
    }

    /// Looks a host up by MAC.
    pub fn host(&self, mac: MacAddr) -> Option<&Host> {
        self.hosts.get(&mac)
    }

    /// Number of hosts.
    pub fn host_count(&self) -> usize {
        self.hosts.len()
    }

    /// Number of devices.
    pub fn device_count(&self) -> usize {
        self.devices.len()
    }

    /// When the snapshot was captured, on the source's monotonic clock.
    pub fn captured_at_ns(&self) -> u64 {
        self.captured_at_ns
    }

    /// True when the snapshot holds nothing at all.
    pub fn is_empty(&self) -> bool {
        self.devices.is_empty() && self.links.is_empty() && self.hosts.is_empty()
    }
}

impl PartialEq for TopologySnapshot {
    fn eq(&self, other: &Self) -> bool {
        self.devices == other.devices && self.links == other.links && self.hosts == other.hosts
    }
}

impl Eq for TopologySnapshot {}

impl Serialize for TopologySnapshot {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct DeviceEntry<'a> {
            id: DeviceId,
            ports: &'a BTreeSet<u32>,
        }
        struct Devices<'a>(&'a BTreeMap<DeviceId, BTreeSet<u32>>);
        impl Serialize for Devices<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
                for (&id, ports) in self.0 {
                    seq.serialize_element(&DeviceEntry { id, ports })?;
                }
                seq.end()
            }
        }
        struct Hosts<'a>(&'a BTreeMap<MacAddr, Host>);
        impl Serialize for Hosts<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
                for host in self.0.values() {
                    seq.serialize_element(host)?;
                }
                seq.end()
            }
        }
        let mut s = serializer.serialize_struct("TopologySnapshot", 4)?;
        s.serialize_field("captured_at_ns", &self.captured_at_ns)?;
        s.serialize_field("devices", &Devices(&self.devices))?;
        s.serialize_field("links", &self.links)?;
        s.serialize_field("hosts", &Hosts(&self.hosts))?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn port(d: u64, p: u32) -> PortId {
        PortId::new(DeviceId::new(d), p)
    }

    fn two_switch_parts() -> (BTreeMap<DeviceId, BTreeSet<u32>>, BTreeSet<Link>, Vec<Host>) {
        let mut devices = BTreeMap::new();
        devices.insert(DeviceId::new(1), BTreeSet::from([1, 2]));
        devices.insert(DeviceId::new(2), BTreeSet::from([1, 3]));
        let links = BTreeSet::from([
            Link::new(port(1, 2), port(2, 3)),
            Link::new(port(2, 3), port(1, 2)),
        ]);
        let hosts = vec![
            Host::new(MacAddr::from_u64(1), Some(Ipv4Addr::new(10, 0, 0, 1)), port(1, 1)),
            Host::new(MacAddr::from_u64(2), Some(Ipv4Addr::new(10, 0, 0, 2)), port(2, 1)),
        ];
        (devices, links, hosts)
    }

    #[test]
    fn accepts_closed_topology() {
        let (d, l, h) = two_switch_parts();
        let snap = TopologySnapshot::new(d, l, h, 42).unwrap();
        assert_eq!(snap.device_count(), 2);
        assert_eq!(snap.links().len(), 2);
        assert_eq!(snap.host_count(), 2);
        assert_eq!(snap.captured_at_ns(), 42);
        assert!(snap.contains_port(port(1, 2)));
        assert!(!snap.contains_port(port(1, 7)));
    }

    #[test]
    fn rejects_link_to_missing_device() {
        let (d, mut l, h) = two_switch_parts();
        l.insert(Link::new(port(1, 2), port(9, 1)));
        let err = TopologySnapshot::new(d, l, h, 0).unwrap_err();
        assert!(matches!(err, ModelError::InvalidSnapshot(_)));
    }

    #[test]
    fn rejects_link_to_missing_port() {
        let (d, mut l, h) = two_switch_parts();
        l.insert(Link::new(port(1, 9), port(2, 3)));
        assert!(TopologySnapshot::new(d, l, h, 0).is_err());
    }

    #[test]
    fn rejects_self_loop_link() {
        let (d, mut l, h) = two_switch_parts();
        l.insert(Link::new(port(1, 1), port(1, 2)));
        assert!(TopologySnapshot::new(d, l, h, 0).is_err());
    }

    #[test]
    fn rejects_host_on_missing_port() {
        let (d, l, mut h) = two_switch_parts();
        h.push(Host::new(MacAddr::from_u64(3), None, port(1, 9)));
        assert!(TopologySnapshot::new(d, l, h, 0).is_err());
    }

    #[test]
    fn rejects_duplicate_mac() {
        let (d, l, mut h) = two_switch_parts();
        h.push(Host::new(MacAddr::from_u64(1), None, port(2, 1)));
        assert!(TopologySnapshot::new(d, l, h, 0).is_err());
    }

    #[test]
    fn rejects_port_zero() {
        let mut devices = BTreeMap::new();
        devices.insert(DeviceId::new(1), BTreeSet::from([0, 1]));
        assert!(TopologySnapshot::new(devices, BTreeSet::new(), Vec::new(), 0).is_err());
    }

    #[test]
    fn equality_ignores_capture_time() {
        let (d, l, h) = two_switch_parts();
        let a = TopologySnapshot::new(d.clone(), l.clone(), h.clone(), 1).unwrap();
        let b = TopologySnapshot::new(d, l, h, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_snapshot_is_empty() {
        assert!(TopologySnapshot::empty(0).is_empty());
    }
}
