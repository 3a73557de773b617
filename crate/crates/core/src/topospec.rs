//! Declarative topology descriptions.
//!
//! A [`TopologySpec`] names a topology without building it: either a linear
//! chain of `n` switches with one host per switch, or an explicit list of
//! devices, links, and hosts. Specs load from JSON:
//!
//! ```json
//! {"kind": "linear", "n": 10}
//! ```
//!
//! ```json
//! {"devices": [{"id": "of:0000000000000001", "ports": [1, 2]}],
//!  "links":   [],
//!  "hosts":   [{"mac": "00:00:00:00:00:01", "ip": "10.0.0.1",
//!               "device": "of:0000000000000001", "port": 1}]}
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use crate::model::{DeviceId, Host, Link, MacAddr, ModelError, PortId, TopologySnapshot};

/// Port carrying the host on every switch of a linear topology.
pub const LINEAR_HOST_PORT: u32 = 1;
/// Port facing the next (higher-numbered) switch in a linear topology.
pub const LINEAR_RIGHT_PORT: u32 = 2;
/// Port facing the previous (lower-numbered) switch in a linear topology.
pub const LINEAR_LEFT_PORT: u32 = 3;

/// A topology description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TopologySpec {
    /// `n` switches in a chain, one host per switch.
    ///
    /// Switch `i` (1-based) gets device id `i`, a host with MAC
    /// `00:00:00:00:xx:yy` (the 48-bit encoding of `i`) and IPv4
    /// `10.0.(i>>8).(i&255)` on port 1; inter-switch cables run from port 2
    /// of switch `i` to port 3 of switch `i+1`, in both directions.
    Linear {
        /// Switch count; must be at least 1.
        n: u32,
    },
    /// Devices, links, and hosts listed in full.
    Explicit {
        /// Devices and their ports.
        devices: Vec<DeviceSpec>,
        /// Directed links.
        links: Vec<LinkSpec>,
        /// Hosts.
        hosts: Vec<HostSpec>,
    },
}

/// One device in an explicit spec.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceSpec {
    /// Device id, in any accepted spelling.
    pub id: DeviceId,
    /// Its ports.
    pub ports: BTreeSet<u32>,
}

/// One directed link in an explicit spec.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSpec {
    /// Egress endpoint.
    pub src: EndpointSpec,
    /// Ingress endpoint.
    pub dst: EndpointSpec,
}

/// A (device, port) pair in an explicit spec.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointSpec {
    /// Device id, in any accepted spelling.
    pub device: DeviceId,
    /// Port number.
    pub port: u32,
}

/// One host in an explicit spec.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostSpec {
    /// Host MAC.
    pub mac: MacAddr,
    /// Optional IPv4 address.
    #[serde(default)]
    pub ip: Option<Ipv4Addr>,
    /// Attachment device.
    pub device: DeviceId,
    /// Attachment port.
    pub port: u32,
}

#[derive(Deserialize)]
struct SpecDoc {
    #[serde(default)]
    kind: Option<String>,
    #[serde(default)]
    n: Option<u32>,
    #[serde(default)]
    devices: Option<Vec<DeviceSpec>>,
    #[serde(default)]
    links: Option<Vec<LinkSpec>>,
    #[serde(default)]
    hosts: Option<Vec<HostSpec>>,
}

impl TopologySpec {
    /// A linear chain of `n` switches; `n` must be at least 1.
    pub fn linear(n: u32) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::InvalidSpec(
                "linear topology needs at least 1 switch".into(),
            ));
        }
        Ok(TopologySpec::Linear { n })
    }

    /// Parses a spec from its JSON form.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: SpecDoc = serde_json::from_str(text)
            .map_err(|e| ModelError::InvalidSpec(e.to_string()))?;
        match doc.kind.as_deref() {
            Some("linear") => {
                let n = doc
                    .n
                    .ok_or_else(|| ModelError::InvalidSpec("linear spec needs \"n\"".into()))?;
                TopologySpec::linear(n)
            }
            Some("explicit") | None => Ok(TopologySpec::Explicit {
                devices: doc.devices.unwrap_or_default(),
                links: doc.links.unwrap_or_default(),
                hosts: doc.hosts.unwrap_or_default(),
            }),
            Some(other) => Err(ModelError::InvalidSpec(format!(
                "unknown topology kind {other:?}"
            ))),
        }
    }

    /// Renders the spec as JSON.
    pub fn to_json(&self) -> String {
        match self {
            TopologySpec::Linear { n } => {
                serde_json::json!({"kind": "linear", "n": n}).to_string()
            }
            TopologySpec::Explicit { devices, links, hosts } => serde_json::json!({
                "devices": devices,
                "links": links,
                "hosts": hosts,
            })
            .to_string(),
        }
    }

    /// Expands the spec into a validated snapshot.
    pub fn materialize(&self, captured_at_ns: u64) -> Result<TopologySnapshot, ModelError> {
        match self {
            TopologySpec::Linear { n } => materialize_linear(*n, captured_at_ns),
            TopologySpec::Explicit { devices, links, hosts } => {
                let mut device_map = BTreeMap::new();
                for d in devices {
                    if device_map.insert(d.id, d.ports.clone()).is_some() {
                        return Err(ModelError::InvalidSpec(format!(
                            "duplicate device {}",
                            d.id
                        )));
                    }
                }
                let mut link_set = BTreeSet::new();
                for l in links {
                    let link = Link::new(
                        PortId::new(l.src.device, l.src.port),
                        PortId::new(l.dst.device, l.dst.port),
                    );
                    if !link_set.insert(link) {
                        return Err(ModelError::InvalidSpec(format!("duplicate link {link}")));
                    }
                }
                let hosts = hosts
                    .iter()
                    .map(|h| Host::new(h.mac, h.ip, PortId::new(h.device, h.port)))
                    .collect::<Vec<_>>();
                TopologySnapshot::new(device_map, link_set, hosts, captured_at_ns)
            }
        }
    }
}

/// MAC of the host on switch `i` of a linear topology.
pub fn linear_host_mac(i: u32) -> MacAddr {
    MacAddr::from_u64(i as u64)
}

/// IPv4 address of the host on switch `i` of a linear topology.
pub fn linear_host_ip(i: u32) -> Ipv4Addr {
    Ipv4Addr::new(10, 0, (i >> 8) as u8, (i & 0xff) as u8)
}

fn materialize_linear(n: u32, captured_at_ns: u64) -> Result<TopologySnapshot, ModelError> {
    if n == 0 {
        return Err(ModelError::InvalidSpec(
            "linear topology needs at least 1 switch".into(),
        ));
    }
    let mut devices = BTreeMap::new();
    let mut links = BTreeSet::new();
    let mut hosts = Vec::new();
    for i in 1..=n {
        let id = DeviceId::new(i as u64);
        let mut ports = BTreeSet::from([LINEAR_HOST_PORT]);
        if i < n {
            ports.insert(LINEAR_RIGHT_PORT);
        }
        if i > 1 {
            ports.insert(LINEAR_LEFT_PORT);
        }
        devices.insert(id, ports);
        hosts.push(Host::new(
            linear_host_mac(i),
            Some(linear_host_ip(i)),
            PortId::new(id, LINEAR_HOST_PORT),
        ));
        if i < n {
            let right = PortId::new(id, LINEAR_RIGHT_PORT);
            let left = PortId::new(DeviceId::new(i as u64 + 1), LINEAR_LEFT_PORT);
            links.insert(Link::new(right, left));
            links.insert(Link::new(left, right));
        }
    }
    TopologySnapshot::new(devices, links, hosts, captured_at_ns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_10_has_expected_shape() {
        let snap = TopologySpec::linear(10).unwrap().materialize(0).unwrap();
        assert_eq!(snap.device_count(), 10);
        assert_eq!(snap.links().len(), 18);
        assert_eq!(snap.host_count(), 10);
    }

    #[test]
    fn linear_1_is_one_isolated_switch_with_one_host() {
        let snap = TopologySpec::linear(1).unwrap().materialize(0).unwrap();
        assert_eq!(snap.device_count(), 1);
        assert_eq!(snap.links().len(), 0);
        assert_eq!(snap.host_count(), 1);
        assert_eq!(
            snap.device_ports(DeviceId::new(1)),
            Some(&BTreeSet::from([LINEAR_HOST_PORT]))
        );
    }

    #[test]
    fn linear_0_rejected() {
        assert!(TopologySpec::linear(0).is_err());
        assert!(TopologySpec::from_json(r#"{"kind":"linear","n":0}"#).is_err());
    }

    #[test]
    fn linear_endpoint_hosts_are_min_and_max_macs() {
        let snap = TopologySpec::linear(5).unwrap().materialize(0).unwrap();
        let macs: Vec<_> = snap.hosts().map(|h| h.mac).collect();
        assert_eq!(macs.first().copied(), Some(linear_host_mac(1)));
        assert_eq!(macs.last().copied(), Some(linear_host_mac(5)));
    }

    #[test]
    fn parses_linear_json() {
        let spec = TopologySpec::from_json(r#"{"kind":"linear","n":10}"#).unwrap();
        assert_eq!(spec, TopologySpec::Linear { n: 10 });
    }

    #[test]
    fn parses_explicit_json() {
        let text = r#"{
            "devices": [
                {"id": "of:0000000000000001", "ports": [1, 2]},
                {"id": "openflow:2", "ports": [1, 3]}
            ],
            "links": [
                {"src": {"device": "of:0000000000000001", "port": 2},
                 "dst": {"device": "openflow:2", "port": 3}},
                {"src": {"device": "openflow:2", "port": 3},
                 "dst": {"device": "of:0000000000000001", "port": 2}}
            ],
            "hosts": [
                {"mac": "00:00:00:00:00:01", "ip": "10.0.0.1",
                 "device": "of:0000000000000001", "port": 1},
                {"mac": "00:00:00:00:00:02",
                 "device": "openflow:2", "port": 1}
            ]
        }"#;
        let snap = TopologySpec::from_json(text).unwrap().materialize(7).unwrap();
        assert_eq!(snap.device_count(), 2);
        assert_eq!(snap.links().len(), 2);
        assert_eq!(snap.host_count(), 2);
        assert_eq!(snap.host(MacAddr::from_u64(2)).unwrap().ip, None);
    }

    #[test]
    fn empty_explicit_materializes_empty() {
        let snap = TopologySpec::from_json("{}").unwrap().materialize(0).unwrap();
        assert!(snap.is_empty());
    }

    #[test]
    fn explicit_with_dangling_link_fails_to_materialize() {
        let text = r#"{
            "devices": [{"id": "1", "ports": [1]}],
            "links": [{"src": {"device": "1", "port": 1},
                       "dst": {"device": "2", "port": 1}}],
            "hosts": []
        }"#;
        let spec = TopologySpec::from_json(text).unwrap();
        assert!(spec.materialize(0).is_err());
    }

    #[test]
    fn json_round_trip() {
        for spec in [
            TopologySpec::linear(4).unwrap(),
            TopologySpec::from_json(
                r#"{"devices":[{"id":"1","ports":[1]}],"links":[],"hosts":[]}"#,
            )
            .unwrap(),
        ] {
            let back = TopologySpec::from_json(&spec.to_json()).unwrap();
            assert_eq!(spec, back);
        }
    }

    #[test]
    fn unknown_kind_rejected() {
        assert!(TopologySpec::from_json(r#"{"kind":"ring","n":3}"#).is_err());
    }
}
