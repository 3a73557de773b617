//! Device and port identifiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ModelError;

/// Canonical identity of an OpenFlow switch: its 64-bit datapath id.
///
/// Controllers spell the same datapath differently; all spellings normalize
/// to this one value via [`normalize_device_id`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeviceId(u64);

impl DeviceId {
    /// Wraps a raw datapath id.
    pub const fn new(dpid: u64) -> Self {
        DeviceId(dpid)
    }

    /// The raw 64-bit datapath id.
    pub const fn dpid(&self) -> u64 {
        self.0
    }

    /// The ONOS spelling: `of:` followed by 16 lowercase hex digits.
    pub fn render_onos(&self) -> String {
        format!("of:{:016x}", self.0)
    }

    /// The OpenDaylight spelling: `openflow:` followed by the decimal dpid.
    pub fn render_odl(&self) -> String {
        format!("openflow:{}", self.0)
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "of:{:016x}", self.0)
    }
}

impl fmt::Debug for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DeviceId({})", self.0)
    }
}

impl FromStr for DeviceId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_device_id(s)
    }
}

impl Serialize for DeviceId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render_onos())
    }
}

impl<'de> Deserialize<'de> for DeviceId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        normalize_device_id(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses any accepted device id spelling into its canonical form.
///
/// Accepted spellings:
///
/// * `of:` + exactly 16 hex digits (ONOS), e.g. `of:0000000000000001`
/// * `openflow:` + decimal (OpenDaylight), e.g. `openflow:1`
/// * bare decimal, e.g. `1`
///
/// Normalization is idempotent: re-normalizing any rendering of the result
/// yields the same value.
pub fn normalize_device_id(text: &str) -> Result<DeviceId, ModelError> {
    let malformed = || ModelError::MalformedId(text.to_string());
    if let Some(hex) = text.strip_prefix("of:") {
        if hex.len() != 16 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(malformed());
        }
        let dpid = u64::from_str_radix(hex, 16).map_err(|_| malformed())?;
        return Ok(DeviceId(dpid));
    }
    if let Some(dec) = text.strip_prefix("openflow:") {
        let dpid = parse_decimal(dec).ok_or_else(malformed)?;
        return Ok(DeviceId(dpid));
    }
    let dpid = parse_decimal(text).ok_or_else(malformed)?;
    Ok(DeviceId(dpid))
}

fn parse_decimal(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// One port on one device. `port_no` is 1-based for physical ports.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortId {
    /// Owning device.
    pub device: DeviceId,
    /// OpenFlow port number on that device.
    pub port_no: u32,
}

impl PortId {
    /// Builds a port id from its parts.
    pub const fn new(device: DeviceId, port_no: u32) -> Self {
        PortId { device, port_no }
    }
}

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.device, self.port_no)
    }
}

impl fmt::Debug for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PortId({}/{})", self.device.dpid(), self.port_no)
    }
}
