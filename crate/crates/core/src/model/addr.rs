//! MAC addresses and IPv4 prefixes.

use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ModelError;

/// A 48-bit Ethernet address.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MacAddr([u8; 6]);

impl MacAddr {
    /// Wraps raw octets.
    pub const fn new(octets: [u8; 6]) -> Self {
        MacAddr(octets)
    }

    /// Builds an address from the low 48 bits of `value`.
    pub const fn from_u64(value: u64) -> Self {
        let b = value.to_be_bytes();
        MacAddr([b[2], b[3], b[4], b[5], b[6], b[7]])
    }

    /// The raw octets.
    pub const fn octets(&self) -> [u8; 6] {
        self.0
    }

    /// The address as the low 48 bits of a u64.
    pub const fn as_u64(&self) -> u64 {
        let o = self.0;
        ((o[0] as u64) << 40)
            | ((o[1] as u64) << 32)
            | ((o[2] as u64) << 24)
            | ((o[3] as u64) << 16)
            | ((o[4] as u64) << 8)
            | (o[5] as u64)
    }
}

impl fmt::Display for MacAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = self.0;
        write!(
            f,
            "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}",
            o[0], o[1], o[2], o[3], o[4], o[5]
        )
    }
}

impl fmt::Debug for MacAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MacAddr({self})")
    }
}

impl FromStr for MacAddr {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || ModelError::MalformedMac(s.to_string());
        let mut octets = [0u8; 6];
        let mut parts = s.split(':');
        for octet in octets.iter_mut() {
            let part = parts.next().ok_or_else(malformed)?;
            if part.len() != 2 {
                return Err(malformed());
            }
            *octet = u8::from_str_radix(part, 16).map_err(|_| malformed())?;
        }
        if parts.next().is_some() {
            return Err(malformed());
        }
        Ok(MacAddr(octets))
    }
}

impl Serialize for MacAddr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MacAddr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// An IPv4 address with a prefix length, e.g. `10.0.0.0/24`.
///
/// Construction masks host bits away, so two spellings of the same network
/// compare equal: `10.0.0.5/24` normalizes to `10.0.0.0/24`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ipv4Prefix {
    addr: Ipv4Addr,
    len: u8,
}

impl Ipv4Prefix {
    /// Builds a prefix, normalizing host bits to zero. `len` must be 0..=32.
    pub fn new(addr: Ipv4Addr, len: u8) -> Result<Self, ModelError> {
        if len > 32 {
            return Err(ModelError::MalformedPrefix(format!("{addr}/{len}")));
        }
        let masked = Ipv4Addr::from(u32::from(addr) & mask(len));
        Ok(Ipv4Prefix { addr: masked, len })
    }

    /// The /32 prefix covering exactly `addr`.
    pub fn host(addr: Ipv4Addr) -> Self {
        Ipv4Prefix { addr, len: 32 }
    }

    /// Network address (host bits zero).
    pub const fn addr(&self) -> Ipv4Addr {
        self.addr
    }

    /// Prefix length in bits.
    pub const fn len(&self) -> u8 {
        self.len
    }

    /// Whether `ip` falls inside this prefix.
    pub fn contains(&self, ip: Ipv4Addr) -> bool {
        (u32::from(ip) & mask(self.len)) == u32::from(self.addr)
    }
}

const fn mask(len: u8) -> u32 {
    if len == 0 {
        0
    } else {
        u32::MAX << (32 - len as u32)
    }
}

impl fmt::Display for Ipv4Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.addr, self.len)
    }
}

impl fmt::Debug for Ipv4Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ipv4Prefix({self})")
    }
}

impl FromStr for Ipv4Prefix {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || ModelError::MalformedPrefix(s.to_string());
        match s.split_once('/') {
            Some((addr, len)) => {
                let addr: Ipv4Addr = addr.parse().map_err(|_| malformed())?;
                let len: u8 = len.parse().map_err(|_| malformed())?;
                Ipv4Prefix::new(addr, len)
            }
            None => {
                let addr: Ipv4Addr = s.parse().map_err(|_| malformed())?;
                Ok(Ipv4Prefix::host(addr))
            }
        }
    }
}

impl Serialize for Ipv4Prefix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ipv4Prefix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mac_display_and_parse_round_trip() {
        let mac = MacAddr::new([0xaa, 0xbb, 0xcc, 0xdd, 0xee, 0x01]);
        assert_eq!(mac.to_string(), "aa:bb:cc:dd:ee:01");
        assert_eq!("aa:bb:cc:dd:ee:01".parse::<MacAddr>().unwrap(), mac);
        // Controllers render MACs uppercase; parsing is case-insensitive.
        assert_eq!("AA:BB:CC:DD:EE:01".parse::<MacAddr>().unwrap(), mac);
    }

    #[test]
    fn mac_u64_round_trip() {
        let mac = MacAddr::from_u64(0x0000_0000_0001);
        assert_eq!(mac.to_string(), "00:00:00:00:00:01");
        assert_eq!(mac.as_u64(), 1);
        assert_eq!(MacAddr::from_u64(mac.as_u64()), mac);
    }

    #[test]
    fn mac_rejects_malformed() {
        for bad in ["", "aa:bb:cc:dd:ee", "aa:bb:cc:dd:ee:ff:00", "aa:bb:cc:dd:ee:g1", "aabbccddeeff"] {
            assert!(bad.parse::<MacAddr>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn prefix_normalizes_host_bits() {
        let a = Ipv4Prefix::new(Ipv4Addr::new(10, 0, 0, 5), 24).unwrap();
        let b = Ipv4Prefix::new(Ipv4Addr::new(10, 0, 0, 0), 24).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "10.0.0.0/24");
    }

    #[test]
    fn prefix_contains() {
        let p: Ipv4Prefix = "10.1.0.0/16".parse().unwrap();
        assert!(p.contains(Ipv4Addr::new(10, 1, 200, 7)));
        assert!(!p.contains(Ipv4Addr::new(10, 2, 0, 1)));
        let all: Ipv4Prefix = "0.0.0.0/0".parse().unwrap();
        assert!(all.contains(Ipv4Addr::new(192, 168, 1, 1)));
        let host: Ipv4Prefix = "10.0.0.2".parse().unwrap();
        assert_eq!(host.len(), 32);
        assert!(host.contains(Ipv4Addr::new(10, 0, 0, 2)));
        assert!(!host.contains(Ipv4Addr::new(10, 0, 0, 3)));
    }

    #[test]
    fn prefix_rejects_malformed() {
        for bad in ["10.0.0.0/33", "10.0.0/8", "banana/8", "10.0.0.0/x"] {
            assert!(bad.parse::<Ipv4Prefix>().is_err(), "{bad:?}");
        }
    }
}
