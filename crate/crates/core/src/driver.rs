//! The driver contract: what every controller driver must provide.
//!
//! A driver translates between the controller-independent model and one
//! controller's native interface, the way an operating system device driver
//! hides hardware differences behind one system call surface. Applications
//! hold a `dyn Driver` and never name the controller; the [`DriverRegistry`]
//! constructs drivers from a [`DriverConfig`] by registered name.
//!
//! Contract semantics drivers must honor:
//!
//! * Operations are synchronous: when `install_flow` returns `Ok`, the
//!   controller has acknowledged the rule.
//! * No internal retries; every failure maps to exactly one
//!   [`DriverError`] variant.
//! * Removing an already-removed rule reports [`DriverError::NotFound`].
//! * A driver instance may be shared across threads.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::{Arc, RwLock};

use serde::Deserialize;

use crate::model::{
    DeviceId, FlowHandle, FlowRule, FlowStats, PortStats, TopologySnapshot,
};

/// Default per-request timeout for remote controllers.
pub const DEFAULT_REQUEST_TIMEOUT_MS: u64 = 5000;

/// What a driver can do. Absent capabilities make the matching operations
/// return [`DriverError::Unsupported`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CapabilitySet {
    /// Can read topology snapshots.
    pub topology_read: bool,
    /// Can install and remove flow rules.
    pub flow_write: bool,
    /// Can read per-rule counters. Implies `flow_write`.
    pub flow_stats: bool,
    /// Can read per-port counters.
    pub port_stats: bool,
    /// Pushes topology events without polling.
    pub event_push: bool,
}

impl CapabilitySet {
    /// Everything supported.
    pub const fn full() -> Self {
        CapabilitySet {
            topology_read: true,
            flow_write: true,
            flow_stats: true,
            port_stats: true,
            event_push: true,
        }
    }

    /// Nothing supported.
    pub const fn none() -> Self {
        CapabilitySet {
            topology_read: false,
            flow_write: false,
            flow_stats: false,
            port_stats: false,
            event_push: false,
        }
    }

    /// Whether the set respects its internal implication: flow statistics
    /// only make sense for a driver that can write flows.
    pub const fn is_coherent(&self) -> bool {
        !self.flow_stats || self.flow_write
    }

    /// Whether every capability in `required` is present here.
    pub const fn satisfies(&self, required: &CapabilitySet) -> bool {
        (self.topology_read || !required.topology_read)
            && (self.flow_write || !required.flow_write)
            && (self.flow_stats || !required.flow_stats)
            && (self.port_stats || !required.port_stats)
            && (self.event_push || !required.event_push)
    }

    /// Refuses an application whose requirements exceed this set.
    pub fn require(&self, required: &CapabilitySet, app: &str) -> Result<(), DriverError> {
        if self.satisfies(required) {
            Ok(())
        } else {
            Err(DriverError::Unsupported(format!(
                "{app} requires capabilities this driver lacks"
            )))
        }
    }
}

/// Why a driver operation failed. Exactly one variant per failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DriverError {
    /// The controller could not be reached.
    Unreachable(String),
    /// The controller rejected the configured credentials.
    AuthFailed,
    /// The named device, rule, or resource does not exist.
    NotFound(String),
    /// The controller refused the request.
    Rejected(String),
    /// The driver or controller lacks the capability.
    Unsupported(String),
    /// The controller answered with something unintelligible.
    ProtocolError(String),
}

impl fmt::Display for DriverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriverError::Unreachable(d) => write!(f, "controller unreachable: {d}"),
            DriverError::AuthFailed => write!(f, "authentication failed"),
            DriverError::NotFound(d) => write!(f, "not found: {d}"),
            DriverError::Rejected(d) => write!(f, "request rejected: {d}"),
            DriverError::Unsupported(d) => write!(f, "unsupported: {d}"),
            DriverError::ProtocolError(d) => write!(f, "protocol error: {d}"),
        }
    }
}

impl std::error::Error for DriverError {}

/// The operations every driver provides.
pub trait Driver: Send + Sync {
    /// What this driver can do. Constant for the driver's lifetime.
    fn capabilities(&self) -> CapabilitySet;

    /// A referentially closed snapshot of the controller's current topology.
    fn get_topology(&self) -> Result<TopologySnapshot, DriverError>;

    /// Installs one rule; on success the controller has acknowledged it and
    /// the returned handle identifies it for later removal.
    fn install_flow(&self, rule: &FlowRule) -> Result<FlowHandle, DriverError>;

    /// Removes a previously installed rule. Removing twice is `NotFound`.
    fn remove_flow(&self, handle: &FlowHandle) -> Result<(), DriverError>;

    /// Lists installed rules, optionally restricted to one device.
    ///
    /// The listing never contains two entries with equal
    /// (device, table, priority, match) and different actions.
    fn list_flows(
        &self,
        device: Option<DeviceId>,
    ) -> Result<Vec<(FlowHandle, FlowRule)>, DriverError>;

    /// Counters for one installed rule.
    fn get_flow_stats(&self, handle: &FlowHandle) -> Result<FlowStats, DriverError>;

    /// Counters for every port of one device.
    fn get_port_stats(&self, device: DeviceId) -> Result<Vec<PortStats>, DriverError>;
}

/// Everything needed to construct a driver.
#[derive(Clone, Deserialize)]
#[serde(default)]
pub struct DriverConfig {
    /// Registered driver name, e.g. `mock`, `onos`, `odl`.
    pub name: String,
    /// Controller endpoint URL.
    pub endpoint: String,
    /// Login user.
    pub username: String,
    /// Login password.
    pub password: String,
    /// Per-request timeout for remote controllers.
    pub request_timeout_ms: u64,
    /// Driver-specific settings, e.g. endpoint path overrides or the mock's
    /// topology.
    pub extras: BTreeMap<String, String>,
}

impl Default for DriverConfig {
    fn default() -> Self {
        DriverConfig {
            name: "mock".into(),
            endpoint: "http://127.0.0.1:8181".into(),
            username: String::new(),
            password: String::new(),
            request_timeout_ms: DEFAULT_REQUEST_TIMEOUT_MS,
            extras: BTreeMap::new(),
        }
    }
}

impl fmt::Debug for DriverConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriverConfig")
            .field("name", &self.name)
            .field("endpoint", &self.endpoint)
            .field("username", &self.username)
            .field("password", &"<redacted>")
            .field("request_timeout_ms", &self.request_timeout_ms)
            .field("extras", &self.extras)
            .finish()
    }
}

impl DriverConfig {
    /// Parses a TOML document:
    ///
    /// ```toml
    /// name = "onos"
    /// endpoint = "http://controller:8181"
    /// username = "onos"
    /// password = "rocks"
    /// request_timeout_ms = 5000
    ///
    /// [extras]
    /// "path.devices" = "/onos/v1/devices"
    /// ```
    pub fn from_toml_str(text: &str) -> Result<Self, DriverError> {
        toml::from_str(text)
            .map_err(|e| DriverError::Rejected(format!("bad configuration: {e}")))
    }

    /// Loads a TOML file.
    pub fn from_toml_file(path: &Path) -> Result<Self, DriverError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            DriverError::Rejected(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    /// Applies the `UMBRELLA_CONTROLLER`, `UMBRELLA_ENDPOINT`,
    /// `UMBRELLA_USER`, and `UMBRELLA_PASS` environment variables.
    pub fn apply_env(&mut self) {
        self.apply_env_with(|k| std::env::var(k).ok());
    }

    /// Like [`DriverConfig::apply_env`] with an injectable lookup, so tests
    /// can avoid mutating process environment.
    pub fn apply_env_with(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(v) = lookup("UMBRELLA_CONTROLLER") {
            self.name = v;
        }
        if let Some(v) = lookup("UMBRELLA_ENDPOINT") {
            self.endpoint = v;
        }
        if let Some(v) = lookup("UMBRELLA_USER") {
            self.username = v;
        }
        if let Some(v) = lookup("UMBRELLA_PASS") {
            self.password = v;
        }
    }

    /// Defaults, overlaid with an optional TOML file, overlaid with the
    /// environment.
    pub fn load(path: Option<&Path>) -> Result<Self, DriverError> {
        let mut config = match path {
            Some(p) => Self::from_toml_file(p)?,
            None => Self::default(),
        };
        config.apply_env();
        Ok(config)
    }
}

/// Constructor for one driver kind.
pub type DriverFactory =
    Arc<dyn Fn(&DriverConfig) -> Result<Box<dyn Driver>, DriverError> + Send + Sync>;

/// Errors from registering or constructing drivers.
#[derive(Debug)]
pub enum RegistryError {
    /// The name is already registered.
    DuplicateName(String),
    /// No factory is registered under the requested name.
    UnknownDriver(String),
    /// The factory ran but failed to build the driver.
    Construction(DriverError),
}

impl fmt::Display for RegistryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegistryError::DuplicateName(n) => write!(f, "driver {n:?} already registered"),
            RegistryError::UnknownDriver(n) => write!(f, "unknown driver {n:?}"),
            RegistryError::Construction(e) => write!(f, "driver construction failed: {e}"),
        }
    }
}

impl std::error::Error for RegistryError {}

impl From<DriverError> for RegistryError {
    fn from(e: DriverError) -> Self {
        RegistryError::Construction(e)
    }
}

/// Maps driver names to factories.
#[derive(Default)]
pub struct DriverRegistry {
    factories: RwLock<BTreeMap<String, DriverFactory>>,
}

impl DriverRegistry {
    /// An empty registry.
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a factory under a unique name.
    pub fn register(
        &self,
        name: impl Into<String>,
        factory: DriverFactory,
    ) -> Result<(), RegistryError> {
        let name = name.into();
        let mut map = self.factories.write().expect("registry lock poisoned");
        if map.contains_key(&name) {
            return Err(RegistryError::DuplicateName(name));
        }
        map.insert(name, factory);
        Ok(())
    }

    /// Constructs a driver for `config.name`.
    pub fn create(&self, config: &DriverConfig) -> Result<Box<dyn Driver>, RegistryError> {
        let factory = {
            let map = self.factories.read().expect("registry lock poisoned");
            map.get(&config.name)
                .cloned()
                .ok_or_else(|| RegistryError::UnknownDriver(config.name.clone()))?
        };
        factory(config).map_err(RegistryError::from)
    }

    /// Registered names, sorted.
    pub fn names(&self) -> Vec<String> {
        self.factories
            .read()
            .expect("registry lock poisoned")
            .keys()
            .cloned()
            .collect()
    }
}
