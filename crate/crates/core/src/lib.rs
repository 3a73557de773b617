//! Controller-independent building blocks for programming software defined
//! networks.
//!
//! The crate gives northbound applications one vocabulary for talking to any
//! OpenFlow controller:
//!
//! * [`model`]: identifiers, topology snapshots, flow rules, statistics and
//!   topology change events, all independent of any controller's wire format.
//! * [`driver`]: the contract every controller driver implements, plus the
//!   registry used to construct drivers by name from a [`driver::DriverConfig`].
//! * [`path`]: a port-annotated network graph, deterministic shortest-path
//!   algorithms, a registry for custom algorithms, and compilation of paths
//!   into per-hop flow rules.
//! * [`monitor`]: snapshot diffing and a polling monitor that turns topology
//!   changes into ordered event streams.
//! * [`topospec`]: declarative topology descriptions (used by the bundled
//!   simulator and the benchmark tooling).
//!
//! Applications written against these types run unchanged on every driver;
//! only the configuration names the controller.

pub mod driver;
pub mod model;
pub mod monitor;
pub mod path;
pub mod time;
pub mod topospec;

pub use driver::{CapabilitySet, Driver, DriverConfig, DriverError, DriverRegistry};
pub use model::{
    Action, DeviceId, FlowHandle, FlowRule, FlowStats, Host, Link, MacAddr, MatchFields,
    ModelError, PacketDescriptor, PortId, PortStats, TopologyEvent, TopologyEventKind,
    TopologySnapshot,
};
pub use monitor::{apply_events, diff_snapshots, Monitor, MonitorConfig, MonitorEvent, Subscription};
pub use path::{
    build_graph, compile_one_directional, shortest_path, shortest_path_with, AlgorithmRegistry,
    HostPath, NetGraph, PathAlgorithm, PathError,
};
pub use topospec::TopologySpec;
