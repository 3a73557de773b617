//! A deterministic in-process controller and network simulator.
//!
//! [`MockController`] implements the full driver contract against a simulated
//! OpenFlow network instead of a real controller. Time is virtual: a
//! nanosecond clock advances only through explicit operations
//! ([`MockController::advance_to`], RPC costs from the [`LatencyModel`],
//! packet emissions), never from the wall clock, so every run of the same
//! operation sequence produces bit-identical results.
//!
//! The simulator models exactly one latency phenomenon: rule installation.
//! A rule requested at time `t` becomes visible to forwarding at an
//! activation instant computed from the latency model, and packet trains
//! emitted across that instant observe the transition. Link propagation and
//! switch processing are zero-cost, packets are descriptors rather than byte
//! buffers, and the only loss mechanism is the absence of a matching rule
//! (or an explicit drop action). That isolates flow rule setup time, which
//! is the quantity the benchmark harness measures.
//!
//! Rule visibility is evaluated from timestamps (`active_at`, `removed_at`)
//! rather than by mutating tables as the clock moves, so a packet train may
//! be evaluated retroactively: installing rules first and then running a
//! train whose start time lies in the past yields the same report as strict
//! chronological interleaving. Topology mutations are not backdated this
//! way; they take effect at the simulated instant they are applied and stay
//! in effect.

mod controller;
mod latency;

pub use controller::{
    DeliveryReport, MockController, Mutation, PacketTrain, MOCK_FRAME_BYTES,
};
pub use latency::{InstallMode, LatencyModel};

use std::fmt;

use umbrella_core::model::MacAddr;

/// Errors from simulator-control operations (the driver contract's own
/// operations report [`umbrella_core::driver::DriverError`] instead).
#[derive(Clone, Debug, PartialEq)]
pub enum MockError {
    /// The topology description failed validation.
    InvalidSpec(String),
    /// A latency parameter is negative, non-finite, or unparseable.
    InvalidLatency(String),
    /// The mutation contradicts the current topology.
    InvalidMutation(String),
    /// The packet train names a host the topology lacks.
    UnknownHost(MacAddr),
    /// Virtual time cannot move backwards.
    ClockRegression {
        /// Current virtual time.
        now_ns: u64,
        /// The earlier instant that was requested.
        requested_ns: u64,
    },
    /// The packet train parameters are unusable.
    InvalidTrain(String),
}

impl fmt::Display for MockError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MockError::InvalidSpec(d) => write!(f, "invalid topology spec: {d}"),
            MockError::InvalidLatency(d) => write!(f, "invalid latency model: {d}"),
            MockError::InvalidMutation(d) => write!(f, "invalid mutation: {d}"),
            MockError::UnknownHost(mac) => write!(f, "unknown host {mac}"),
            MockError::ClockRegression { now_ns, requested_ns } => write!(
                f,
                "clock regression: now is {now_ns} ns, requested {requested_ns} ns"
            ),
            MockError::InvalidTrain(d) => write!(f, "invalid packet train: {d}"),
        }
    }
}

impl std::error::Error for MockError {}
