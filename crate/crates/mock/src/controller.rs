//! The simulated controller and network.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use umbrella_core::driver::{CapabilitySet, Driver, DriverError};
use umbrella_core::model::{
    Action, DeviceId, FlowHandle, FlowRule, FlowStats, Host, Link, MacAddr, PacketDescriptor,
    PortId, PortStats, TopologySnapshot, ETH_TYPE_IPV4,
};
use umbrella_core::topospec::TopologySpec;

use crate::{InstallMode, LatencyModel, MockError};

/// Every simulated frame is accounted as this many bytes in rule and port
/// byte counters.
pub const MOCK_FRAME_BYTES: u64 = 100;

/// A timed sequence of identical packets from one host to another.
///
/// Packet `i` is emitted at `start_at_ns + i * interval_ns`. Frames are
/// IPv4-typed and carry the hosts' addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PacketTrain {
    /// Sending host.
    pub src: MacAddr,
    /// Receiving host.
    pub dst: MacAddr,
    /// Emission time of packet 0.
    pub start_at_ns: u64,
    /// Gap between consecutive emissions. Must be positive.
    pub interval_ns: u64,
    /// Number of packets.
    pub count: u64,
}

/// Exact outcome of one packet train.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeliveryReport {
    /// Packets emitted.
    pub sent: u64,
    /// Packets that reached the destination host's attachment port.
    pub received: u64,
    /// Index of the first received packet, when any arrived.
    pub first_received_index: Option<u64>,
}

impl DeliveryReport {
    /// Packets that never arrived.
    pub fn lost(&self) -> u64 {
        self.sent - self.received
    }
}

/// One topology edit, applied at the current virtual instant.
///
/// Links are treated as cables: adding or removing one affects both
/// directions. Removing a device cascades to its links, hosts, and flow
/// rules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// New device with the given port numbers.
    AddDevice {
        /// Identifier; must be unused.
        device: DeviceId,
        /// Port numbers; 0 is not a valid port.
        ports: BTreeSet<u32>,
    },
    /// Removes a device and everything referencing it.
    RemoveDevice(DeviceId),
    /// Connects two existing ports in both directions.
    AddLink(Link),
    /// Disconnects a cable (both directions).
    RemoveLink(Link),
    /// Attaches a new host to an existing port.
    AddHost(Host),
    /// Detaches the host with this MAC.
    RemoveHost(MacAddr),
}

#[derive(Clone, Copy, Debug, Default)]
struct PortCounter {
    rx_packets: u64,
    tx_packets: u64,
    rx_bytes: u64,
    tx_bytes: u64,
}

#[derive(Clone, Debug)]
struct TableEntry {
    handle_id: String,
    rule: FlowRule,
    install_seq: u64,
    installed_at_ns: u64,
    active_at_ns: u64,
    removed_at_ns: Option<u64>,
    packets: u64,
    bytes: u64,
}

impl TableEntry {
    fn is_current(&self) -> bool {
        self.removed_at_ns.is_none()
    }

    /// Whether forwarding sees this rule at virtual instant `t`.
    fn visible_at(&self, t: u64) -> bool {
        self.active_at_ns <= t && self.removed_at_ns.map_or(true, |r| t < r)
    }
}

#[derive(Debug)]
struct SimState {
    devices: BTreeMap<DeviceId, BTreeSet<u32>>,
    links: BTreeSet<Link>,
    hosts: BTreeMap<MacAddr, Host>,
    table: Vec<TableEntry>,
    port_counters: BTreeMap<PortId, PortCounter>,
    latency: LatencyModel,
    now_ns: u64,
    /// End of the controller's serial install pipeline (Sequential mode).
    install_tail_ns: u64,
    next_seq: u64,
}

/// The simulator. Shareable across threads; calls are serialized in arrival
/// order, satisfying the driver contract's synchronous semantics.
#[derive(Debug)]
pub struct MockController {
    state: Mutex<SimState>,
}

impl MockController {
    /// Builds a simulator over the topology `spec` describes, with empty
    /// flow tables and the virtual clock at 0.
    pub fn with_topology(spec: &TopologySpec, latency: LatencyModel) -> Result<Self, MockError> {
        let snapshot = spec
            .materialize(0)
            .map_err(|e| MockError::InvalidSpec(e.to_string()))?;
        Ok(MockController {
            state: Mutex::new(SimState {
                devices: snapshot.devices().clone(),
                links: snapshot.links().clone(),
                hosts: snapshot.hosts().map(|h| (h.mac, h.clone())).collect(),
                table: Vec::new(),
                port_counters: BTreeMap::new(),
                latency,
                now_ns: 0,
                install_tail_ns: 0,
                next_seq: 0,
            }),
        })
    }

    /// Convenience for a linear chain of `n` switches.
    pub fn linear(n: u32, latency: LatencyModel) -> Result<Self, MockError> {
        let spec = TopologySpec::linear(n).map_err(|e| MockError::InvalidSpec(e.to_string()))?;
        MockController::with_topology(&spec, latency)
    }

    fn state(&self) -> std::sync::MutexGuard<'_, SimState> {
        self.state.lock().expect("simulator lock")
    }

    /// Current virtual time.
    pub fn now_ns(&self) -> u64 {
        self.state().now_ns
    }

    /// Moves the virtual clock forward to `t_ns`. `t_ns == now` is a no-op;
    /// moving backwards is refused.
    pub fn advance_to(&self, t_ns: u64) -> Result<(), MockError> {
        let mut state = self.state();
        if t_ns < state.now_ns {
            return Err(MockError::ClockRegression { now_ns: state.now_ns, requested_ns: t_ns });
        }
        state.now_ns = t_ns;
        Ok(())
    }

    /// Moves the virtual clock forward by `delta_ns`.
    pub fn advance_by(&self, delta_ns: u64) -> Result<(), MockError> {
        let mut state = self.state();
        state.now_ns = state.now_ns.saturating_add(delta_ns);
        Ok(())
    }

    /// Applies one topology edit at the current instant.
    pub fn apply_mutation(&self, mutation: &Mutation) -> Result<(), MockError> {
        let mut state = self.state();
        let fail = |d: String| Err(MockError::InvalidMutation(d));
        match mutation {
            Mutation::AddDevice { device, ports } => {
                if state.devices.contains_key(device) {
                    return fail(format!("device {device} already exists"));
                }
                if ports.contains(&0) {
                    return fail("port 0 is not a valid port number".into());
                }
                state.devices.insert(*device, ports.clone());
            }
            Mutation::RemoveDevice(device) => {
                if state.devices.remove(device).is_none() {
                    return fail(format!("device {device} does not exist"));
                }
                state
                    .links
                    .retain(|l| l.src.device != *device && l.dst.device != *device);
                state.hosts.retain(|_, h| h.attachment.device != *device);
                state.table.retain(|e| e.rule.device() != *device);
                state.port_counters.retain(|p, _| p.device != *device);
            }
            Mutation::AddLink(link) => {
                if link.src.device == link.dst.device {
                    return fail(format!("link {link} connects a device to itself"));
                }
                let port_ok = |s: &SimState, p: PortId| {
                    s.devices.get(&p.device).is_some_and(|ports| ports.contains(&p.port_no))
                };
                if !port_ok(&state, link.src) || !port_ok(&state, link.dst) {
                    return fail(format!("link {link} references a missing port"));
                }
                let reverse = link.reversed();
                if state.links.contains(link) || state.links.contains(&reverse) {
                    return fail(format!("link {link} already exists"));
                }
                state.links.insert(*link);
                state.links.insert(reverse);
            }
            Mutation::RemoveLink(link) => {
                let reverse = link.reversed();
                if !state.links.contains(link) || !state.links.contains(&reverse) {
                    return fail(format!("link {link} is not a present cable"));
                }
                state.links.remove(link);
                state.links.remove(&reverse);
            }
            Mutation::AddHost(host) => {
                if state.hosts.contains_key(&host.mac) {
                    return fail(format!("host {} already exists", host.mac));
                }
                let p = host.attachment;
                if !state.devices.get(&p.device).is_some_and(|ports| ports.contains(&p.port_no)) {
                    return fail(format!("host attachment {p} does not exist"));
                }
                state.hosts.insert(host.mac, host.clone());
            }
            Mutation::RemoveHost(mac) => {
                if state.hosts.remove(mac).is_none() {
                    return fail(format!("host {mac} does not exist"));
                }
            }
        }
        Ok(())
    }

    /// Emits the train and reports exactly what arrived.
    ///
    /// Each packet is forwarded hop by hop using the rules visible at its
    /// emission instant, so trains may be evaluated after later rule
    /// installs (visibility is timestamp-based). The clock ends at the last
    /// emission time if that is later than now.
    pub fn run_packet_train(&self, train: &PacketTrain) -> Result<DeliveryReport, MockError> {
        let mut state = self.state();
        let src = state
            .hosts
            .get(&train.src)
            .cloned()
            .ok_or(MockError::UnknownHost(train.src))?;
        let dst = state
            .hosts
            .get(&train.dst)
            .cloned()
            .ok_or(MockError::UnknownHost(train.dst))?;
        if train.interval_ns == 0 {
            return Err(MockError::InvalidTrain("interval_ns must be positive".into()));
        }

        if train.count == 0 {
            return Ok(DeliveryReport { sent: 0, received: 0, first_received_index: None });
        }
        let last_emission = (train.count - 1)
            .checked_mul(train.interval_ns)
            .and_then(|offset| train.start_at_ns.checked_add(offset))
            .ok_or_else(|| MockError::InvalidTrain("emission time overflows".into()))?;

        // A packet's fate depends on virtual time only through rule
        // visibility, which flips at finitely many activation and removal
        // instants. Walk the network once per segment of identical fate and
        // scale the counters, instead of once per packet.
        let mut cuts = BTreeSet::from([0u64]);
        for entry in &state.table {
            for boundary in
                std::iter::once(entry.active_at_ns).chain(entry.removed_at_ns)
            {
                if boundary <= train.start_at_ns {
                    continue;
                }
                let delta = boundary - train.start_at_ns;
                let index = delta.div_ceil(train.interval_ns);
                if index < train.count {
                    cuts.insert(index);
                }
            }
        }

        let mut received = 0u64;
        let mut first_received_index = None;
        let cuts: Vec<u64> = cuts.into_iter().collect();
        for (k, &lo) in cuts.iter().enumerate() {
            let hi = cuts.get(k + 1).copied().unwrap_or(train.count);
            let t = train.start_at_ns + lo * train.interval_ns;
            let trace = trace_packet(&state, t, &src, &dst);
            apply_trace(&mut state, &trace, hi - lo);
            if trace.delivered {
                received += hi - lo;
                if first_received_index.is_none() {
                    first_received_index = Some(lo);
                }
            }
        }
        state.now_ns = state.now_ns.max(last_emission);
        Ok(DeliveryReport { sent: train.count, received, first_received_index })
    }
}

/// Everything one packet's walk touches, so a whole segment of identical
/// packets can be accounted in one pass.
struct WalkTrace {
    /// Ingress ports crossed, in hop order.
    rx_ports: Vec<PortId>,
    /// Egress ports crossed, in hop order.
    tx_ports: Vec<PortId>,
    /// Table indices of the rules that matched.
    matched: Vec<usize>,
    /// Whether the packet reached the destination's attachment port.
    delivered: bool,
}

/// Credits one walk's counters `n` times over.
fn apply_trace(state: &mut SimState, trace: &WalkTrace, n: u64) {
    for port in &trace.rx_ports {
        let counter = state.port_counters.entry(*port).or_default();
        counter.rx_packets += n;
        counter.rx_bytes += n * MOCK_FRAME_BYTES;
    }
    for port in &trace.tx_ports {
        let counter = state.port_counters.entry(*port).or_default();
        counter.tx_packets += n;
        counter.tx_bytes += n * MOCK_FRAME_BYTES;
    }
    for &idx in &trace.matched {
        state.table[idx].packets += n;
        state.table[idx].bytes += n * MOCK_FRAME_BYTES;
    }
}

/// Walks one packet emitted at instant `t` through the network, recording
/// what it touches without mutating anything.
fn trace_packet(state: &SimState, t: u64, src: &Host, dst: &Host) -> WalkTrace {
    let mut trace = WalkTrace {
        rx_ports: Vec::new(),
        tx_ports: Vec::new(),
        matched: Vec::new(),
        delivered: false,
    };
    let mut packet = PacketDescriptor {
        in_port: src.attachment.port_no,
        eth_src: src.mac,
        eth_dst: dst.mac,
        eth_type: ETH_TYPE_IPV4,
        ipv4_src: src.ip,
        ipv4_dst: dst.ip,
    };
    let mut device = src.attachment.device;
    let hop_budget = state.devices.len();
    for _ in 0..hop_budget {
        trace.rx_ports.push(PortId::new(device, packet.in_port));

        // Highest priority wins; among equals the earliest install wins.
        let mut best: Option<usize> = None;
        for (idx, entry) in state.table.iter().enumerate() {
            if entry.rule.device() != device
                || !entry.visible_at(t)
                || !entry.rule.matches(&packet)
            {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    let current = &state.table[b];
                    entry.rule.priority() > current.rule.priority()
                        || (entry.rule.priority() == current.rule.priority()
                            && entry.install_seq < current.install_seq)
                }
            };
            if better {
                best = Some(idx);
            }
        }
        let Some(best) = best else { return trace };
        trace.matched.push(best);

        // Actions run in order; output ends processing at this switch.
        let mut out_port = None;
        for action in state.table[best].rule.actions() {
            match action {
                Action::SetEthDst(mac) => packet.eth_dst = *mac,
                Action::Drop => return trace,
                Action::Output(p) => {
                    out_port = Some(*p);
                    break;
                }
            }
        }
        let Some(out_port) = out_port else { return trace };
        let egress = PortId::new(device, out_port);
        trace.tx_ports.push(egress);
        if egress == dst.attachment {
            trace.delivered = true;
            return trace;
        }
        let Some(link) = state.links.iter().find(|l| l.src == egress).copied() else {
            return trace;
        };
        packet.in_port = link.dst.port_no;
        device = link.dst.device;
    }
    trace // hop budget exhausted: the rules form a loop
}

impl Driver for MockController {
    /// The simulator supports the whole contract surface.
    fn capabilities(&self) -> CapabilitySet {
        CapabilitySet::full()
    }

    fn get_topology(&self) -> Result<TopologySnapshot, DriverError> {
        let mut state = self.state();
        state.now_ns += state.latency.base_rpc_ns();
        let snapshot = TopologySnapshot::new(
            state.devices.clone(),
            state.links.clone(),
            state.hosts.values().cloned(),
            state.now_ns,
        )
        .expect("simulator topology stays closed");
        Ok(snapshot)
    }

    fn install_flow(&self, rule: &FlowRule) -> Result<FlowHandle, DriverError> {
        let mut state = self.state();
        state.now_ns += state.latency.base_rpc_ns();
        if !state.devices.contains_key(&rule.device()) {
            return Err(DriverError::NotFound(format!("device {}", rule.device())));
        }

        // Same (device, table, priority, match) overwrites: the old entry
        // stops matching now, the new one activates per the latency model.
        let now = state.now_ns;
        for entry in state.table.iter_mut() {
            if entry.is_current()
                && entry.rule.device() == rule.device()
                && entry.rule.table_id() == rule.table_id()
                && entry.rule.priority() == rule.priority()
                && entry.rule.match_fields() == rule.match_fields()
            {
                entry.removed_at_ns = Some(now);
            }
        }

        let per_rule = state.latency.per_rule_ns();
        let active_at_ns = match state.latency.install_mode() {
            InstallMode::Sequential => {
                let start = state.now_ns.max(state.install_tail_ns);
                let active = start + per_rule;
                state.install_tail_ns = active;
                active
            }
            InstallMode::Parallel => state.now_ns + per_rule,
        };

        let seq = state.next_seq;
        state.next_seq += 1;
        let installed_at_ns = state.now_ns;
        let handle_id = format!("mock-{seq}");
        state.table.push(TableEntry {
            handle_id: handle_id.clone(),
            rule: rule.clone(),
            install_seq: seq,
            installed_at_ns,
            active_at_ns,
            removed_at_ns: None,
            packets: 0,
            bytes: 0,
        });
        Ok(FlowHandle::new(rule.device(), handle_id))
    }

    fn remove_flow(&self, handle: &FlowHandle) -> Result<(), DriverError> {
        let mut state = self.state();
        state.now_ns += state.latency.base_rpc_ns();
        let now = state.now_ns;
        for entry in state.table.iter_mut() {
            if entry.is_current()
                && entry.rule.device() == handle.device
                && entry.handle_id == handle.driver_flow_id
            {
                entry.removed_at_ns = Some(now);
                return Ok(());
            }
        }
        Err(DriverError::NotFound(format!("flow {handle}")))
    }

    fn list_flows(&self, device: Option<DeviceId>) -> Result<Vec<(FlowHandle, FlowRule)>, DriverError> {
        let mut state = self.state();
        state.now_ns += state.latency.base_rpc_ns();
        if let Some(device) = device {
            if !state.devices.contains_key(&device) {
                return Err(DriverError::NotFound(format!("device {device}")));
            }
        }
        Ok(state
            .table
            .iter()
            .filter(|e| e.is_current() && device.map_or(true, |d| e.rule.device() == d))
            .map(|e| (FlowHandle::new(e.rule.device(), e.handle_id.clone()), e.rule.clone()))
            .collect())
    }

    fn get_flow_stats(&self, handle: &FlowHandle) -> Result<FlowStats, DriverError> {
        let mut state = self.state();
        state.now_ns += state.latency.base_rpc_ns();
        let now = state.now_ns;
        state
            .table
            .iter()
            .find(|e| {
                e.is_current()
                    && e.rule.device() == handle.device
                    && e.handle_id == handle.driver_flow_id
            })
            .map(|e| FlowStats {
                handle: handle.clone(),
                packets: e.packets,
                bytes: e.bytes,
                duration_s: (now - e.installed_at_ns) / 1_000_000_000,
            })
            .ok_or_else(|| DriverError::NotFound(format!("flow {handle}")))
    }

    fn get_port_stats(&self, device: DeviceId) -> Result<Vec<PortStats>, DriverError> {
        let mut state = self.state();
        state.now_ns += state.latency.base_rpc_ns();
        let ports = state
            .devices
            .get(&device)
            .cloned()
            .ok_or_else(|| DriverError::NotFound(format!("device {device}")))?;
        Ok(ports
            .into_iter()
            .map(|port_no| {
                let port = PortId::new(device, port_no);
                let counter = state.port_counters.get(&port).copied().unwrap_or_default();
                PortStats {
                    port,
                    rx_packets: counter.rx_packets,
                    tx_packets: counter.tx_packets,
                    rx_bytes: counter.rx_bytes,
                    tx_bytes: counter.tx_bytes,
                }
            })
            .collect())
    }
}
