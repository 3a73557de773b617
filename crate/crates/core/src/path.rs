//! Path computation over topology snapshots.
//!
//! [`build_graph`] turns a snapshot into a [`NetGraph`]: devices are
//! vertices, directed links are port-annotated edges, hosts stay off the
//! graph and enter only as path endpoints. [`shortest_path`] runs a named
//! algorithm, `bfs` (default, hop count) or `dijkstra` (edge weights), and
//! returns a [`HostPath`] ready to compile into flow rules.
//!
//! Determinism: among equal-cost paths both built-in algorithms return the
//! one whose device id sequence is lexicographically smallest, and parallel
//! links are resolved to the lowest (weight, src port, dst port) edge. Equal
//! inputs therefore always produce identical rules.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::sync::Arc;

use crate::model::{
    Action, DeviceId, FlowRule, Host, Link, MacAddr, MatchFields, ModelError, PortId,
    TopologySnapshot,
};

/// Errors from path computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathError {
    /// No path connects the two hosts.
    NoPath,
    /// No algorithm registered under the requested name.
    UnknownAlgorithm(String),
    /// A registered algorithm returned an unusable path.
    AlgorithmContractViolation(String),
    /// The host's attachment device is not a graph vertex.
    DetachedHost(MacAddr),
    /// An algorithm with that name already exists.
    DuplicateAlgorithm(String),
    /// Edge weights must be at least 1.
    InvalidWeight,
    /// The link is not an edge of the graph.
    UnknownLink,
}

impl fmt::Display for PathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathError::NoPath => write!(f, "no path between the hosts"),
            PathError::UnknownAlgorithm(n) => write!(f, "unknown path algorithm {n:?}"),
            PathError::AlgorithmContractViolation(d) => {
                write!(f, "path algorithm contract violation: {d}")
            }
            PathError::DetachedHost(mac) => {
                write!(f, "host {mac} is not attached to any graph vertex")
            }
            PathError::DuplicateAlgorithm(n) => {
                write!(f, "path algorithm {n:?} already registered")
            }
            PathError::InvalidWeight => write!(f, "edge weights must be at least 1"),
            PathError::UnknownLink => write!(f, "link is not an edge of the graph"),
        }
    }
}

impl std::error::Error for PathError {}

/// One directed, port-annotated edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    /// Egress port on the source device.
    pub src_port: u32,
    /// Ingress endpoint on the destination device.
    pub dst: PortId,
    /// Cost for weighted algorithms; 1 unless overridden.
    pub weight: u64,
}

/// A directed multigraph of devices connected by port pairs.
#[derive(Clone, Debug, Default)]
pub struct NetGraph {
    adjacency: BTreeMap<DeviceId, Vec<GraphEdge>>,
}

impl NetGraph {
    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Number of directed edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(Vec::len).sum()
    }

    /// All vertices, sorted.
    pub fn vertices(&self) -> impl Iterator<Item = DeviceId> + '_ {
        self.adjacency.keys().copied()
    }

    /// Whether the device is a vertex.
    pub fn contains_vertex(&self, device: DeviceId) -> bool {
        self.adjacency.contains_key(&device)
    }

    /// Outgoing edges of one device, sorted by (destination, ports).
    pub fn edges_from(&self, device: DeviceId) -> &[GraphEdge] {
        self.adjacency.get(&device).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Overrides one edge's weight; the edge is identified by the link's
    /// exact port pair. Weights below 1 are rejected.
    pub fn set_link_weight(&mut self, link: &Link, weight: u64) -> Result<(), PathError> {
        if weight == 0 {
            return Err(PathError::InvalidWeight);
        }
        let edges = self
            .adjacency
            .get_mut(&link.src.device)
            .ok_or(PathError::UnknownLink)?;
        for edge in edges.iter_mut() {
            if edge.src_port == link.src.port_no && edge.dst == link.dst {
                edge.weight = weight;
                return Ok(());
            }
        }
        Err(PathError::UnknownLink)
    }

    /// Distinct successor devices of `device`, sorted.
    fn successor_devices(&self, device: DeviceId) -> BTreeSet<DeviceId> {
        self.edges_from(device).iter().map(|e| e.dst.device).collect()
    }

    /// The cheapest edge from `src` to `dst` by (weight, src port, dst port).
    fn min_edge(&self, src: DeviceId, dst: DeviceId) -> Option<&GraphEdge> {
        self.edges_from(src)
            .iter()
            .filter(|e| e.dst.device == dst)
            .min_by_key(|e| (e.weight, e.src_port, e.dst.port_no))
    }

    /// Minimum edge weight from `src` to `dst`, when connected.
    fn min_weight(&self, src: DeviceId, dst: DeviceId) -> Option<u64> {
        self.min_edge(src, dst).map(|e| e.weight)
    }

    /// Predecessor adjacency (device level), for reverse searches.
    fn reverse_device_adjacency(&self) -> BTreeMap<DeviceId, BTreeSet<DeviceId>> {
        let mut rev: BTreeMap<DeviceId, BTreeSet<DeviceId>> = BTreeMap::new();
        for (&src, edges) in &self.adjacency {
            rev.entry(src).or_default();
            for edge in edges {
                rev.entry(edge.dst.device).or_default().insert(src);
            }
        }
        rev
    }
}

/// Builds the graph for a snapshot: every device becomes a vertex, every
/// directed link an edge of weight 1. Hosts are not vertices.
pub fn build_graph(snapshot: &TopologySnapshot) -> NetGraph {
    let mut adjacency: BTreeMap<DeviceId, Vec<GraphEdge>> = BTreeMap::new();
    for &device in snapshot.devices().keys() {
        adjacency.entry(device).or_default();
    }
    for link in snapshot.links() {
        adjacency.entry(link.src.device).or_default().push(GraphEdge {
            src_port: link.src.port_no,
            dst: link.dst,
            weight: 1,
        });
    }
    for edges in adjacency.values_mut() {
        edges.sort_by_key(|e| (e.dst.device, e.src_port, e.dst.port_no));
    }
    NetGraph { adjacency }
}

/// One hop of a host-to-host path: enter `device` on `in_port`, leave on
/// `out_port`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathHop {
    /// The device traversed.
    pub device: DeviceId,
    /// Ingress port (on `device`).
    pub in_port: PortId,
    /// Egress port (on `device`).
    pub out_port: PortId,
}

/// A loop-free path from one host to another.
///
/// The first hop enters on the source host's attachment port, the last hop
/// leaves on the destination host's attachment port, and consecutive hops are
/// joined by the graph edges chosen during computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HostPath {
    src: Host,
    dst: Host,
    hops: Vec<PathHop>,
}

impl HostPath {
    /// Validates hop invariants and builds a path.
    ///
    /// Checks everything expressible without the graph: hop/port ownership,
    /// endpoint attachment ports, and simplicity (no device repeats).
    /// Inter-hop link existence is the producer's obligation.
    pub fn new(src: Host, dst: Host, hops: Vec<PathHop>) -> Result<Self, PathError> {
        let violation = |d: String| PathError::AlgorithmContractViolation(d);
        if hops.is_empty() {
            return Err(violation("path has no hops".into()));
        }
        let mut seen = BTreeSet::new();
        for hop in &hops {
            if hop.in_port.device != hop.device || hop.out_port.device != hop.device {
                return Err(violation(format!(
                    "hop on {} references ports of another device",
                    hop.device
                )));
            }
            if !seen.insert(hop.device) {
                return Err(violation(format!("device {} repeats", hop.device)));
            }
        }
        if hops[0].in_port != src.attachment {
            return Err(violation("first hop does not start at the source host".into()));
        }
        if hops[hops.len() - 1].out_port != dst.attachment {
            return Err(violation("last hop does not end at the destination host".into()));
        }
        Ok(HostPath { src, dst, hops })
    }

    /// Source host.
    pub fn src(&self) -> &Host {
        &self.src
    }

    /// Destination host.
    pub fn dst(&self) -> &Host {
        &self.dst
    }

    /// The hops, source first.
    pub fn hops(&self) -> &[PathHop] {
        &self.hops
    }

    /// Devices along the path, source first.
    pub fn device_sequence(&self) -> Vec<DeviceId> {
        self.hops.iter().map(|h| h.device).collect()
    }

    /// The same walk from destination to source: hop order reversed and
    /// in/out ports swapped. Meaningful when every traversed link has a
    /// reverse twin, as bidirectional cables do.
    pub fn reversed(&self) -> HostPath {
        let hops = self
            .hops
            .iter()
            .rev()
            .map(|h| PathHop {
                device: h.device,
                in_port: h.out_port,
                out_port: h.in_port,
            })
            .collect();
        HostPath { src: self.dst.clone(), dst: self.src.clone(), hops }
    }
}

/// A device-sequence path function: `(graph, src_device, dst_device)` to an
/// ordered device sequence, or `None` when unreachable.
pub type AlgorithmFn =
    dyn Fn(&NetGraph, DeviceId, DeviceId) -> Option<Vec<DeviceId>> + Send + Sync;

/// A named path algorithm.
#[derive(Clone)]
pub struct PathAlgorithm {
    name: String,
    func: Arc<AlgorithmFn>,
}

impl PathAlgorithm {
    /// Wraps a function under a name.
    pub fn new(
        name: impl Into<String>,
        func: impl Fn(&NetGraph, DeviceId, DeviceId) -> Option<Vec<DeviceId>> + Send + Sync + 'static,
    ) -> Self {
        PathAlgorithm { name: name.into(), func: Arc::new(func) }
    }

    /// The registered name.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Runs the algorithm.
    pub fn find(&self, graph: &NetGraph, src: DeviceId, dst: DeviceId) -> Option<Vec<DeviceId>> {
        (self.func)(graph, src, dst)
    }
}

impl fmt::Debug for PathAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PathAlgorithm({:?})", self.name)
    }
}

/// Default algorithm used when none is named.
pub const DEFAULT_ALGORITHM: &str = "bfs";

/// Named algorithms available to [`shortest_path_with`].
pub struct AlgorithmRegistry {
    algorithms: BTreeMap<String, PathAlgorithm>,
}

impl AlgorithmRegistry {
    /// A registry holding the built-ins `bfs` and `dijkstra`.
    pub fn with_defaults() -> Self {
        let mut registry = AlgorithmRegistry { algorithms: BTreeMap::new() };
        registry
            .register(PathAlgorithm::new("bfs", bfs_device_sequence))
            .expect("fresh registry");
        registry
            .register(PathAlgorithm::new("dijkstra", dijkstra_device_sequence))
            .expect("fresh registry");
        registry
    }

    /// Adds an algorithm under a unique name. Paths it returns are validated
    /// on every use; breaches surface as
    /// [`PathError::AlgorithmContractViolation`].
    pub fn register(&mut self, algorithm: PathAlgorithm) -> Result<(), PathError> {
        match self.algorithms.entry(algorithm.name.clone()) {
            Entry::Occupied(_) => Err(PathError::DuplicateAlgorithm(algorithm.name)),
            Entry::Vacant(v) => {
                v.insert(algorithm);
                Ok(())
            }
        }
    }

    /// Looks an algorithm up by name.
    pub fn get(&self, name: &str) -> Option<&PathAlgorithm> {
        self.algorithms.get(name)
    }

    /// Registered names, sorted.
    pub fn names(&self) -> Vec<String> {
        self.algorithms.keys().cloned().collect()
    }
}

impl Default for AlgorithmRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

/// Shortest path between two hosts using a built-in algorithm
/// (default `bfs`). See [`shortest_path_with`] for custom registries.
pub fn shortest_path(
    graph: &NetGraph,
    src_host: &Host,
    dst_host: &Host,
    algorithm: Option<&str>,
) -> Result<HostPath, PathError> {
    shortest_path_with(graph, src_host, dst_host, algorithm, &AlgorithmRegistry::with_defaults())
}

/// Shortest path between two hosts using a named algorithm from `registry`.
///
/// The returned device sequence is validated (endpoints, simplicity,
/// edge-connectivity) before ports are resolved, so a misbehaving custom
/// algorithm cannot produce an unusable path.
pub fn shortest_path_with(
    graph: &NetGraph,
    src_host: &Host,
    dst_host: &Host,
    algorithm: Option<&str>,
    registry: &AlgorithmRegistry,
) -> Result<HostPath, PathError> {
    let name = algorithm.unwrap_or(DEFAULT_ALGORITHM);
    let algorithm = registry
        .get(name)
        .ok_or_else(|| PathError::UnknownAlgorithm(name.to_string()))?;
    let src_device = src_host.attachment.device;
    let dst_device = dst_host.attachment.device;
    if !graph.contains_vertex(src_device) {
        return Err(PathError::DetachedHost(src_host.mac));
    }
    if !graph.contains_vertex(dst_device) {
        return Err(PathError::DetachedHost(dst_host.mac));
    }
    let sequence = algorithm
        .find(graph, src_device, dst_device)
        .ok_or(PathError::NoPath)?;
    sequence_to_path(graph, src_host, dst_host, &sequence)
}

fn sequence_to_path(
    graph: &NetGraph,
    src_host: &Host,
    dst_host: &Host,
    sequence: &[DeviceId],
) -> Result<HostPath, PathError> {
    let violation = |d: String| PathError::AlgorithmContractViolation(d);
    if sequence.is_empty() {
        return Err(violation("empty device sequence".into()));
    }
    if sequence[0] != src_host.attachment.device {
        return Err(violation("sequence does not start at the source device".into()));
    }
    if sequence[sequence.len() - 1] != dst_host.attachment.device {
        return Err(violation("sequence does not end at the destination device".into()));
    }
    let unique: BTreeSet<_> = sequence.iter().collect();
    if unique.len() != sequence.len() {
        return Err(violation("sequence repeats a device".into()));
    }
    if sequence.len() == 1 {
        let device = sequence[0];
        let hop = PathHop {
            device,
            in_port: src_host.attachment,
            out_port: dst_host.attachment,
        };
        return HostPath::new(src_host.clone(), dst_host.clone(), vec![hop]);
    }
    let mut chosen = Vec::with_capacity(sequence.len() - 1);
    for pair in sequence.windows(2) {
        let edge = graph.min_edge(pair[0], pair[1]).ok_or_else(|| {
            violation(format!("no edge from {} to {}", pair[0], pair[1]))
        })?;
        chosen.push(*edge);
    }
    let mut hops = Vec::with_capacity(sequence.len());
    for (i, &device) in sequence.iter().enumerate() {
        let in_port = if i == 0 {
            src_host.attachment
        } else {
            chosen[i - 1].dst
        };
        let out_port = if i == sequence.len() - 1 {
            dst_host.attachment
        } else {
            PortId::new(device, chosen[i].src_port)
        };
        hops.push(PathHop { device, in_port, out_port });
    }
    HostPath::new(src_host.clone(), dst_host.clone(), hops)
}

/// Hop-count shortest device sequence; among equal-length candidates the
/// lexicographically smallest device id sequence wins.
pub fn bfs_device_sequence(
    graph: &NetGraph,
    src: DeviceId,
    dst: DeviceId,
) -> Option<Vec<DeviceId>> {
    if !graph.contains_vertex(src) || !graph.contains_vertex(dst) {
        return None;
    }
    let dist_from_src = bfs_distances(graph, src, Direction::Forward);
    let total = *dist_from_src.get(&dst)?;
    let dist_to_dst = bfs_distances(graph, dst, Direction::Reverse);

    // The lexicographically smallest shortest sequence falls out greedily:
    // at depth k pick the smallest successor that still lies on some
    // shortest path, which the two distance maps certify.
    let mut sequence = Vec::with_capacity(total as usize + 1);
    sequence.push(src);
    let mut current = src;
    for depth in 0..total {
        let next = graph
            .successor_devices(current)
            .into_iter()
            .find(|v| {
                dist_from_src.get(v) == Some(&(depth + 1))
                    && dist_to_dst.get(v) == Some(&(total - depth - 1))
            })?;
        sequence.push(next);
        current = next;
    }
    Some(sequence)
}

enum Direction {
    Forward,
    Reverse,
}

fn bfs_distances(graph: &NetGraph, start: DeviceId, direction: Direction) -> BTreeMap<DeviceId, u64> {
    let reverse = match direction {
        Direction::Forward => None,
        Direction::Reverse => Some(graph.reverse_device_adjacency()),
    };
    let mut dist = BTreeMap::new();
    dist.insert(start, 0u64);
    let mut frontier = std::collections::VecDeque::from([start]);
    while let Some(u) = frontier.pop_front() {
        let d = dist[&u];
        let successors: Vec<DeviceId> = match &reverse {
            None => graph.successor_devices(u).into_iter().collect(),
            Some(rev) => rev.get(&u).map(|s| s.iter().copied().collect()).unwrap_or_default(),
        };
        for v in successors {
            if let Entry::Vacant(slot) = dist.entry(v) {
                slot.insert(d + 1);
                frontier.push_back(v);
            }
        }
    }
    dist
}

/// Weight-minimal device sequence; among equal-weight candidates the
/// lexicographically smallest device id sequence wins. With the default unit
/// weights this agrees with `bfs`.
pub fn dijkstra_device_sequence(
    graph: &NetGraph,
    src: DeviceId,
    dst: DeviceId,
) -> Option<Vec<DeviceId>> {
    if !graph.contains_vertex(src) || !graph.contains_vertex(dst) {
        return None;
    }
    let dist_from_src = dijkstra_distances(graph, src, Direction::Forward);
    let total = *dist_from_src.get(&dst)?;
    let dist_to_dst = dijkstra_distances(graph, dst, Direction::Reverse);

    let mut sequence = vec![src];
    let mut current = src;
    while current != dst {
        let here = *dist_from_src.get(&current)?;
        let next = graph
            .successor_devices(current)
            .into_iter()
            .find(|&v| {
                let Some(w) = graph.min_weight(current, v) else { return false };
                let Some(&rest) = dist_to_dst.get(&v) else { return false };
                here + w + rest == total
            })?;
        sequence.push(next);
        current = next;
        if sequence.len() > graph.vertex_count() {
            return None; // unreachable with positive weights; guards corruption
        }
    }
    Some(sequence)
}

fn dijkstra_distances(
    graph: &NetGraph,
    start: DeviceId,
    direction: Direction,
) -> BTreeMap<DeviceId, u64> {
    // Device-level relaxation over the cheapest parallel edge per pair.
    let forward = matches!(direction, Direction::Forward);
    let reverse = if forward { None } else { Some(graph.reverse_device_adjacency()) };
    let mut dist: BTreeMap<DeviceId, u64> = BTreeMap::new();
    let mut heap: BinaryHeap<std::cmp::Reverse<(u64, DeviceId)>> = BinaryHeap::new();
    dist.insert(start, 0);
    heap.push(std::cmp::Reverse((0, start)));
    while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
        if dist.get(&u) != Some(&d) {
            continue;
        }
        let successors: Vec<DeviceId> = match &reverse {
            None => graph.successor_devices(u).into_iter().collect(),
            Some(rev) => rev.get(&u).map(|s| s.iter().copied().collect()).unwrap_or_default(),
        };
        for v in successors {
            let w = if forward {
                graph.min_weight(u, v)
            } else {
                graph.min_weight(v, u)
            };
            let Some(w) = w else { continue };
            let candidate = d.saturating_add(w);
            if dist.get(&v).map_or(true, |&cur| candidate < cur) {
                dist.insert(v, candidate);
                heap.push(std::cmp::Reverse((candidate, v)));
            }
        }
    }
    dist
}

/// Compiles a path into one rule per hop for the source-to-destination
/// direction.
///
/// Each rule matches `template` plus the hop's ingress port and the
/// destination host's MAC (overriding those fields when the template sets
/// them), and outputs on the hop's egress port.
pub fn compile_one_directional(
    path: &HostPath,
    priority: u16,
    template: &MatchFields,
) -> Result<Vec<FlowRule>, ModelError> {
    let mut rules = Vec::with_capacity(path.hops().len());
    for hop in path.hops() {
        let mut fields = template.clone();
        fields.eth_dst = Some(path.dst().mac);
        fields.in_port = Some(hop.in_port.port_no);
        let rule = FlowRule::builder(hop.device)
            .priority(priority)
            .match_fields(fields)
            .action(Action::Output(hop.out_port.port_no))
            .build()?;
        rules.push(rule);
    }
    Ok(rules)
}

/// Default priority for path rules.
pub const PATH_RULE_PRIORITY: u16 = 100;
