//! Topology change detection by polling and snapshot diffing.
//!
//! [`diff_snapshots`] computes the ordered event list between two snapshots
//! and [`apply_events`] replays such a list, together giving the exactness
//! guarantee `apply(diff(a, b), a) == b`. [`Monitor`] runs the continuous
//! form: a background thread polls a driver's topology on a fixed interval,
//! diffs consecutive snapshots, and fans the events out to subscribers.
//!
//! Delivery model: each [`Subscription`] owns a bounded queue. A subscriber
//! that falls behind has its queue cleared and replaced with a single
//! [`MonitorEvent::Resync`] carrying a fresh snapshot, rather than ever
//! blocking the poll loop. Driver failures surface as
//! [`MonitorEvent::Degraded`] and polling continues. Changes that appear and
//! revert entirely within one poll interval are invisible, which is inherent
//! to polling; the detection latency bound is one interval, best effort.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex, Weak};
use std::thread::JoinHandle;
use std::time::Duration;

use crate::driver::{Driver, DriverError};
use crate::model::{
    Host, Link, MacAddr, ModelError, TopologyEvent, TopologyEventKind, TopologySnapshot,
};

/// Polling and delivery parameters for a [`Monitor`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonitorConfig {
    /// Time between topology polls. Must be at least 10 ms.
    pub poll_interval_ms: u64,
    /// Per-subscription queue bound. Must be at least 1.
    pub queue_capacity: usize,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig { poll_interval_ms: 500, queue_capacity: 1024 }
    }
}

impl MonitorConfig {
    fn validate(&self) -> Result<(), MonitorError> {
        if self.poll_interval_ms < 10 {
            return Err(MonitorError::InvalidConfig(
                "poll_interval_ms must be at least 10".into(),
            ));
        }
        if self.queue_capacity == 0 {
            return Err(MonitorError::InvalidConfig(
                "queue_capacity must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Errors from starting a monitor.
#[derive(Debug)]
pub enum MonitorError {
    /// The configuration violates a bound.
    InvalidConfig(String),
    /// The driver lacks the topology_read capability.
    MissingCapability(DriverError),
}

impl fmt::Display for MonitorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonitorError::InvalidConfig(d) => write!(f, "invalid monitor config: {d}"),
            MonitorError::MissingCapability(e) => write!(f, "monitor needs topology_read: {e}"),
        }
    }
}

impl std::error::Error for MonitorError {}

/// One delivery to a subscriber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonitorEvent {
    /// A single topology change, in diff order.
    Change(TopologyEvent),
    /// The subscriber lagged; its queue was dropped and this snapshot is the
    /// new baseline to resume from.
    Resync(TopologySnapshot),
    /// A poll failed; polling continues. Carries the driver error text.
    Degraded(String),
}

/// Why a receive returned no event.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecvError {
    /// Nothing queued within the wait budget.
    Empty,
    /// The monitor stopped and the queue is drained.
    Closed,
}

impl fmt::Display for RecvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecvError::Empty => write!(f, "no event available"),
            RecvError::Closed => write!(f, "monitor stopped"),
        }
    }
}

impl std::error::Error for RecvError {}

struct QueueState {
    events: VecDeque<MonitorEvent>,
    closed: bool,
    lagged: bool,
}

struct Queue {
    state: Mutex<QueueState>,
    ready: Condvar,
    capacity: usize,
}

impl Queue {
    fn new(capacity: usize) -> Self {
        Queue {
            state: Mutex::new(QueueState {
                events: VecDeque::new(),
                closed: false,
                lagged: false,
            }),
            ready: Condvar::new(),
            capacity,
        }
    }

    /// Queues one event; on overflow clears the queue, marks the subscriber
    /// lagged, and reports false so the caller can follow up with a resync.
    fn push(&self, event: MonitorEvent) -> bool {
        let mut state = self.state.lock().expect("queue lock");
        if state.closed {
            return true; // nothing to deliver to; no resync either
        }
        if state.events.len() >= self.capacity {
            state.events.clear();
            state.lagged = true;
            return false;
        }
        state.events.push_back(event);
        self.ready.notify_all();
        true
    }

    /// Replaces all pending deliveries with one event (the resync).
    fn replace_all(&self, event: MonitorEvent) {
        let mut state = self.state.lock().expect("queue lock");
        if state.closed {
            return;
        }
        state.events.clear();
        state.events.push_back(event);
        self.ready.notify_all();
    }

    fn close(&self) {
        let mut state = self.state.lock().expect("queue lock");
        state.closed = true;
        self.ready.notify_all();
    }
}

/// A subscriber's receive handle. Dropping it unsubscribes.
pub struct Subscription {
    queue: Arc<Queue>,
}

impl Subscription {
    /// Takes the next event without blocking.
    pub fn try_recv(&self) -> Result<MonitorEvent, RecvError> {
        let mut state = self.queue.state.lock().expect("queue lock");
        match state.events.pop_front() {
            Some(ev) => Ok(ev),
            None if state.closed => Err(RecvError::Closed),
            None => Err(RecvError::Empty),
        }
    }

    /// Waits up to `timeout` for the next event. Pending events are drained
    /// even after the monitor stops; only then does `Closed` surface.
    pub fn recv_timeout(&self, timeout: Duration) -> Result<MonitorEvent, RecvError> {
        let deadline = std::time::Instant::now() + timeout;
        let mut state = self.queue.state.lock().expect("queue lock");
        loop {
            if let Some(ev) = state.events.pop_front() {
                return Ok(ev);
            }
            if state.closed {
                return Err(RecvError::Closed);
            }
            let now = std::time::Instant::now();
            let Some(remaining) = deadline.checked_duration_since(now).filter(|d| !d.is_zero())
            else {
                return Err(RecvError::Empty);
            };
            let (next, timed_out) = self
                .queue
                .ready
                .wait_timeout(state, remaining)
                .expect("queue lock");
            state = next;
            if timed_out.timed_out() && state.events.is_empty() && !state.closed {
                return Err(RecvError::Empty);
            }
        }
    }

    /// Whether this subscriber has ever overflowed and been resynced.
    pub fn lagged(&self) -> bool {
        self.queue.state.lock().expect("queue lock").lagged
    }
}

struct MonitorShared {
    subscribers: Mutex<Vec<Weak<Queue>>>,
    stop_requested: AtomicBool,
    /// Dedicated sleep lock so stop() can cut a poll wait short.
    sleep: Mutex<()>,
    wake: Condvar,
}

/// A running topology monitor. Stop it explicitly with [`Monitor::stop`] or
/// implicitly by dropping it.
pub struct Monitor {
    shared: Arc<MonitorShared>,
    config: MonitorConfig,
    worker: Mutex<Option<JoinHandle<()>>>,
}

impl Monitor {
    /// Starts polling `driver` on `config`'s interval.
    ///
    /// The first successful poll establishes the baseline snapshot and emits
    /// no events; later polls emit the diff against the previous baseline.
    pub fn start(driver: Arc<dyn Driver>, config: MonitorConfig) -> Result<Monitor, MonitorError> {
        config.validate()?;
        let required = crate::driver::CapabilitySet {
            topology_read: true,
            ..crate::driver::CapabilitySet::none()
        };
        driver
            .capabilities()
            .require(&required, "topology monitor")
            .map_err(MonitorError::MissingCapability)?;

        let shared = Arc::new(MonitorShared {
            subscribers: Mutex::new(Vec::new()),
            stop_requested: AtomicBool::new(false),
            sleep: Mutex::new(()),
            wake: Condvar::new(),
        });
        let worker_shared = Arc::clone(&shared);
        let interval = Duration::from_millis(config.poll_interval_ms);
        let worker = std::thread::Builder::new()
            .name("umbrella-monitor".into())
            .spawn(move || poll_loop(driver, worker_shared, interval))
            .expect("spawn monitor thread");
        Ok(Monitor { shared, config, worker: Mutex::new(Some(worker)) })
    }

    /// Opens a new subscription. Events produced after this call are
    /// delivered in diff order; a monitor that has already stopped yields a
    /// subscription that is immediately closed.
    pub fn subscribe(&self) -> Subscription {
        let queue = Arc::new(Queue::new(self.config.queue_capacity));
        if self.shared.stop_requested.load(Ordering::SeqCst) {
            queue.close();
        } else {
            self.shared
                .subscribers
                .lock()
                .expect("subscriber lock")
                .push(Arc::downgrade(&queue));
        }
        Subscription { queue }
    }

    /// Stops polling, closes all subscription queues (pending events remain
    /// receivable), and joins the polling thread. Idempotent.
    pub fn stop(&self) {
        self.shared.stop_requested.store(true, Ordering::SeqCst);
        {
            let _guard = self.shared.sleep.lock().expect("sleep lock");
            self.shared.wake.notify_all();
        }
        let handle = self.worker.lock().expect("worker lock").take();
        if let Some(handle) = handle {
            let _ = handle.join();
        }
        for queue in self.shared.subscribers.lock().expect("subscriber lock").drain(..) {
            if let Some(queue) = queue.upgrade() {
                queue.close();
            }
        }
    }
}

impl Drop for Monitor {
    fn drop(&mut self) {
        self.stop();
    }
}

fn poll_loop(driver: Arc<dyn Driver>, shared: Arc<MonitorShared>, interval: Duration) {
    let mut baseline: Option<TopologySnapshot> = None;
    loop {
        if shared.stop_requested.load(Ordering::SeqCst) {
            return;
        }
        match driver.get_topology() {
            Ok(snapshot) => {
                match &baseline {
                    None => {}
                    Some(prev) => {
                        let events = diff_snapshots(prev, &snapshot);
                        if !events.is_empty() {
                            broadcast(&shared, &events, &snapshot);
                        }
                    }
                }
                baseline = Some(snapshot);
            }
            Err(err) => {
                let text = err.to_string();
                for queue in live_queues(&shared) {
                    queue.push(MonitorEvent::Degraded(text.clone()));
                }
            }
        }
        // Interruptible sleep: stop() grabs the lock and notifies.
        let guard = shared.sleep.lock().expect("sleep lock");
        if shared.stop_requested.load(Ordering::SeqCst) {
            return;
        }
        let _ = shared.wake.wait_timeout(guard, interval).expect("sleep lock");
    }
}

/// Snapshot of currently live subscriber queues, pruning dropped ones.
fn live_queues(shared: &MonitorShared) -> Vec<Arc<Queue>> {
    let mut list = shared.subscribers.lock().expect("subscriber lock");
    let mut live = Vec::with_capacity(list.len());
    list.retain(|weak| match weak.upgrade() {
        Some(queue) => {
            live.push(queue);
            true
        }
        None => false,
    });
    live
}

fn broadcast(shared: &MonitorShared, events: &[TopologyEvent], snapshot: &TopologySnapshot) {
    for queue in live_queues(shared) {
        for event in events {
            if !queue.push(MonitorEvent::Change(event.clone())) {
                // Overflowed: swap the partial batch for a resync baseline
                // and stop delivering this diff to the laggard.
                queue.replace_all(MonitorEvent::Resync(snapshot.clone()));
                break;
            }
        }
    }
}

/// Computes the ordered change list that rewrites `old` into `new`.
///
/// Ordering is removals before additions; removals run hosts, links, then
/// devices and additions run devices, links, then hosts, so after applying
/// any prefix the intermediate topology is still referentially closed. A
/// device whose port set changed is emitted as a removal plus an addition,
/// with every link and host touching it cascaded the same way. All events
/// carry `new`'s capture timestamp.
pub fn diff_snapshots(old: &TopologySnapshot, new: &TopologySnapshot) -> Vec<TopologyEvent> {
    let at = new.captured_at_ns();
    let mut events = Vec::new();

    // Devices present in both but with different port sets are replaced.
    let mut replaced = BTreeSet::new();
    for (id, old_ports) in old.devices() {
        if new.device_ports(*id).is_some_and(|ports| ports != old_ports) {
            replaced.insert(*id);
        }
    }
    let touches_replaced =
        |l: &Link| replaced.contains(&l.src.device) || replaced.contains(&l.dst.device);

    // Phase 1: removed hosts (value change, disappearance, or cascade).
    for host in old.hosts() {
        let unchanged = new.host(host.mac) == Some(host);
        if !unchanged || replaced.contains(&host.attachment.device) {
            events.push(TopologyEvent::new(TopologyEventKind::HostRemoved(host.clone()), at));
        }
    }
    // Phase 2: removed links.
    for link in old.links() {
        if !new.links().contains(link) || touches_replaced(link) {
            events.push(TopologyEvent::new(TopologyEventKind::LinkRemoved(*link), at));
        }
    }
    // Phase 3: removed devices (gone entirely, or replaced).
    for id in old.devices().keys() {
        if !new.contains_device(*id) || replaced.contains(id) {
            events.push(TopologyEvent::new(TopologyEventKind::DeviceRemoved(*id), at));
        }
    }
    // Phase 4: added devices (brand new, or the re-add half of a replace).
    for (id, ports) in new.devices() {
        if !old.contains_device(*id) || replaced.contains(id) {
            events.push(TopologyEvent::new(
                TopologyEventKind::DeviceAdded { device: *id, ports: ports.clone() },
                at,
            ));
        }
    }
    // Phase 5: added links.
    for link in new.links() {
        if !old.links().contains(link) || touches_replaced(link) {
            events.push(TopologyEvent::new(TopologyEventKind::LinkAdded(*link), at));
        }
    }
    // Phase 6: added hosts.
    for host in new.hosts() {
        let unchanged = old.host(host.mac) == Some(host);
        if !unchanged || replaced.contains(&host.attachment.device) {
            events.push(TopologyEvent::new(TopologyEventKind::HostAdded(host.clone()), at));
        }
    }
    events
}

/// Replays an event list onto a snapshot, validating each step.
///
/// Every event must be applicable to the intermediate state it meets
/// (removing an absent link, re-adding a present device, adding a link whose
/// endpoint is missing, and so on all fail), which makes this a strict check
/// that an event stream really is closure-preserving at every prefix. The
/// result's capture time is the latest event timestamp seen, or `base`'s
/// when the list is empty.
pub fn apply_events(
    base: &TopologySnapshot,
    events: &[TopologyEvent],
) -> Result<TopologySnapshot, ModelError> {
    let mut devices = base.devices().clone();
    let mut links = base.links().clone();
    let mut hosts: BTreeMap<MacAddr, Host> =
        base.hosts().map(|h| (h.mac, h.clone())).collect();
    let mut captured = base.captured_at_ns();

    let fail = |d: String| Err(ModelError::EventNotApplicable(d));
    for event in events {
        captured = captured.max(event.observed_at_ns);
        match &event.kind {
            TopologyEventKind::DeviceAdded { device, ports } => {
                if devices.contains_key(device) {
                    return fail(format!("device {device} already present"));
                }
                devices.insert(*device, ports.clone());
            }
            TopologyEventKind::DeviceRemoved(device) => {
                if devices.remove(device).is_none() {
                    return fail(format!("device {device} not present"));
                }
                if links.iter().any(|l| l.src.device == *device || l.dst.device == *device) {
                    return fail(format!("device {device} still has links"));
                }
                if hosts.values().any(|h| h.attachment.device == *device) {
                    return fail(format!("device {device} still has hosts"));
                }
            }
            TopologyEventKind::LinkAdded(link) => {
                let endpoint_ok = |p: &crate::model::PortId| {
                    devices.get(&p.device).is_some_and(|ports| ports.contains(&p.port_no))
                };
                if !endpoint_ok(&link.src) || !endpoint_ok(&link.dst) {
                    return fail(format!("link {link} endpoint missing"));
                }
                if !links.insert(*link) {
                    return fail(format!("link {link} already present"));
                }
            }
            TopologyEventKind::LinkRemoved(link) => {
                if !links.remove(link) {
                    return fail(format!("link {link} not present"));
                }
            }
            TopologyEventKind::HostAdded(host) => {
                if hosts.contains_key(&host.mac) {
                    return fail(format!("host {} already present", host.mac));
                }
                let p = host.attachment;
                if !devices.get(&p.device).is_some_and(|ports| ports.contains(&p.port_no)) {
                    return fail(format!("host {} attachment missing", host.mac));
                }
                hosts.insert(host.mac, host.clone());
            }
            TopologyEventKind::HostRemoved(host) => {
                match hosts.get(&host.mac) {
                    Some(present) if present == host => {
                        hosts.remove(&host.mac);
                    }
                    _ => return fail(format!("host {} not present as stated", host.mac)),
                }
            }
        }
    }
    TopologySnapshot::new(devices, links, hosts.into_values(), captured)
}
