//! The polling monitor watching a live simulator: mutations applied between
//! polls surface as events, and folding the delivered events onto the old
//! snapshot reproduces the driver's current topology exactly.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use umbrella_core::driver::{CapabilitySet, Driver, DriverError};
use umbrella_core::model::{
    DeviceId, FlowHandle, FlowRule, FlowStats, Host, Link, MacAddr, PortId, PortStats,
    TopologyEventKind, TopologySnapshot,
};
use umbrella_core::monitor::{apply_events, Monitor, MonitorConfig, MonitorEvent, RecvError};
use umbrella_core::topospec::{linear_host_mac, LINEAR_LEFT_PORT, LINEAR_RIGHT_PORT};
use umbrella_mock::{LatencyModel, MockController, Mutation};

/// Delegates to the simulator while counting topology polls, so tests can
/// wait for "the monitor has polled at least once" without sleeping blind.
struct PollCounter {
    inner: MockController,
    polls: AtomicU64,
}

impl PollCounter {
    fn new(inner: MockController) -> Arc<Self> {
        Arc::new(PollCounter { inner, polls: AtomicU64::new(0) })
    }

    fn polls(&self) -> u64 {
        self.polls.load(Ordering::SeqCst)
    }

    fn wait_for_polls(&self, at_least: u64) {
        let deadline = Instant::now() + Duration::from_secs(10);
        while self.polls() < at_least {
            assert!(Instant::now() < deadline, "monitor stopped polling");
            std::thread::sleep(Duration::from_millis(2));
        }
    }
}

impl Driver for PollCounter {
    fn capabilities(&self) -> CapabilitySet {
        self.inner.capabilities()
    }

    fn get_topology(&self) -> Result<TopologySnapshot, DriverError> {
        let result = self.inner.get_topology();
        self.polls.fetch_add(1, Ordering::SeqCst);
        result
    }

    fn install_flow(&self, rule: &FlowRule) -> Result<FlowHandle, DriverError> {
        self.inner.install_flow(rule)
    }

    fn remove_flow(&self, handle: &FlowHandle) -> Result<(), DriverError> {
        self.inner.remove_flow(handle)
    }

    fn list_flows(&self, device: Option<DeviceId>) -> Result<Vec<(FlowHandle, FlowRule)>, DriverError> {
        self.inner.list_flows(device)
    }

    fn get_flow_stats(&self, handle: &FlowHandle) -> Result<FlowStats, DriverError> {
        self.inner.get_flow_stats(handle)
    }

    fn get_port_stats(&self, device: DeviceId) -> Result<Vec<PortStats>, DriverError> {
        self.inner.get_port_stats(device)
    }
}

fn quick_config() -> MonitorConfig {
    MonitorConfig { poll_interval_ms: 10, queue_capacity: 4096 }
}

#[test]
fn removed_cable_surfaces_as_link_removed_events() {
    let driver = PollCounter::new(MockController::linear(3, LatencyModel::zero()).unwrap());
    let monitor = Monitor::start(driver.clone() as Arc<dyn Driver>, quick_config()).unwrap();
    let sub = monitor.subscribe();
    driver.wait_for_polls(1);

    let cable = Link::new(
        PortId::new(DeviceId::new(1), LINEAR_RIGHT_PORT),
        PortId::new(DeviceId::new(2), LINEAR_LEFT_PORT),
    );
    driver.inner.apply_mutation(&Mutation::RemoveLink(cable)).unwrap();

    // A cable is two directed links; both removals arrive, nothing else.
    let mut removed = Vec::new();
    while removed.len() < 2 {
        match sub.recv_timeout(Duration::from_secs(10)).unwrap() {
            MonitorEvent::Change(ev) => match ev.kind {
                TopologyEventKind::LinkRemoved(l) => removed.push(l),
                other => panic!("unexpected event {other}"),
            },
            other => panic!("unexpected delivery {other:?}"),
        }
    }
    removed.sort();
    assert_eq!(removed, vec![cable, cable.reversed()]);
    monitor.stop();
    assert!(matches!(
        sub.recv_timeout(Duration::from_millis(50)),
        Err(RecvError::Closed)
    ));
}

#[test]
fn folding_events_reproduces_current_topology() {
    let driver = PollCounter::new(MockController::linear(5, LatencyModel::zero()).unwrap());
    let baseline = driver.inner.get_topology().unwrap();

    let monitor = Monitor::start(driver.clone() as Arc<dyn Driver>, quick_config()).unwrap();
    let sub = monitor.subscribe();
    driver.wait_for_polls(1);

    // A batch of valid mutations touching every kind, applied while the
    // monitor keeps polling.
    let mutations = [
        Mutation::RemoveLink(Link::new(
            PortId::new(DeviceId::new(2), LINEAR_RIGHT_PORT),
            PortId::new(DeviceId::new(3), LINEAR_LEFT_PORT),
        )),
        Mutation::AddDevice { device: DeviceId::new(9), ports: BTreeSet::from([1, 2]) },
        Mutation::AddHost(Host::new(
            MacAddr::from_u64(0x99),
            None,
            PortId::new(DeviceId::new(9), 1),
        )),
        Mutation::RemoveHost(linear_host_mac(1)),
        Mutation::AddLink(Link::new(
            PortId::new(DeviceId::new(9), 2),
            PortId::new(DeviceId::new(4), LINEAR_RIGHT_PORT),
        )),
    ];
    for (i, mutation) in mutations.iter().enumerate() {
        driver.inner.apply_mutation(mutation).unwrap();
        if i % 2 == 1 {
            // Spread some mutations across poll windows.
            let seen = driver.polls();
            driver.wait_for_polls(seen + 1);
        }
    }
    let target = driver.inner.get_topology().unwrap();

    // Fold every delivered change onto the baseline until it matches the
    // live topology. Diffs across multiple polls compose exactly.
    let mut folded = baseline;
    let deadline = Instant::now() + Duration::from_secs(10);
    while folded != target {
        assert!(Instant::now() < deadline, "event stream never converged");
        match sub.recv_timeout(Duration::from_secs(10)).unwrap() {
            MonitorEvent::Change(ev) => {
                folded = apply_events(&folded, std::slice::from_ref(&ev)).unwrap();
            }
            other => panic!("unexpected delivery {other:?}"),
        }
    }
    monitor.stop();
}
