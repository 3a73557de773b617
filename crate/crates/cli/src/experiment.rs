//! The flow-rule setup-time experiment.
//!
//! Two execution paths share one measurement definition:
//!
//! * [`run_simulated`] drives a fresh [`MockController`] per (size,
//!   repetition) on its virtual clock. A probe train starts at virtual time
//!   zero, the path rules are installed after `pre_install_delay_ms`, and
//!   the setup time is recovered from the loss count
//!   ([`compute_setup_time`]). Fully deterministic: the same plan always
//!   yields the same results, bit for bit.
//!
//! * [`run_live`] times acknowledged installs against a real controller on
//!   the wall clock. No packets are sent; the loss-based and ack-based
//!   numbers are labeled differently in exported reports and must not be
//!   compared directly.
//!
//! Both paths route and install through the same driver-facing code
//! ([`install_path_rules`]); neither inspects which driver it is talking to.

use std::time::Instant;

use umbrella_core::path::{build_graph, compile_one_directional, shortest_path, PathError};
use umbrella_core::{
    CapabilitySet, Driver, FlowHandle, FlowRule, MacAddr, MatchFields, TopologySnapshot,
};
use umbrella_mock::{MockController, PacketTrain};

use crate::error::CliError;
use crate::plan::{compute_setup_time, ExperimentPlan};

/// Default priority for rules installed along a computed path.
pub use umbrella_core::path::PATH_RULE_PRIORITY;

/// One repetition's measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct RepOutcome {
    /// Repetition number, 1-based.
    pub rep: u32,
    /// Probe packets emitted (0 for ack-based runs).
    pub packets_sent: u64,
    /// Probe packets lost (0 for ack-based runs).
    pub packets_lost: u64,
    /// Measured flow-rule setup time.
    pub setup_ms: f64,
}

/// All repetitions for one topology size.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    /// Switch count.
    pub size: u32,
    /// Per-repetition measurements, in repetition order.
    pub per_rep: Vec<RepOutcome>,
    /// Mean setup time across repetitions.
    pub mean_setup_ms: f64,
    /// Sample standard deviation (n-1); zero for a single repetition.
    pub stddev_setup_ms: f64,
}

/// A computed path together with the rules installed for it.
#[derive(Clone, Debug)]
pub struct InstalledPath {
    /// The host-to-host path the rules realize.
    pub path: umbrella_core::path::HostPath,
    /// Installed rules with their driver handles, in install order.
    pub installed: Vec<(FlowHandle, FlowRule)>,
}

/// Computes the shortest path between two hosts and installs one forwarding
/// rule per hop, in path order.
///
/// This is the application under measurement. It speaks only the driver
/// contract: read the topology, compute, install. Rules match on the
/// destination MAC plus the hop's ingress port and forward out the hop's
/// egress port. Installs are sequential; on failure, already installed rules
/// are left in place for the caller to reconcile via `list_flows`.
pub fn install_path_rules(
    driver: &dyn Driver,
    src_mac: MacAddr,
    dst_mac: MacAddr,
    algorithm: Option<&str>,
    priority: u16,
) -> Result<InstalledPath, CliError> {
    let required =
        CapabilitySet { topology_read: true, flow_write: true, ..CapabilitySet::none() };
    driver.capabilities().require(&required, "path installation")?;

    let snapshot = driver.get_topology()?;
    let src = snapshot
        .host(src_mac)
        .ok_or_else(|| CliError::Invalid(format!("no host with MAC {src_mac} in the topology")))?
        .clone();
    let dst = snapshot
        .host(dst_mac)
        .ok_or_else(|| CliError::Invalid(format!("no host with MAC {dst_mac} in the topology")))?
        .clone();

    let graph = build_graph(&snapshot);
    let path = shortest_path(&graph, &src, &dst, algorithm)?;
    let rules = compile_one_directional(&path, priority, &MatchFields::any())
        .map_err(|e| CliError::Invalid(e.to_string()))?;

    let mut installed = Vec::with_capacity(rules.len());
    for rule in &rules {
        let handle = driver.install_flow(rule)?;
        installed.push((handle, rule.clone()));
    }
    Ok(InstalledPath { path, installed })
}

/// Picks the train endpoints: explicit overrides when given, otherwise the
/// hosts with the smallest and largest MAC address.
pub fn pick_endpoints(
    snapshot: &TopologySnapshot,
    overrides: Option<(MacAddr, MacAddr)>,
) -> Result<(MacAddr, MacAddr), CliError> {
    if let Some((src, dst)) = overrides {
        for mac in [src, dst] {
            if snapshot.host(mac).is_none() {
                return Err(CliError::Invalid(format!("no host with MAC {mac} in the topology")));
            }
        }
        if src == dst {
            return Err(CliError::Invalid("source and destination host are the same".into()));
        }
        return Ok((src, dst));
    }
    let mut macs: Vec<MacAddr> = snapshot.hosts().map(|h| h.mac).collect();
    macs.sort();
    match (macs.first(), macs.last()) {
        (Some(&src), Some(&dst)) if src != dst => Ok((src, dst)),
        _ => Err(CliError::Invalid(format!(
            "need two distinct hosts to run a train, topology has {}",
            macs.len()
        ))),
    }
}

/// Runs the plan against simulated controllers, one fresh instance per
/// (size, repetition).
///
/// A size whose topology has no path between the chosen endpoints is
/// skipped with a diagnostic on stderr; any other failure aborts the sweep.
pub fn run_simulated(
    plan: &ExperimentPlan,
    endpoints: Option<(MacAddr, MacAddr)>,
    build_controller: &dyn Fn(u32) -> Result<MockController, CliError>,
) -> Result<Vec<ExperimentResult>, CliError> {
    plan.validate()?;
    let delay_ns = plan.pre_install_delay_ms * 1_000_000;
    let mut results = Vec::with_capacity(plan.sizes.len());

    'sizes: for &size in &plan.sizes {
        let mut per_rep = Vec::with_capacity(plan.repetitions as usize);
        for rep in 1..=plan.repetitions {
            let controller = build_controller(size)?;
            let snapshot = controller.get_topology()?;
            let (src, dst) = pick_endpoints(&snapshot, endpoints)?;

            // Let the train run alone for the pre-install window, then
            // install. get_topology may already have consumed virtual time,
            // so never rewind.
            if controller.now_ns() < delay_ns {
                controller.advance_to(delay_ns)?;
            }
            match install_path_rules(
                &controller,
                src,
                dst,
                plan.algorithm.as_deref(),
                PATH_RULE_PRIORITY,
            ) {
                Ok(_) => {}
                Err(CliError::Path(PathError::NoPath)) => {
                    eprintln!("skipping size {size}: no path between {src} and {dst}");
                    continue 'sizes;
                }
                Err(e) => return Err(e),
            }

            let train = PacketTrain {
                src,
                dst,
                start_at_ns: 0,
                interval_ns: plan.interval_ns(),
                count: plan.packet_count(),
            };
            let report = controller.run_packet_train(&train)?;

            if report.received == 0 {
                return Err(CliError::Simulation(format!(
                    "size {size} rep {rep}: no probe packet was delivered; \
                     the train ended before the rules activated"
                )));
            }
            if report.first_received_index != Some(report.lost()) {
                return Err(CliError::Simulation(format!(
                    "size {size} rep {rep}: loss is not a clean prefix \
                     (first delivery at index {:?}, {} lost)",
                    report.first_received_index,
                    report.lost()
                )));
            }

            let setup_ms = compute_setup_time(
                report.lost(),
                plan.interval_ms(),
                plan.pre_install_delay_ms as f64,
            );
            per_rep.push(RepOutcome {
                rep,
                packets_sent: report.sent,
                packets_lost: report.lost(),
                setup_ms,
            });
        }
        results.push(summarize(size, per_rep));
    }
    Ok(results)
}

/// Times acknowledged installs against a live controller.
///
/// The topology's own size is the only "size"; the plan's size sweep is
/// ignored. Each repetition recomputes the path, times the span from the
/// first install request to the last acknowledgment on the wall clock, then
/// removes the installed rules. `fanout` bounds concurrent installs when
/// the plan asks for parallel mode (default: one thread per rule).
pub fn run_live(
    driver: &dyn Driver,
    plan: &ExperimentPlan,
    endpoints: Option<(MacAddr, MacAddr)>,
    fanout: Option<usize>,
) -> Result<Vec<ExperimentResult>, CliError> {
    if plan.repetitions == 0 {
        return Err(CliError::Invalid("repetitions must be at least 1".into()));
    }
    let required =
        CapabilitySet { topology_read: true, flow_write: true, ..CapabilitySet::none() };
    driver.capabilities().require(&required, "the setup-time benchmark")?;

    let first_snapshot = driver.get_topology()?;
    let size = first_snapshot.device_count() as u32;
    let (src_mac, dst_mac) = pick_endpoints(&first_snapshot, endpoints)?;

    let mut per_rep = Vec::with_capacity(plan.repetitions as usize);
    for rep in 1..=plan.repetitions {
        let snapshot = driver.get_topology()?;
        let src = snapshot
            .host(src_mac)
            .ok_or_else(|| CliError::Invalid(format!("host {src_mac} left the topology")))?
            .clone();
        let dst = snapshot
            .host(dst_mac)
            .ok_or_else(|| CliError::Invalid(format!("host {dst_mac} left the topology")))?
            .clone();
        let graph = build_graph(&snapshot);
        let path = shortest_path(&graph, &src, &dst, plan.algorithm.as_deref())?;
        let rules = compile_one_directional(&path, PATH_RULE_PRIORITY, &MatchFields::any())
            .map_err(|e| CliError::Invalid(e.to_string()))?;

        let started = Instant::now();
        let handles = match plan.install_mode {
            umbrella_mock::InstallMode::Sequential => install_serial(driver, &rules),
            umbrella_mock::InstallMode::Parallel => {
                install_waves(driver, &rules, fanout.unwrap_or(rules.len().max(1)))
            }
        };
        let elapsed = started.elapsed();

        let handles = handles?;
        for handle in &handles {
            if let Err(e) = driver.remove_flow(handle) {
                eprintln!("cleanup: failed to remove {handle}: {e}");
            }
        }
        per_rep.push(RepOutcome {
            rep,
            packets_sent: 0,
            packets_lost: 0,
            setup_ms: elapsed.as_secs_f64() * 1000.0,
        });
    }
    Ok(vec![summarize(size, per_rep)])
}

fn install_serial(driver: &dyn Driver, rules: &[FlowRule]) -> Result<Vec<FlowHandle>, CliError> {
    rules.iter().map(|r| driver.install_flow(r).map_err(CliError::from)).collect()
}

/// Installs in waves of at most `fanout` concurrent requests, preserving
/// rule order in the returned handles.
fn install_waves(
    driver: &dyn Driver,
    rules: &[FlowRule],
    fanout: usize,
) -> Result<Vec<FlowHandle>, CliError> {
    if fanout == 0 {
        return Err(CliError::Invalid("fanout must be at least 1".into()));
    }
    let mut handles = Vec::with_capacity(rules.len());
    for wave in rules.chunks(fanout) {
        let outcomes = std::thread::scope(|scope| {
            let joins: Vec<_> =
                wave.iter().map(|rule| scope.spawn(move || driver.install_flow(rule))).collect();
            joins
                .into_iter()
                .map(|j| j.join().expect("install thread panicked"))
                .collect::<Vec<_>>()
        });
        for outcome in outcomes {
            handles.push(outcome?);
        }
    }
    Ok(handles)
}

fn summarize(size: u32, per_rep: Vec<RepOutcome>) -> ExperimentResult {
    let times: Vec<f64> = per_rep.iter().map(|r| r.setup_ms).collect();
    let (mean, stddev) = mean_stddev(&times);
    ExperimentResult { size, per_rep, mean_setup_ms: mean, stddev_setup_ms: stddev }
}

/// Mean and sample standard deviation (n-1 denominator, 0 when n < 2).
fn mean_stddev(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
