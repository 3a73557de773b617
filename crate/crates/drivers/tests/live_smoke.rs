//! Opt-in smoke tests against live controllers.
//!
//! Ignored by default so the regular test run never depends on external
//! services. To exercise one, point the matching variable at a reachable
//! REST endpoint and ask for ignored tests:
//!
//! ```text
//! UMBRELLA_LIVE_ONOS=http://127.0.0.1:8181 \
//!   cargo test -p umbrella-drivers --test live_smoke -- --ignored
//! ```
//!
//! Credentials default to each controller's stock install and can be
//! overridden with `<VAR>_USER` / `<VAR>_PASS`.

use umbrella_core::{Action, Driver, DriverConfig, FlowRule, MatchFields};
use umbrella_drivers::{OdlDriver, OnosDriver};

fn live_config(
    name: &str,
    endpoint_var: &str,
    default_user: &str,
    default_pass: &str,
) -> Option<DriverConfig> {
    let endpoint = match std::env::var(endpoint_var) {
        Ok(value) if !value.is_empty() => value,
        _ => {
            eprintln!("skipping: set {endpoint_var} to a controller URL to run this test");
            return None;
        }
    };
    let username = std::env::var(format!("{endpoint_var}_USER"))
        .unwrap_or_else(|_| default_user.to_string());
    let password = std::env::var(format!("{endpoint_var}_PASS"))
        .unwrap_or_else(|_| default_pass.to_string());
    Some(DriverConfig {
        name: name.into(),
        endpoint,
        username,
        password,
        ..DriverConfig::default()
    })
}

/// Reads the topology, then runs one install/list/remove cycle on the first
/// connected switch using a rule that cannot disturb real traffic: priority
/// 1, matching only the IEEE experimental EtherType.
fn contract_cycle(driver: &dyn Driver) {
    let snapshot = driver.get_topology().expect("topology read failed");
    eprintln!(
        "live topology: {} devices, {} links, {} hosts",
        snapshot.device_count(),
        snapshot.links().len(),
        snapshot.host_count()
    );

    let Some((&device, _)) = snapshot.devices().iter().next() else {
        eprintln!("no switches connected; topology read is the whole smoke test");
        return;
    };

    let rule = FlowRule::builder(device)
        .priority(1)
        .match_fields(MatchFields { eth_type: Some(0x88b5), ..MatchFields::default() })
        .action(Action::Drop)
        .build()
        .expect("rule construction");

    let handle = driver.install_flow(&rule).expect("install failed");
    let listed = driver.list_flows(Some(device)).expect("list failed");
    assert!(
        listed.iter().any(|(h, _)| h == &handle),
        "installed rule missing from the listing"
    );
    driver.remove_flow(&handle).expect("remove failed");
    let listed = driver.list_flows(Some(device)).expect("list after remove failed");
    assert!(
        listed.iter().all(|(h, _)| h != &handle),
        "rule still listed after removal"
    );
}

#[test]
#[ignore = "needs a live controller; set UMBRELLA_LIVE_ONOS"]
fn onos_live_contract_cycle() {
    let Some(config) = live_config("onos", "UMBRELLA_LIVE_ONOS", "onos", "rocks") else {
        return;
    };
    let driver = OnosDriver::new(&config).expect("driver construction");
    contract_cycle(&driver);
}

#[test]
#[ignore = "needs a live controller; set UMBRELLA_LIVE_ODL"]
fn odl_live_contract_cycle() {
    let Some(config) = live_config("odl", "UMBRELLA_LIVE_ODL", "admin", "admin") else {
        return;
    };
    let driver = OdlDriver::new(&config).expect("driver construction");
    contract_cycle(&driver);
}
