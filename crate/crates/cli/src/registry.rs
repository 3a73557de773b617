//! The built-in driver catalog.
//!
//! Three names are registered: `mock` (in-process simulated controller),
//! `onos`, and `odl`. The mock is configured entirely through `extras`
//! keys so it needs no running endpoint:
//!
//! | key            | meaning                                  | default    |
//! |----------------|------------------------------------------|------------|
//! | `topology`     | `linear:N` or an inline topology JSON    | `linear:3` |
//! | `per_rule_ms`  | per-rule install latency in milliseconds | `0`        |
//! | `install_mode` | `seq`/`sequential` or `par`/`parallel`   | `seq`      |
//! | `base_rpc_ms`  | per-call latency in milliseconds         | `0`        |

use std::str::FromStr;
use std::sync::Arc;

use umbrella_core::topospec::TopologySpec;
use umbrella_core::{Driver, DriverConfig, DriverError, DriverRegistry};
use umbrella_drivers::{OdlDriver, OnosDriver};
use umbrella_mock::{InstallMode, LatencyModel, MockController};

/// Parses the `topology` extra: `linear:N` or inline JSON.
fn parse_topology_extra(text: &str) -> Result<TopologySpec, DriverError> {
    if let Some(n_text) = text.strip_prefix("linear:") {
        let n = u32::from_str(n_text.trim())
            .map_err(|_| DriverError::Rejected(format!("bad linear topology size {n_text:?}")))?;
        return TopologySpec::linear(n).map_err(|e| DriverError::Rejected(e.to_string()));
    }
    TopologySpec::from_json(text).map_err(|e| DriverError::Rejected(e.to_string()))
}

fn parse_ms_extra(config: &DriverConfig, key: &str) -> Result<f64, DriverError> {
    match config.extras.get(key) {
        None => Ok(0.0),
        Some(text) => f64::from_str(text.trim())
            .map_err(|_| DriverError::Rejected(format!("bad {key} value {text:?}"))),
    }
}

/// Builds a simulated controller from a driver configuration's extras.
pub fn build_mock_controller(config: &DriverConfig) -> Result<MockController, DriverError> {
    let spec = match config.extras.get("topology") {
        None => TopologySpec::linear(3).map_err(|e| DriverError::Rejected(e.to_string()))?,
        Some(text) => parse_topology_extra(text)?,
    };
    let mode = match config.extras.get("install_mode") {
        None => InstallMode::Sequential,
        Some(text) => {
            InstallMode::from_str(text).map_err(|e| DriverError::Rejected(e.to_string()))?
        }
    };
    let latency = LatencyModel::new(
        parse_ms_extra(config, "per_rule_ms")?,
        mode,
        parse_ms_extra(config, "base_rpc_ms")?,
    )
    .map_err(|e| DriverError::Rejected(e.to_string()))?;
    MockController::with_topology(&spec, latency).map_err(|e| DriverError::Rejected(e.to_string()))
}

/// A registry holding the three built-in drivers.
pub fn builtin_registry() -> DriverRegistry {
    let registry = DriverRegistry::new();
    registry
        .register(
            "mock",
            Arc::new(|config: &DriverConfig| {
                build_mock_controller(config).map(|c| Box::new(c) as Box<dyn Driver>)
            }),
        )
        .expect("fresh registry");
    registry
        .register(
            "onos",
            Arc::new(|config: &DriverConfig| {
                OnosDriver::new(config).map(|d| Box::new(d) as Box<dyn Driver>)
            }),
        )
        .expect("fresh registry");
    registry
        .register(
            "odl",
            Arc::new(|config: &DriverConfig| {
                OdlDriver::new(config).map(|d| Box::new(d) as Box<dyn Driver>)
            }),
        )
        .expect("fresh registry");
    registry
}
