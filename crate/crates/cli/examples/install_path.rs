//! Connects to the simulated controller, computes a shortest path, and
//! installs its flow rules.

use umbrella_cli::{builtin_registry, install_path_rules};
use umbrella_core::path::PATH_RULE_PRIORITY;
use umbrella_core::DriverConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = DriverConfig::default();
    config.name = "mock".into();
    config.extras.insert("topology".into(), "linear:5".into());

    let driver = builtin_registry().create(&config)?;
    let snapshot = driver.get_topology()?;
    println!("{} devices", snapshot.device_count());

    let installed = install_path_rules(
        driver.as_ref(),
        "00:00:00:00:00:01".parse()?,
        "00:00:00:00:00:05".parse()?,
        None,
        PATH_RULE_PRIORITY,
    )?;
    println!("installed {} rules", installed.installed.len());
    Ok(())
}
