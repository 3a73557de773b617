//! Application layer: the `umbrella` command-line tool and the flow-rule
//! setup-time benchmark harness.
//!
//! Everything here programs controllers exclusively through the
//! [`umbrella_core::Driver`] contract. No function in this crate branches
//! on which driver it was handed; swapping `--driver mock` for `--driver
//! onos` changes construction, never behavior.

pub mod error;
pub mod experiment;
pub mod plan;
pub mod registry;
pub mod report;

pub use error::CliError;
pub use experiment::{
    install_path_rules, pick_endpoints, run_live, run_simulated, ExperimentResult, InstalledPath,
    RepOutcome,
};
pub use plan::{compute_setup_time, parse_sizes, ExperimentPlan};
pub use registry::{build_mock_controller, builtin_registry};
pub use report::{csv_string, gnuplot_string, write_csv, write_gnuplot, MeasurementKind, ReportMeta};
