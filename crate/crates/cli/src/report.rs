//! Result export: CSV for analysis, a gnuplot-friendly table for plotting.
//!
//! Exports are deterministic text: the same results and metadata always
//! produce the same bytes, so re-exported reports diff clean. The metadata
//! header names the measurement method because loss-based (simulated) and
//! ack-based (live) numbers must never be mixed in one analysis.

use std::fs;
use std::path::Path;

use umbrella_mock::InstallMode;

use crate::error::CliError;
use crate::experiment::ExperimentResult;
use crate::plan::ExperimentPlan;

/// How the setup time was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementKind {
    /// Recovered from probe-train loss on a simulated controller.
    LossBased,
    /// Wall-clock span from first install request to last acknowledgment.
    AckBased,
}

impl MeasurementKind {
    /// The label written to report headers.
    pub fn as_str(self) -> &'static str {
        match self {
            MeasurementKind::LossBased => "loss-based",
            MeasurementKind::AckBased => "ack-based",
        }
    }
}

/// Header metadata for one exported report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportMeta {
    /// Measurement method.
    pub measurement: MeasurementKind,
    /// Install mode the plan ran under.
    pub install_mode: InstallMode,
    /// Probe rate in packets per second.
    pub rate_pps: u32,
    /// Gap between train start and first install.
    pub pre_install_delay_ms: u64,
}

impl ReportMeta {
    /// Metadata describing a plan run with the given method.
    pub fn for_plan(plan: &ExperimentPlan, measurement: MeasurementKind) -> Self {
        ReportMeta {
            measurement,
            install_mode: plan.install_mode,
            rate_pps: plan.rate_pps,
            pre_install_delay_ms: plan.pre_install_delay_ms,
        }
    }
}

/// Renders results as CSV: commented metadata, a header row, then one row
/// per (size, repetition) in sweep order. Empty results are an error.
pub fn csv_string(results: &[ExperimentResult], meta: &ReportMeta) -> Result<String, CliError> {
    if results.is_empty() {
        return Err(CliError::Invalid("no results to export".into()));
    }
    let mut out = String::new();
    out.push_str(&format!("# measurement: {}\n", meta.measurement.as_str()));
    out.push_str(&format!("# install_mode: {}\n", meta.install_mode));
    out.push_str(&format!("# rate_pps: {}\n", meta.rate_pps));
    out.push_str(&format!("# pre_install_delay_ms: {}\n", meta.pre_install_delay_ms));
    out.push_str("size,rep,packets_sent,packets_lost,setup_ms\n");
    for result in results {
        for rep in &result.per_rep {
            out.push_str(&format!(
                "{},{},{},{},{:.3}\n",
                result.size, rep.rep, rep.packets_sent, rep.packets_lost, rep.setup_ms
            ));
        }
    }
    Ok(out)
}

/// Renders per-size aggregates as a whitespace table for gnuplot:
/// `size mean_setup_ms stddev_setup_ms`.
pub fn gnuplot_string(results: &[ExperimentResult]) -> Result<String, CliError> {
    if results.is_empty() {
        return Err(CliError::Invalid("no results to export".into()));
    }
    let mut out = String::from("# size mean_setup_ms stddev_setup_ms\n");
    for result in results {
        out.push_str(&format!(
            "{} {:.3} {:.3}\n",
            result.size, result.mean_setup_ms, result.stddev_setup_ms
        ));
    }
    Ok(out)
}

/// Writes the CSV to `path`. Nothing is created when rendering fails.
pub fn write_csv(
    path: &Path,
    results: &[ExperimentResult],
    meta: &ReportMeta,
) -> Result<(), CliError> {
    let text = csv_string(results, meta)?;
    fs::write(path, text)?;
    Ok(())
}

/// Writes the gnuplot table to `path`. Nothing is created when rendering
/// fails.
pub fn write_gnuplot(path: &Path, results: &[ExperimentResult]) -> Result<(), CliError> {
    let text = gnuplot_string(results)?;
    fs::write(path, text)?;
    Ok(())
}
