//! Benchmark experiment description and the setup-time arithmetic.
//!
//! The measurement design: a constant-rate packet train starts at virtual
//! time zero, the path rules are installed `pre_install_delay_ms` later, and
//! every packet emitted before the rules became active is lost. Flow-rule
//! setup time is therefore recovered from the loss count alone:
//!
//! ```text
//! setup_ms = max(0, packets_lost * interval_ms - pre_install_delay_ms)
//! ```
//!
//! The train must outlive the delay (`train_duration_ms >
//! pre_install_delay_ms`), otherwise every packet is lost and the formula
//! measures the train length, not the setup time.

use std::str::FromStr;

use umbrella_mock::InstallMode;

use crate::error::CliError;

/// Everything that defines one benchmark sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    /// Topology sizes (switch counts) to sweep, in run order.
    pub sizes: Vec<u32>,
    /// Repetitions per size.
    pub repetitions: u32,
    /// Probe emission rate in packets per second.
    pub rate_pps: u32,
    /// Gap between train start and the first install request.
    pub pre_install_delay_ms: u64,
    /// Total train duration.
    pub train_duration_ms: u64,
    /// Whether rule installs are serialized or overlapped.
    pub install_mode: InstallMode,
    /// Path algorithm name, `None` for the registry default.
    pub algorithm: Option<String>,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            sizes: (1..=10).map(|i| i * 10).collect(),
            repetitions: 5,
            rate_pps: 1000,
            pre_install_delay_ms: 2000,
            train_duration_ms: 10_000,
            install_mode: InstallMode::Sequential,
            algorithm: None,
        }
    }
}

impl ExperimentPlan {
    /// Rejects plans whose measurement would be meaningless.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.sizes.is_empty() {
            return Err(CliError::Invalid("plan has no topology sizes".into()));
        }
        if let Some(&bad) = self.sizes.iter().find(|&&s| s == 0) {
            return Err(CliError::Invalid(format!("topology size must be positive, got {bad}")));
        }
        if self.repetitions == 0 {
            return Err(CliError::Invalid("repetitions must be at least 1".into()));
        }
        if self.rate_pps == 0 {
            return Err(CliError::Invalid("rate_pps must be positive".into()));
        }
        if self.train_duration_ms <= self.pre_install_delay_ms {
            return Err(CliError::Invalid(format!(
                "train_duration_ms ({}) must exceed pre_install_delay_ms ({})",
                self.train_duration_ms, self.pre_install_delay_ms
            )));
        }
        Ok(())
    }

    /// Gap between consecutive probe packets, in nanoseconds (at least 1).
    pub fn interval_ns(&self) -> u64 {
        ((1e9 / f64::from(self.rate_pps)).round() as u64).max(1)
    }

    /// Gap between consecutive probe packets, in milliseconds.
    pub fn interval_ms(&self) -> f64 {
        1000.0 / f64::from(self.rate_pps)
    }

    /// Number of probe packets in the train (at least 1).
    pub fn packet_count(&self) -> u64 {
        (self.train_duration_ms * u64::from(self.rate_pps) / 1000).max(1)
    }
}

/// Recovers flow-rule setup time from the loss count of one train.
///
/// Packets are emitted every `interval_ms` starting at time zero; installs
/// begin at `pre_install_delay_ms`. Losses beyond the delay window are time
/// the rules were still being installed. A loss count within the delay
/// window clamps to zero rather than going negative.
pub fn compute_setup_time(packets_lost: u64, interval_ms: f64, pre_install_delay_ms: f64) -> f64 {
    let blackout_ms = packets_lost as f64 * interval_ms;
    (blackout_ms - pre_install_delay_ms).max(0.0)
}

/// Parses a size sweep: `"10..100:10"` (inclusive range with step),
/// `"10,20,50"` (explicit list), or a single number.
pub fn parse_sizes(text: &str) -> Result<Vec<u32>, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(CliError::Invalid("empty size list".into()));
    }
    if let Some((range, step)) = split_range(text)? {
        let (start, end) = range;
        if step == 0 {
            return Err(CliError::Invalid("size step must be positive".into()));
        }
        if start == 0 {
            return Err(CliError::Invalid("topology size must be positive".into()));
        }
        if start > end {
            return Err(CliError::Invalid(format!("size range {start}..{end} is empty")));
        }
        return Ok((start..=end).step_by(step as usize).collect());
    }
    text.split(',')
        .map(|part| {
            let part = part.trim();
            u32::from_str(part)
                .map_err(|_| CliError::Invalid(format!("bad size {part:?}")))
                .and_then(|n| {
                    if n == 0 {
                        Err(CliError::Invalid("topology size must be positive".into()))
                    } else {
                        Ok(n)
                    }
                })
        })
        .collect()
}

/// Returns `Some(((start, end), step))` when the text uses range syntax.
fn split_range(text: &str) -> Result<Option<((u32, u32), u32)>, CliError> {
    let Some((bounds, rest)) = text.split_once("..") else {
        return Ok(None);
    };
    let (end_text, step) = match rest.split_once(':') {
        Some((e, s)) => {
            let step = u32::from_str(s.trim())
                .map_err(|_| CliError::Invalid(format!("bad size step {s:?}")))?;
            (e, step)
        }
        None => (rest, 1),
    };
    let start = u32::from_str(bounds.trim())
        .map_err(|_| CliError::Invalid(format!("bad range start {bounds:?}")))?;
    let end = u32::from_str(end_text.trim())
        .map_err(|_| CliError::Invalid(format!("bad range end {end_text:?}")))?;
    Ok(Some(((start, end), step)))
}
