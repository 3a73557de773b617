//! Rule-install latency configuration.

use std::fmt;
use std::str::FromStr;

use crate::MockError;

/// How a controller serializes rule installations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstallMode {
    /// Installs are processed one at a time: the k-th rule of a batch
    /// becomes active after the sum of the first k install latencies.
    Sequential,
    /// Installs are processed concurrently: each rule becomes active one
    /// install latency after its own request.
    Parallel,
}

impl fmt::Display for InstallMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstallMode::Sequential => write!(f, "sequential"),
            InstallMode::Parallel => write!(f, "parallel"),
        }
    }
}

impl FromStr for InstallMode {
    type Err = MockError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("seq") || s.eq_ignore_ascii_case("sequential") {
            Ok(InstallMode::Sequential)
        } else if s.eq_ignore_ascii_case("par") || s.eq_ignore_ascii_case("parallel") {
            Ok(InstallMode::Parallel)
        } else {
            Err(MockError::InvalidLatency(format!(
                "unknown install mode {s:?} (expected seq|sequential|par|parallel)"
            )))
        }
    }
}

/// The simulator's timing parameters.
///
/// `per_rule_install_ms` is the time one rule takes from request to
/// activation; `install_mode` says whether a batch pays that cost serially
/// or concurrently; `base_rpc_ms` is added to the virtual clock on every
/// driver-contract call, modeling request overhead.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatencyModel {
    per_rule_install_ms: f64,
    install_mode: InstallMode,
    base_rpc_ms: f64,
}

fn check_ms(value: f64, what: &str) -> Result<f64, MockError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(MockError::InvalidLatency(format!(
            "{what} must be a finite non-negative number of milliseconds, got {value}"
        )))
    }
}

fn ms_to_ns(ms: f64) -> u64 {
    (ms * 1e6).round() as u64
}

impl LatencyModel {
    /// Builds a validated model.
    pub fn new(
        per_rule_install_ms: f64,
        install_mode: InstallMode,
        base_rpc_ms: f64,
    ) -> Result<Self, MockError> {
        Ok(LatencyModel {
            per_rule_install_ms: check_ms(per_rule_install_ms, "per_rule_install_ms")?,
            install_mode,
            base_rpc_ms: check_ms(base_rpc_ms, "base_rpc_ms")?,
        })
    }

    /// Everything instantaneous: rules activate at the request's virtual
    /// instant and contract calls cost nothing.
    pub fn zero() -> Self {
        LatencyModel {
            per_rule_install_ms: 0.0,
            install_mode: InstallMode::Sequential,
            base_rpc_ms: 0.0,
        }
    }

    /// Serial installs at the given per-rule cost, free RPCs.
    pub fn sequential(per_rule_install_ms: f64) -> Result<Self, MockError> {
        LatencyModel::new(per_rule_install_ms, InstallMode::Sequential, 0.0)
    }

    /// Concurrent installs at the given per-rule cost, free RPCs.
    pub fn parallel(per_rule_install_ms: f64) -> Result<Self, MockError> {
        LatencyModel::new(per_rule_install_ms, InstallMode::Parallel, 0.0)
    }

    /// Per-rule install latency in milliseconds.
    pub fn per_rule_install_ms(&self) -> f64 {
        self.per_rule_install_ms
    }

    /// Batch serialization mode.
    pub fn install_mode(&self) -> InstallMode {
        self.install_mode
    }

    /// Per-call request overhead in milliseconds.
    pub fn base_rpc_ms(&self) -> f64 {
        self.base_rpc_ms
    }

    pub(crate) fn per_rule_ns(&self) -> u64 {
        ms_to_ns(self.per_rule_install_ms)
    }

    pub(crate) fn base_rpc_ns(&self) -> u64 {
        ms_to_ns(self.base_rpc_ms)
    }
}
