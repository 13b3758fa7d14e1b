//! The JSON run report.

use crate::config::ExperimentConfig;
use serde::Serialize;
use serde_json::Value;
use tfm_core::verify::Status;

/// Bumped whenever the report layout changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub seed: u64,
    pub status: Status,
    pub wall_time_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub result: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub status: Status,
    /// The resolved config; feeding this file back as `--config` re-runs it.
    pub config: ExperimentConfig,
    pub checks: Vec<CheckOutcome>,
}

impl RunReport {
    pub fn new(config: ExperimentConfig, checks: Vec<CheckOutcome>) -> Self {
        let status = if checks.is_empty() {
            Status::NotApplicable
        } else {
            Status::combine(checks.iter().map(|c| c.status))
        };
        RunReport {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME"),
            tool_version: env!("CARGO_PKG_VERSION"),
            status,
            config,
            checks,
        }
    }

    /// Pass and not-applicable checks do not fail a run.
    pub fn succeeded(&self) -> bool {
        self.checks
            .iter()
            .all(|c| matches!(c.status, Status::Pass | Status::NotApplicable))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
