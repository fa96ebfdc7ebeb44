use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// A pass/fail flag together with the comparison that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    /// `"<"`, `"<="`, `">="` or `"decreasing"`.
    pub comparison: String,
    pub threshold: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    pub fn below(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self { name: name.into(), statistic, comparison: "<".into(), threshold, pass: statistic < threshold, detail: String::new() }
    }

    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self { name: name.into(), statistic, comparison: "<=".into(), threshold, pass: statistic <= threshold, detail: String::new() }
    }

    /// `values` must be strictly decreasing; `statistic` records the largest step
    /// `values[k+1] − values[k]` (negative when the check passes).
    pub fn decreasing(name: impl Into<String>, values: &[f64]) -> Self {
        let worst = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        let pass = values.len() >= 2 && worst < 0.0;
        let detail = values.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(" > ");
        Self { name: name.into(), statistic: worst, comparison: "decreasing".into(), threshold: 0.0, pass, detail }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Structured result of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub kind: String,
    pub inputs: serde_json::Value,
    /// One row per ε (or N), keyed by column name.
    pub results: Vec<BTreeMap<String, f64>>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub wall_time_secs: f64,
}

impl ExperimentReport {
    pub fn new(kind: impl Into<String>, inputs: serde_json::Value) -> Self {
        Self {
            schema_version: crate::SCHEMA_VERSION,
            kind: kind.into(),
            inputs,
            results: Vec::new(),
            checks: Vec::new(),
            pass: true,
            wall_time_secs: 0.0,
        }
    }

    pub fn push_check(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
