//! Diagnostic, utility and privacy evaluation of a synthetic dataset
//! against the real one.

pub mod diagnostic;
pub mod ks;
pub mod privacy;
pub mod utility;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tabular::TabularError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("real and synthetic schemas differ")]
    SchemaMismatch,
    #[error("invalid privacy config: {0}")]
    Config(String),
    #[error("degenerate null model: {0}")]
    DegenerateNull(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Tabular(#[from] TabularError),
}

/// How a score should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
    CenteredZero,
    CenteredOne,
}

impl Direction {
    /// Whether `score` satisfies `bound` in this direction's sense:
    /// `>=` for higher-better, `<=` for lower-better, and a maximum absolute
    /// deviation from 0 or 1 for the centered directions.
    pub fn satisfies(self, score: f64, bound: f64) -> bool {
        match self {
            Direction::HigherBetter => score >= bound,
            Direction::LowerBetter => score <= bound,
            Direction::CenteredZero => score.abs() <= bound,
            Direction::CenteredOne => (score - 1.0).abs() <= bound,
        }
    }

    pub fn describe_bound(self, bound: f64) -> String {
        match self {
            Direction::HigherBetter => format!(">= {bound}"),
            Direction::LowerBetter => format!("<= {bound}"),
            Direction::CenteredZero => format!("|x| <= {bound}"),
            Direction::CenteredOne => format!("|x-1| <= {bound}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Diagnostic,
    Utility,
    Privacy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricResult {
    pub name: String,
    pub score: f64,
    pub direction: Direction,
    pub details: BTreeMap<String, serde_json::Value>,
    pub provenance: Provenance,
}

impl MetricResult {
    pub fn new(name: &str, score: f64, direction: Direction, provenance: Provenance) -> Self {
        debug_assert!(score.is_finite(), "{name} score is not finite");
        Self { name: name.to_string(), score, direction, details: BTreeMap::new(), provenance }
    }

    pub fn with(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    /// Appends to the `flags` detail list.
    pub fn flag(mut self, flag: impl Into<String>) -> Self {
        let entry = self.details.entry("flags".to_string()).or_insert_with(|| serde_json::Value::Array(Vec::new()));
        if let serde_json::Value::Array(a) = entry {
            a.push(serde_json::Value::String(flag.into()));
        }
        self
    }

    pub fn flags(&self) -> Vec<&str> {
        match self.details.get("flags") {
            Some(serde_json::Value::Array(a)) => a.iter().filter_map(|v| v.as_str()).collect(),
            _ => Vec::new(),
        }
    }
}

/// Payload of an evaluate node's `metrics` artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalArtifact {
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<diagnostic::DiagnosticResult>,
    pub metrics: Vec<MetricResult>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_senses() {
        assert!(Direction::HigherBetter.satisfies(0.5, 0.5));
        assert!(!Direction::HigherBetter.satisfies(1.0, 1.1));
        assert!(Direction::LowerBetter.satisfies(0.1, 0.2));
        assert!(Direction::CenteredZero.satisfies(-1.5, 2.0));
        assert!(!Direction::CenteredOne.satisfies(2.5, 1.0));
    }

    #[test]
    fn flags_accumulate() {
        let m = MetricResult::new("x", 0.0, Direction::LowerBetter, Provenance::Privacy).flag("a").flag("b");
        assert_eq!(m.flags(), ["a", "b"]);
    }
}
