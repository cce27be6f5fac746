//! Format, validity and structure checks.

use serde::{Deserialize, Serialize};

use crate::tabular::{Column, Dataset};

use super::{Direction, MetricResult, Provenance};

pub const METRIC_NAME: &str = "diagnostic_overall";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    RangeValidity,
    CategoryAdherence,
    NameTypeMatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnCheck {
    pub column: String,
    pub check: Check,
    pub pass_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticResult {
    pub structure_ok: bool,
    pub per_column: Vec<ColumnCheck>,
    pub overall_score: f64,
}

impl DiagnosticResult {
    pub fn to_metric(&self) -> MetricResult {
        let mut m = MetricResult::new(METRIC_NAME, self.overall_score, Direction::HigherBetter, Provenance::Diagnostic)
            .with("structure_ok", self.structure_ok);
        if !self.structure_ok {
            m = m.flag("schema mismatch");
        }
        m
    }
}

/// Compares `synth` to `real`: per synthetic column a name/type check, then
/// a range check (continuous) or observed-category check (categorical) for
/// columns whose name and kind match the real column at the same position.
pub fn diagnose(real: &Dataset, synth: &Dataset) -> DiagnosticResult {
    let structure_ok = real.schema().is_structurally_equal(synth.schema());
    let ranges = real.observed_ranges();
    let mut per_column = Vec::new();
    for (j, spec) in synth.schema().columns().iter().enumerate() {
        let counterpart = real.schema().columns().get(j);
        let matches = counterpart
            .is_some_and(|r| r.name == spec.name && r.kind == spec.kind && r.categories == spec.categories);
        per_column.push(ColumnCheck {
            column: spec.name.clone(),
            check: Check::NameTypeMatch,
            pass_fraction: if matches { 1.0 } else { 0.0 },
        });
        if !matches {
            continue;
        }
        let n = synth.n_rows();
        let pass = match (real.column(j), synth.column(j)) {
            (Column::Continuous(_), Column::Continuous(s)) => {
                let inside = match ranges[j] {
                    Some((lo, hi)) => s.iter().filter(|&&x| lo <= x && x <= hi).count(),
                    None => 0,
                };
                (Check::RangeValidity, inside)
            }
            (Column::Categorical(r), Column::Categorical(s)) => {
                let mut seen = vec![false; spec.n_categories()];
                for &c in r {
                    seen[c as usize] = true;
                }
                (Check::CategoryAdherence, s.iter().filter(|&&c| seen[c as usize]).count())
            }
            _ => unreachable!("kinds matched above"),
        };
        per_column.push(ColumnCheck {
            column: spec.name.clone(),
            check: pass.0,
            pass_fraction: if n == 0 { 1.0 } else { pass.1 as f64 / n as f64 },
        });
    }
    let overall_score = if structure_ok && !per_column.is_empty() {
        per_column.iter().map(|c| c.pass_fraction).sum::<f64>() / per_column.len() as f64
    } else {
        0.0
    };
    DiagnosticResult { structure_ok, per_column, overall_score }
}
