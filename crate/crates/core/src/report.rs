//! Evaluation report: all metric results of a run checked against the
//! thresholds declared in the report node.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::diagnostic::DiagnosticResult;
use crate::eval::{EvalArtifact, MetricResult, Provenance};
use crate::spec::SpecDigest;

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("missing upstream evaluation artifact from node `{0}`")]
    MissingUpstream(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunIdentity {
    pub spec_digest: SpecDigest,
    pub seed: u64,
}

/// One metric as it appears in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricEntry {
    pub node: String,
    pub metric: MetricResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// `None` for informational (unthresholded) metrics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticEntry {
    pub node: String,
    pub result: DiagnosticResult,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sections {
    pub diagnostic: Vec<MetricEntry>,
    pub utility: Vec<MetricEntry>,
    pub privacy: Vec<MetricEntry>,
}

impl Sections {
    fn named(&self) -> [(&'static str, &[MetricEntry]); 3] {
        [("diagnostic", &self.diagnostic), ("utility", &self.utility), ("privacy", &self.privacy)]
    }

    pub fn metric_count(&self) -> usize {
        self.diagnostic.len() + self.utility.len() + self.privacy.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verdict {
    pub diagnostic: bool,
    pub utility: bool,
    pub privacy: bool,
    pub overall: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationReport {
    pub run: RunIdentity,
    pub diagnostics: Vec<DiagnosticEntry>,
    pub sections: Sections,
    pub verdict: Verdict,
    pub thresholds: BTreeMap<String, f64>,
}

fn section_pass(entries: &[MetricEntry]) -> bool {
    entries.iter().all(|e| e.passed != Some(false))
}

fn derive_verdict(sections: &Sections) -> Verdict {
    let diagnostic = section_pass(&sections.diagnostic);
    let utility = section_pass(&sections.utility);
    let privacy = section_pass(&sections.privacy);
    Verdict { diagnostic, utility, privacy, overall: diagnostic && utility && privacy }
}

/// Builds the report from the evaluate nodes' artifacts. `expected` lists
/// the upstream node ids; each must be present in `artifacts`. Entries are
/// ordered by node id, then by the order the node emitted them.
pub fn compile_report(
    run: RunIdentity,
    expected: &[String],
    artifacts: &BTreeMap<String, EvalArtifact>,
    thresholds: &BTreeMap<String, f64>,
) -> Result<EvaluationReport, ReportError> {
    let mut nodes: Vec<&String> = expected.iter().collect();
    nodes.sort();
    nodes.dedup();
    let mut sections = Sections::default();
    let mut diagnostics = Vec::new();
    for node in nodes {
        let artifact = artifacts.get(node).ok_or_else(|| ReportError::MissingUpstream(node.clone()))?;
        if let Some(d) = &artifact.diagnostic {
            diagnostics.push(DiagnosticEntry { node: node.clone(), result: d.clone() });
        }
        for m in &artifact.metrics {
            let threshold = thresholds.get(&m.name).copied();
            let entry = MetricEntry {
                node: node.clone(),
                passed: threshold.map(|t| m.direction.satisfies(m.score, t)),
                threshold,
                metric: m.clone(),
            };
            match m.provenance {
                Provenance::Diagnostic => sections.diagnostic.push(entry),
                Provenance::Utility => sections.utility.push(entry),
                Provenance::Privacy => sections.privacy.push(entry),
            }
        }
    }
    let verdict = derive_verdict(&sections);
    Ok(EvaluationReport { run, diagnostics, sections, verdict, thresholds: thresholds.clone() })
}

impl EvaluationReport {
    /// Whether the stored verdict agrees with one re-derived from the
    /// entries and thresholds.
    pub fn verdict_consistent(&self) -> bool {
        let entries_ok = self.sections.named().iter().all(|(_, es)| {
            es.iter().all(|e| {
                let t = self.thresholds.get(&e.metric.name).copied();
                e.threshold == t && e.passed == t.map(|t| e.metric.direction.satisfies(e.metric.score, t))
            })
        });
        entries_ok && derive_verdict(&self.sections) == self.verdict
    }

    pub fn passed(&self) -> bool {
        self.verdict.overall
    }
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn direction_name(d: crate::eval::Direction) -> &'static str {
    use crate::eval::Direction::*;
    match d {
        HigherBetter => "higher_better",
        LowerBetter => "lower_better",
        CenteredZero => "centered_zero",
        CenteredOne => "centered_one",
    }
}

/// Plain-text rendering with a fixed layout.
pub fn render_text(report: &EvaluationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "evaluation report");
    let _ = writeln!(out, "spec sha256: {}", report.run.spec_digest.hash);
    let _ = writeln!(out, "seed: {}", report.run.seed);
    let verdicts = [report.verdict.diagnostic, report.verdict.utility, report.verdict.privacy];
    for ((name, entries), ok) in report.sections.named().iter().zip(verdicts) {
        let _ = writeln!(out);
        let _ = writeln!(out, "[{name}] {}", pass_fail(ok));
        for e in entries.iter() {
            let bound = e.threshold.map_or_else(|| "-".to_string(), |t| e.metric.direction.describe_bound(t));
            let status = e.passed.map_or("INFO", pass_fail);
            let _ = writeln!(
                out,
                "  {} {} score={} {} threshold={} {}",
                e.node,
                e.metric.name,
                e.metric.score,
                direction_name(e.metric.direction),
                bound,
                status
            );
            for flag in e.metric.flags() {
                let _ = writeln!(out, "    flag: {flag}");
            }
        }
    }
    let _ = writeln!(out);
    for ((name, _), ok) in report.sections.named().iter().zip(verdicts) {
        let _ = writeln!(out, "{name}: {}", pass_fail(ok));
    }
    let _ = writeln!(out, "OVERALL: {}", pass_fail(report.verdict.overall));
    out
}
