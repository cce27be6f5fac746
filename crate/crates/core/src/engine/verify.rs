//! Re-checks a run directory against its manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::canonical::sha256_hex;
use crate::report::{render_text, EvaluationReport};
use crate::spec::{parse_spec, spec_digest};

use super::{ArtifactRecord, NodeStatus, RunManifest, MANIFEST_FILE, REPORT_JSON, REPORT_TEXT, SPEC_FILE};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("no manifest at {0}")]
    ManifestMissing(PathBuf),
    #[error("{path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Verification {
    pub checks: Vec<Check>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }
}

fn read(path: &Path) -> Result<Vec<u8>, VerifyError> {
    std::fs::read(path).map_err(|source| VerifyError::Io { path: path.to_path_buf(), source })
}

/// Checks file hashes, the pipeline spec digest, dependency ordering of node
/// timestamps, failure propagation and report consistency.
pub fn verify_manifest(dir: impl AsRef<Path>) -> Result<Verification, VerifyError> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(VerifyError::ManifestMissing(manifest_path));
    }
    let manifest: RunManifest = serde_json::from_slice(&read(&manifest_path)?)
        .map_err(|e| VerifyError::Corrupt { path: manifest_path.clone(), message: e.to_string() })?;
    let spec_path = dir.join(SPEC_FILE);
    if !spec_path.is_file() {
        return Err(VerifyError::Corrupt { path: spec_path, message: "spec copy missing".into() });
    }
    let mut v = Verification::default();

    let spec = match parse_spec(&read(&spec_path)?) {
        Ok(spec) => {
            let digest = spec_digest(&spec);
            v.push("spec digest", digest == manifest.spec_digest, format!("recomputed {}", digest.hash));
            Some(spec)
        }
        Err(e) => {
            v.push("spec digest", false, format!("spec copy does not parse: {e}"));
            None
        }
    };

    let all_files: Vec<&ArtifactRecord> =
        manifest.node_records.iter().flat_map(|r| r.artifacts.iter()).chain(manifest.files.iter()).collect();
    for a in &all_files {
        let path = dir.join(&a.path);
        let (ok, detail) = match std::fs::read(&path) {
            Ok(bytes) => {
                let h = sha256_hex(&bytes);
                (h == a.sha256, if h == a.sha256 { "hash matches".to_string() } else { format!("hash mismatch: {h}") })
            }
            Err(e) => (false, format!("cannot read: {e}")),
        };
        v.push(format!("file {}", a.path), ok, detail);
    }
    for e in &manifest.exports {
        let listed = all_files.iter().any(|a| *a == e);
        v.push(format!("export {}", e.path), listed, if listed { "recorded" } else { "not a recorded artifact" });
    }

    let Some(spec) = spec else { return Ok(v) };
    let dag = spec.graph();
    let ids: Vec<&str> = spec.nodes.iter().map(|n| n.id.as_str()).collect();
    let mut recorded: Vec<&str> = manifest.node_records.iter().map(|r| r.id.as_str()).collect();
    recorded.sort_unstable();
    let mut expected = ids.clone();
    expected.sort_unstable();
    v.push("node set", recorded == expected, format!("{} records", recorded.len()));
    if recorded != expected {
        return Ok(v);
    }
    let rec = |i: usize| manifest.record(ids[i]).expect("node set checked");

    let mut ordering = Vec::new();
    for (u, w) in dag.edges() {
        let (a, b) = (rec(u), rec(w));
        if b.status != NodeStatus::Skipped && a.status != NodeStatus::Succeeded {
            ordering.push(format!("`{}` ran although `{}` did not succeed", b.id, a.id));
        }
        if let (Some(end), Some(start)) = (a.end_ms, b.start_ms) {
            if end > start {
                ordering.push(format!("`{}` started at {start} ms before `{}` ended at {end} ms", b.id, a.id));
            }
        }
    }
    v.push("dependency ordering", ordering.is_empty(), ordering.join("; "));

    let mut propagation = Vec::new();
    for i in 0..dag.len() {
        let r = rec(i);
        match r.status {
            NodeStatus::Failed => {
                for (d, desc) in dag.descendants(i).into_iter().enumerate() {
                    if desc && rec(d).status != NodeStatus::Skipped {
                        propagation.push(format!("`{}` not skipped after `{}` failed", ids[d], r.id));
                    }
                }
            }
            NodeStatus::Skipped => {
                if !dag.ancestors(i).into_iter().enumerate().any(|(a, anc)| anc && rec(a).status == NodeStatus::Failed) {
                    propagation.push(format!("`{}` skipped without a failed ancestor", r.id));
                }
            }
            NodeStatus::Succeeded => {
                let name = spec.nodes[i].kind().artifact_name();
                if !r.artifacts.iter().any(|a| a.name == name) {
                    propagation.push(format!("`{}` succeeded without a `{name}` artifact", r.id));
                }
            }
        }
    }
    v.push("node statuses", propagation.is_empty(), propagation.join("; "));

    if manifest.files.iter().any(|f| f.path == REPORT_JSON) {
        let bytes = read(&dir.join(REPORT_JSON))?;
        match serde_json::from_slice::<EvaluationReport>(&bytes) {
            Ok(report) => {
                v.push("report verdict", report.verdict_consistent(), "verdict re-derived from entries and thresholds");
                let text = std::fs::read(dir.join(REPORT_TEXT)).unwrap_or_default();
                v.push("report text", text == render_text(&report).as_bytes(), "text rendering matches report.json");
                v.push(
                    "report identity",
                    report.run.spec_digest == manifest.spec_digest && report.run.seed == manifest.seed,
                    "report names this run's spec digest and seed",
                );
            }
            Err(e) => v.push("report verdict", false, format!("report.json does not parse: {e}")),
        }
    }
    Ok(v)
}
