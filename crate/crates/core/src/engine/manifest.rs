//! Run manifest: what ran, when, and the hashes of everything it wrote.

use serde::{Deserialize, Serialize};

use crate::spec::{NodeKind, SpecDigest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    Succeeded,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Dataset,
    MetricResults,
    Report,
    Text,
    Json,
}

/// A file written by the run, relative to the run directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactRecord {
    pub name: String,
    pub kind: ArtifactKind,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: String,
    pub kind: NodeKind,
    pub status: NodeStatus,
    /// Milliseconds since run start, floored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_seconds: Option<f64>,
    #[serde(default)]
    pub artifacts: Vec<ArtifactRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Digest of the pipeline spec document as written (before any seed override).
    pub spec_digest: SpecDigest,
    /// Seed actually used.
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub engine_version: String,
    pub max_parallel: usize,
    pub parallel_kernels: bool,
    /// One record per node, in topological order.
    pub node_records: Vec<NodeRecord>,
    /// Run-level files: the pipeline spec copy and the rendered report.
    pub files: Vec<ArtifactRecord>,
    /// Artifacts the pipeline spec declares as shareable.
    pub exports: Vec<ArtifactRecord>,
}

impl RunManifest {
    pub fn record(&self, id: &str) -> Option<&NodeRecord> {
        self.node_records.iter().find(|r| r.id == id)
    }

    pub fn succeeded(&self) -> bool {
        self.node_records.iter().all(|r| r.status == NodeStatus::Succeeded)
    }

    pub fn failures(&self) -> impl Iterator<Item = &NodeRecord> {
        self.node_records.iter().filter(|r| r.status == NodeStatus::Failed)
    }

    pub fn artifact(&self, node: &str, name: &str) -> Option<&ArtifactRecord> {
        self.record(node)?.artifacts.iter().find(|a| a.name == name)
    }
}
