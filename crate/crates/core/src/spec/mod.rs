//! Pipeline spec: parsing, validation, hashing and data-flow audit.
//!
//! The document is JSON with top-level keys `version` (`"1"`), `metadata`,
//! `inputs`, `seed`, `nodes` and `outputs`. Parsing is strict: unknown keys
//! anywhere are rejected, because the document is what data owners review.

mod audit;
pub mod graph;
mod params;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical;

pub use audit::{data_flow_audit, AuditReport, AuditViolation};
pub use graph::Dag;
pub use params::*;

pub const SPEC_VERSION: &str = "1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown field at {location}: {message}")]
    UnknownField { location: String, message: String },
    #[error("invalid document at {location}: {message}")]
    InvalidDocument { location: String, message: String },
    #[error("unsupported spec version `{0}` (expected \"1\")")]
    UnsupportedVersion(String),
    #[error("duplicate node id `{0}`")]
    DuplicateNodeId(String),
    #[error("node `{0}` depends on itself")]
    SelfDependency(String),
    #[error("node `{node}` depends on unknown node `{missing}`")]
    DanglingDependency { node: String, missing: String },
    #[error("dependency cycle: {}", .path.join(" -> "))]
    CycleDetected { path: Vec<String> },
    #[error("spec has no report node")]
    MissingReportNode,
    #[error("spec has more than one report node: {}", .0.join(", "))]
    MultipleReportNodes(Vec<String>),
    #[error("{kind} node `{node}` has no path to the report node")]
    NotReportAncestor { node: String, kind: NodeKind },
    #[error("node `{node}`: {message}")]
    InvalidNode { node: String, message: String },
    #[error("outputs[{index}]: {message}")]
    InvalidOutput { index: usize, message: String },
}

impl SpecError {
    fn from_json(e: serde_json::Error, location: Option<&str>) -> Self {
        use serde_json::error::Category;
        let message = e.to_string();
        let location = location.map_or_else(|| format!("line {}, column {}", e.line(), e.column()), str::to_string);
        match e.classify() {
            Category::Syntax | Category::Eof | Category::Io => {
                SpecError::Syntax { line: e.line(), column: e.column(), message }
            }
            Category::Data if message.starts_with("unknown field") || message.starts_with("unknown variant") => {
                SpecError::UnknownField { location, message }
            }
            Category::Data => SpecError::InvalidDocument { location, message },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSource {
    /// CSV path, relative to the pipeline spec document's directory unless absolute.
    pub path: String,
    /// Schema JSON path, resolved like `path`.
    pub schema: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputRef {
    pub node: String,
    pub artifact: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineNode {
    pub id: String,
    pub depends_on: Vec<String>,
    pub params: NodeParams,
}

impl PipelineNode {
    pub fn kind(&self) -> NodeKind {
        self.params.kind()
    }
}

/// A validated pipeline spec.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSpec {
    pub version: String,
    pub metadata: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, InputSource>,
    pub seed: u64,
    pub nodes: Vec<PipelineNode>,
    pub outputs: Vec<OutputRef>,
}

fn empty_object() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    kind: NodeKind,
    #[serde(default = "empty_object")]
    params: serde_json::Value,
    #[serde(default)]
    depends_on: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    version: String,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
    #[serde(default)]
    inputs: BTreeMap<String, InputSource>,
    seed: u64,
    nodes: Vec<RawNode>,
    #[serde(default)]
    outputs: Vec<OutputRef>,
}

impl Serialize for PipelineSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                Ok(RawNode {
                    id: n.id.clone(),
                    kind: n.kind(),
                    params: n.params.to_value()?,
                    depends_on: n.depends_on.clone(),
                })
            })
            .collect::<serde_json::Result<Vec<_>>>()
            .map_err(serde::ser::Error::custom)?;
        RawSpec {
            version: self.version.clone(),
            metadata: self.metadata.clone(),
            inputs: self.inputs.clone(),
            seed: self.seed,
            nodes,
            outputs: self.outputs.clone(),
        }
        .serialize(s)
    }
}

/// 256-bit content hash of a spec's canonical serialization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDigest {
    pub hash: String,
    pub canonical_bytes_len: usize,
}

/// Parses and fully validates a spec document.
pub fn parse_spec(bytes: &[u8]) -> Result<PipelineSpec, SpecError> {
    let raw: RawSpec = serde_json::from_slice(bytes).map_err(|e| SpecError::from_json(e, None))?;
    if raw.version != SPEC_VERSION {
        return Err(SpecError::UnsupportedVersion(raw.version));
    }
    let mut nodes = Vec::with_capacity(raw.nodes.len());
    for (i, rn) in raw.nodes.into_iter().enumerate() {
        let loc = format!("nodes[{i}] (`{}`) params", rn.id);
        let params = NodeParams::from_value(rn.kind, rn.params).map_err(|e| SpecError::from_json(e, Some(&loc)))?;
        nodes.push(PipelineNode { id: rn.id, depends_on: rn.depends_on, params });
    }
    let spec = PipelineSpec {
        version: raw.version,
        metadata: raw.metadata,
        inputs: raw.inputs,
        seed: raw.seed,
        nodes,
        outputs: raw.outputs,
    };
    spec.validate()?;
    Ok(spec)
}

impl PipelineSpec {
    pub fn node(&self, id: &str) -> Option<&PipelineNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Dependency graph over node indices. Panics on dangling ids, which a
    /// validated spec cannot contain.
    pub fn graph(&self) -> Dag {
        let index: HashMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let edges: Vec<(usize, usize)> = self
            .nodes
            .iter()
            .enumerate()
            .flat_map(|(v, n)| n.depends_on.iter().map(move |d| (d, v)))
            .map(|(d, v)| (index[d.as_str()], v))
            .collect();
        Dag::new(self.nodes.iter().map(|n| n.id.clone()).collect(), &edges)
    }

    pub fn report_node(&self) -> Option<&PipelineNode> {
        self.nodes.iter().find(|n| n.kind() == NodeKind::Report)
    }

    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        canonical::to_canonical_bytes(self).expect("spec values are always serializable")
    }

    /// Re-runs all structural and semantic checks.
    pub fn validate(&self) -> Result<(), SpecError> {
        let mut seen = HashSet::new();
        for n in &self.nodes {
            if n.id.is_empty() {
                return Err(SpecError::InvalidNode { node: n.id.clone(), message: "empty node id".into() });
            }
            if !seen.insert(n.id.as_str()) {
                return Err(SpecError::DuplicateNodeId(n.id.clone()));
            }
        }
        for n in &self.nodes {
            for d in &n.depends_on {
                if d == &n.id {
                    return Err(SpecError::SelfDependency(n.id.clone()));
                }
                if !seen.contains(d.as_str()) {
                    return Err(SpecError::DanglingDependency { node: n.id.clone(), missing: d.clone() });
                }
            }
        }
        let dag = self.graph();
        dag.topological_order().map_err(|path| SpecError::CycleDetected { path })?;

        let reports: Vec<usize> = (0..self.nodes.len()).filter(|&i| self.nodes[i].kind() == NodeKind::Report).collect();
        let report = match reports.as_slice() {
            [] => return Err(SpecError::MissingReportNode),
            [r] => *r,
            _ => return Err(SpecError::MultipleReportNodes(reports.iter().map(|&i| self.nodes[i].id.clone()).collect())),
        };
        let ancestors = dag.ancestors(report);
        for (i, n) in self.nodes.iter().enumerate() {
            if (n.kind().is_evaluate() || n.kind() == NodeKind::Generate) && !ancestors[i] {
                return Err(SpecError::NotReportAncestor { node: n.id.clone(), kind: n.kind() });
            }
        }
        for n in &self.nodes {
            self.validate_node(n)?;
        }
        self.validate_outputs()
    }

    fn dep_kinds<'a>(&'a self, n: &'a PipelineNode) -> impl Iterator<Item = (&'a str, NodeKind)> + 'a {
        n.depends_on.iter().map(|d| (d.as_str(), self.node(d).expect("checked").kind()))
    }

    fn validate_node(&self, n: &PipelineNode) -> Result<(), SpecError> {
        let fail = |m: String| Err(SpecError::InvalidNode { node: n.id.clone(), message: m });
        let real_deps = self.dep_kinds(n).filter(|(_, k)| k.yields_real_data()).count();
        let gen_deps = self.dep_kinds(n).filter(|(_, k)| *k == NodeKind::Generate).count();
        let other_deps = n.depends_on.len() - real_deps - gen_deps;
        match &n.params {
            NodeParams::Load(p) => {
                if !n.depends_on.is_empty() {
                    return fail("load nodes cannot have dependencies".into());
                }
                if !self.inputs.contains_key(&p.input) {
                    return fail(format!("unknown input `{}`", p.input));
                }
            }
            NodeParams::Preprocess(p) => {
                if real_deps != 1 || n.depends_on.len() != 1 {
                    return fail("preprocess needs exactly one load or preprocess dependency".into());
                }
                if let Some(cols) = &p.columns {
                    if cols.is_empty() {
                        return fail("column selection is empty".into());
                    }
                }
            }
            NodeParams::Generate(p) => {
                if p.n_out == 0 {
                    return fail("n_out must be at least 1".into());
                }
                if gen_deps + other_deps > 0 || real_deps > 1 {
                    return fail("generate may depend on at most one load or preprocess node".into());
                }
                if p.method.needs_real() && real_deps == 0 {
                    return fail(format!("{:?} generation needs a real-data dependency", p.method.mode()).to_lowercase());
                }
                if real_deps == 0 && p.schema.is_none() {
                    return fail("generate without a real-data dependency needs a `schema`".into());
                }
                if let Some(schema) = &p.schema {
                    if let Err(e) = p.method.validate(schema) {
                        return fail(e.to_string());
                    }
                }
            }
            NodeParams::EvaluateDiagnostic(_) | NodeParams::EvaluateUtility(_) | NodeParams::EvaluatePrivacy(_) => {
                if real_deps != 1 || gen_deps != 1 || other_deps != 0 {
                    return fail("evaluate nodes need exactly one real-data and one generate dependency".into());
                }
                match &n.params {
                    NodeParams::EvaluateUtility(p) => {
                        if p.metrics.is_empty() {
                            return fail("no metrics selected".into());
                        }
                        if p.null.kind == NullKind::Permutation && p.null.permutations < crate::eval::utility::MIN_PERMUTATIONS {
                            return fail(format!(
                                "permutation null needs at least {} permutations",
                                crate::eval::utility::MIN_PERMUTATIONS
                            ));
                        }
                    }
                    NodeParams::EvaluatePrivacy(p) => {
                        if p.metrics.is_empty() {
                            return fail("no metrics selected".into());
                        }
                        let keyed = p.metrics.iter().any(|m| m.needs_keys());
                        if let Err(e) = p.config.validate_shape(keyed) {
                            return fail(e.to_string());
                        }
                    }
                    _ => {}
                }
            }
            NodeParams::Report(p) => {
                if n.depends_on.is_empty() || self.dep_kinds(n).any(|(_, k)| !k.is_evaluate()) {
                    return fail("report must depend on evaluate nodes only".into());
                }
                let available: HashSet<&str> = self.nodes.iter().flat_map(|m| m.params.metric_names()).collect();
                for (metric, bound) in &p.thresholds {
                    if !available.contains(metric.as_str()) {
                        return fail(format!("threshold for `{metric}`, which no evaluate node computes"));
                    }
                    if !bound.is_finite() {
                        return fail(format!("threshold for `{metric}` is not finite"));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_outputs(&self) -> Result<(), SpecError> {
        let mut seen = HashSet::new();
        for (index, o) in self.outputs.iter().enumerate() {
            let node = self
                .node(&o.node)
                .ok_or_else(|| SpecError::InvalidOutput { index, message: format!("unknown node `{}`", o.node) })?;
            if o.artifact != node.kind().artifact_name() {
                return Err(SpecError::InvalidOutput {
                    index,
                    message: format!("node `{}` produces `{}`, not `{}`", o.node, node.kind().artifact_name(), o.artifact),
                });
            }
            if !seen.insert((&o.node, &o.artifact)) {
                return Err(SpecError::InvalidOutput { index, message: "duplicate output".into() });
            }
        }
        Ok(())
    }
}

/// Node ids in execution order; ties broken lexicographically by id.
pub fn topological_order(spec: &PipelineSpec) -> Vec<String> {
    let dag = spec.graph();
    dag.topological_order()
        .expect("validated specs are acyclic")
        .into_iter()
        .map(|i| dag.name(i).to_string())
        .collect()
}

pub fn spec_digest(spec: &PipelineSpec) -> SpecDigest {
    let bytes = spec.to_canonical_bytes();
    SpecDigest { hash: canonical::sha256_hex(&bytes), canonical_bytes_len: bytes.len() }
}
