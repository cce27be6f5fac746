//! Node implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::eval::diagnostic::diagnose;
use crate::eval::privacy::evaluate_privacy;
use crate::eval::utility::evaluate_utility;
use crate::eval::{EvalArtifact, Provenance};
use crate::generators::generate;
use crate::report::{compile_report, EvaluationReport, RunIdentity};
use crate::spec::{NodeKind, NodeParams, PipelineNode, PipelineSpec, PreprocessParams};
use crate::tabular::{load_csv, Column, Dataset, Schema};

use super::rng::RngStream;

/// Value produced by a node and handed to its dependents.
#[derive(Debug, Clone)]
pub enum NodeValue {
    Dataset(Arc<Dataset>),
    Metrics(EvalArtifact),
    Report(EvaluationReport),
    /// Free-form payload, used by test executors.
    Json(serde_json::Value),
}

impl NodeValue {
    pub fn as_dataset(&self) -> Option<&Arc<Dataset>> {
        match self {
            NodeValue::Dataset(d) => Some(d),
            _ => None,
        }
    }
}

/// Everything a node may read.
pub struct NodeContext<'a> {
    pub spec: &'a PipelineSpec,
    pub node: &'a PipelineNode,
    /// Outputs of the node's dependencies, by node id.
    pub deps: BTreeMap<String, Arc<NodeValue>>,
    pub rng: RngStream,
    pub run: &'a RunIdentity,
    /// Directory that relative input paths are resolved against.
    pub base_dir: &'a Path,
}

impl NodeContext<'_> {
    fn dep_of(&self, pred: impl Fn(NodeKind) -> bool) -> Option<&Arc<NodeValue>> {
        self.node
            .depends_on
            .iter()
            .find(|d| self.spec.node(d).is_some_and(|n| pred(n.kind())))
            .and_then(|d| self.deps.get(d))
    }

    /// The real-data dependency (load or preprocess), if any.
    pub fn real(&self) -> Result<Option<Arc<Dataset>>, String> {
        match self.dep_of(NodeKind::yields_real_data) {
            None => Ok(None),
            Some(v) => v.as_dataset().cloned().map(Some).ok_or_else(|| "real-data dependency is not a dataset".into()),
        }
    }

    pub fn synthetic(&self) -> Result<Arc<Dataset>, String> {
        self.dep_of(|k| k == NodeKind::Generate)
            .and_then(|v| v.as_dataset().cloned())
            .ok_or_else(|| "missing synthetic dataset dependency".into())
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

pub struct NodeOutput {
    pub value: NodeValue,
    /// Lines for the node's log file.
    pub log: Vec<String>,
}

impl NodeOutput {
    pub fn new(value: NodeValue) -> Self {
        Self { value, log: Vec::new() }
    }
}

/// Runs one node. Implementations must be pure functions of the context.
pub trait Executor: Sync {
    fn execute(&self, ctx: &NodeContext<'_>) -> Result<NodeOutput, String>;
}

/// The built-in node semantics.
#[derive(Debug, Default, Clone, Copy)]
pub struct StandardExecutor;

impl Executor for StandardExecutor {
    fn execute(&self, ctx: &NodeContext<'_>) -> Result<NodeOutput, String> {
        match &ctx.node.params {
            NodeParams::Load(p) => {
                let input = ctx.spec.inputs.get(&p.input).ok_or_else(|| format!("unknown input `{}`", p.input))?;
                let schema_path = ctx.resolve(&input.schema);
                let data_path = ctx.resolve(&input.path);
                let schema = Schema::from_file(&schema_path).map_err(|e| format!("{}: {e}", schema_path.display()))?;
                let ds = load_csv(&data_path, &schema, p.missing_policy).map_err(|e| format!("{}: {e}", data_path.display()))?;
                let mut out = NodeOutput::new(NodeValue::Dataset(Arc::new(ds.clone())));
                out.log.push(format!("loaded {} rows x {} columns from {}", ds.n_rows(), ds.n_cols(), input.path));
                Ok(out)
            }
            NodeParams::Preprocess(p) => {
                let real = ctx.real()?.ok_or("missing input dataset")?;
                let (ds, log) = preprocess(&real, p).map_err(|e| e.to_string())?;
                Ok(NodeOutput { value: NodeValue::Dataset(Arc::new(ds)), log })
            }
            NodeParams::Generate(p) => {
                let real = ctx.real()?;
                let schema = match (&p.schema, &real) {
                    (Some(s), _) => s.clone(),
                    (None, Some(r)) => r.schema().clone(),
                    (None, None) => return Err("no schema for generation".into()),
                };
                let mut rng = ctx.rng.clone();
                let g = generate(&p.config(), real.as_deref(), &schema, &mut rng).map_err(|e| e.to_string())?;
                let mut log = vec![format!("generated {} rows ({:?})", g.dataset.n_rows(), p.method.mode())];
                log.extend(g.notes.iter().map(|n| format!("note: {n}")));
                Ok(NodeOutput { value: NodeValue::Dataset(Arc::new(g.dataset)), log })
            }
            NodeParams::EvaluateDiagnostic(_) => {
                let (real, synth) = (ctx.real()?.ok_or("missing real dataset")?, ctx.synthetic()?);
                let d = diagnose(&real, &synth);
                let artifact =
                    EvalArtifact { provenance: Provenance::Diagnostic, metrics: vec![d.to_metric()], diagnostic: Some(d) };
                Ok(NodeOutput::new(NodeValue::Metrics(artifact)))
            }
            NodeParams::EvaluateUtility(p) => {
                let (real, synth) = (ctx.real()?.ok_or("missing real dataset")?, ctx.synthetic()?);
                let metrics = evaluate_utility(&real, &synth, &p.metrics, p.null, &ctx.rng).map_err(|e| e.to_string())?;
                Ok(NodeOutput::new(NodeValue::Metrics(EvalArtifact { provenance: Provenance::Utility, diagnostic: None, metrics })))
            }
            NodeParams::EvaluatePrivacy(p) => {
                let (real, synth) = (ctx.real()?.ok_or("missing real dataset")?, ctx.synthetic()?);
                let metrics = evaluate_privacy(&real, &synth, &p.metrics, &p.config, &ctx.rng).map_err(|e| e.to_string())?;
                Ok(NodeOutput::new(NodeValue::Metrics(EvalArtifact { provenance: Provenance::Privacy, diagnostic: None, metrics })))
            }
            NodeParams::Report(p) => {
                let mut artifacts = BTreeMap::new();
                for (id, v) in &ctx.deps {
                    if let NodeValue::Metrics(a) = v.as_ref() {
                        artifacts.insert(id.clone(), a.clone());
                    }
                }
                let report = compile_report(ctx.run.clone(), &ctx.node.depends_on, &artifacts, &p.thresholds)
                    .map_err(|e| e.to_string())?;
                let log = vec![format!("verdict: {}", if report.passed() { "pass" } else { "fail" })];
                Ok(NodeOutput { value: NodeValue::Report(report), log })
            }
        }
    }
}

/// Column selection, clamping to schema bounds and duplicate removal
/// (first occurrence kept), in that order.
pub fn preprocess(ds: &Dataset, p: &PreprocessParams) -> Result<(Dataset, Vec<String>), crate::tabular::TabularError> {
    let mut log = Vec::new();
    let mut ds = match &p.columns {
        Some(cols) => ds.select(cols)?,
        None => ds.clone(),
    };
    if p.clip_to_bounds {
        let mut clipped = 0usize;
        let columns: Vec<Column> = ds
            .columns()
            .iter()
            .zip(ds.schema().columns())
            .map(|(c, spec)| match (c, spec.bounds) {
                (Column::Continuous(v), Some((lo, hi))) => Column::Continuous(
                    v.iter()
                        .map(|&x| {
                            let y = x.clamp(lo, hi);
                            clipped += usize::from(y != x);
                            y
                        })
                        .collect(),
                ),
                _ => c.clone(),
            })
            .collect();
        ds = Dataset::new(ds.schema().clone(), columns)?;
        log.push(format!("clipped {clipped} values to schema bounds"));
    }
    if p.drop_duplicates {
        let mut seen = std::collections::HashSet::new();
        let keep: Vec<usize> = (0..ds.n_rows()).filter(|&i| seen.insert(ds.row(i))).collect();
        log.push(format!("dropped {} duplicate rows", ds.n_rows() - keep.len()));
        ds = ds.take_rows(&keep);
    }
    if ds.is_empty() {
        return Err(crate::tabular::TabularError::Empty);
    }
    log.push(format!("{} rows x {} columns after preprocessing", ds.n_rows(), ds.n_cols()));
    Ok((ds, log))
}
