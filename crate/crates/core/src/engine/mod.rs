//! In-process DAG execution with bounded parallelism and an auditable run
//! directory:
//!
//! ```text
//! <out>/manifest.json
//! <out>/spec.json                      canonical copy of the pipeline spec as written
//! <out>/report.json, <out>/report.txt
//! <out>/artifacts/<node_id>/<artifact>.(csv|json)
//! <out>/logs/<node_id>.log
//! ```

mod executor;
mod manifest;
pub mod rng;
mod verify;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::{mpsc, Arc};
use std::time::Instant;

use chrono::{SecondsFormat, Utc};
use thiserror::Error;

use crate::canonical::{sha256_hex, to_canonical_bytes};
use crate::report::{render_text, EvaluationReport, RunIdentity};
use crate::spec::{spec_digest, PipelineSpec};
use crate::tabular::to_csv_bytes;

pub use executor::{preprocess, Executor, NodeContext, NodeOutput, NodeValue, StandardExecutor};
pub use manifest::{ArtifactKind, ArtifactRecord, NodeRecord, NodeStatus, RunManifest};
pub use verify::{verify_manifest, Check, Verification, VerifyError};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SPEC_FILE: &str = "spec.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TEXT: &str = "report.txt";

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("output directory {0} is not empty")]
    OutDirNotEmpty(PathBuf),
    #[error("max_parallel must be at least 1")]
    InvalidParallelism,
    #[error("spec is invalid: {0}")]
    InvalidSpec(#[from] crate::spec::SpecError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EngineError + '_ {
    move |source| EngineError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub max_parallel: usize,
    /// Overrides the pipeline spec's seed when set.
    pub seed: Option<u64>,
    /// Directory that relative input paths are resolved against, normally
    /// the pipeline spec document's directory.
    pub base_dir: PathBuf,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>, base_dir: impl Into<PathBuf>) -> Self {
        Self { out_dir: out_dir.into(), max_parallel: 1, seed: None, base_dir: base_dir.into() }
    }

    pub fn max_parallel(mut self, p: usize) -> Self {
        self.max_parallel = p;
        self
    }

    pub fn seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub report: Option<EvaluationReport>,
}

impl RunOutcome {
    pub fn succeeded(&self) -> bool {
        self.manifest.succeeded()
    }

    pub fn report_passed(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.passed())
    }
}

pub fn run(spec: &PipelineSpec, opts: &RunOptions) -> Result<RunOutcome, EngineError> {
    run_with(spec, opts, &StandardExecutor)
}

struct Done {
    index: usize,
    start_ms: u64,
    end_ms: u64,
    result: Result<(Arc<NodeValue>, Vec<ArtifactRecord>), String>,
}

/// Executes `spec` with a custom executor. Node failures are recorded in
/// the manifest, not returned as errors.
pub fn run_with(spec: &PipelineSpec, opts: &RunOptions, executor: &dyn Executor) -> Result<RunOutcome, EngineError> {
    spec.validate()?;
    if opts.max_parallel == 0 {
        return Err(EngineError::InvalidParallelism);
    }
    let out = opts.out_dir.as_path();
    prepare_out_dir(out)?;

    let digest = spec_digest(spec);
    let seed = opts.seed.unwrap_or(spec.seed);
    let identity = RunIdentity { spec_digest: digest.clone(), seed };
    let started_at = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
    let t0 = Instant::now();
    let elapsed_ms = || t0.elapsed().as_millis() as u64;

    let dag = spec.graph();
    let n = dag.len();
    let order = dag.topological_order().expect("validated");
    let mut pending: Vec<usize> = (0..n).map(|i| dag.parents(i).len()).collect();
    let mut ready: BTreeSet<(&str, usize)> = (0..n).filter(|&i| pending[i] == 0).map(|i| (dag.name(i), i)).collect();
    let mut values: Vec<Option<Arc<NodeValue>>> = vec![None; n];
    let mut records: Vec<Option<NodeRecord>> = vec![None; n];
    let mut blocked_by: Vec<Option<String>> = vec![None; n];

    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<Done>();
        let mut running = 0usize;
        loop {
            while running < opts.max_parallel {
                let Some((_, i)) = ready.pop_first() else { break };
                let node = &spec.nodes[i];
                let deps: BTreeMap<String, Arc<NodeValue>> = dag
                    .parents(i)
                    .iter()
                    .map(|&p| (spec.nodes[p].id.clone(), values[p].clone().expect("parent finished")))
                    .collect();
                let tx = tx.clone();
                let identity = &identity;
                let elapsed_ms = &elapsed_ms;
                scope.spawn(move || {
                    let start_ms = elapsed_ms();
                    let ctx = NodeContext {
                        spec,
                        node,
                        deps,
                        rng: rng::derive_stream(seed, &node.id),
                        run: identity,
                        base_dir: &opts.base_dir,
                    };
                    let result = catch_unwind(AssertUnwindSafe(|| executor.execute(&ctx)))
                        .unwrap_or_else(|p| Err(format!("node panicked: {}", panic_message(&p))));
                    drop(ctx);
                    let result = result.and_then(|o| {
                        let artifacts = write_node_output(out, node, &o.value).map_err(|e| e.to_string())?;
                        write_log(out, &node.id, &o.log, "succeeded").map_err(|e| e.to_string())?;
                        Ok((Arc::new(o.value), artifacts))
                    });
                    if let Err(e) = &result {
                        let _ = write_log(out, &node.id, &[format!("error: {e}")], "failed");
                    }
                    let end_ms = elapsed_ms();
                    let _ = tx.send(Done { index: i, start_ms, end_ms, result });
                });
                running += 1;
            }
            if running == 0 {
                break;
            }
            let done = rx.recv().expect("workers hold a sender");
            running -= 1;
            let i = done.index;
            let mut record = NodeRecord {
                id: spec.nodes[i].id.clone(),
                kind: spec.nodes[i].kind(),
                status: NodeStatus::Succeeded,
                start_ms: Some(done.start_ms),
                end_ms: Some(done.end_ms),
                duration_seconds: Some((done.end_ms - done.start_ms) as f64 / 1000.0),
                artifacts: Vec::new(),
                error: None,
            };
            match done.result {
                Ok((value, artifacts)) => {
                    record.artifacts = artifacts;
                    values[i] = Some(value);
                    for &c in dag.children(i) {
                        pending[c] -= 1;
                        if pending[c] == 0 && blocked_by[c].is_none() {
                            ready.insert((dag.name(c), c));
                        }
                    }
                }
                Err(e) => {
                    record.status = NodeStatus::Failed;
                    record.error = Some(e);
                    for (d, is_desc) in dag.descendants(i).into_iter().enumerate() {
                        if is_desc && blocked_by[d].is_none() {
                            blocked_by[d] = Some(spec.nodes[i].id.clone());
                        }
                    }
                }
            }
            records[i] = Some(record);
        }
    });

    let mut node_records = Vec::with_capacity(n);
    for &i in &order {
        let record = match records[i].take() {
            Some(r) => r,
            None => {
                let cause = blocked_by[i].clone().unwrap_or_default();
                write_log(out, &spec.nodes[i].id, &[format!("upstream node `{cause}` failed")], "skipped")
                    .map_err(io_err(out))?;
                NodeRecord {
                    id: spec.nodes[i].id.clone(),
                    kind: spec.nodes[i].kind(),
                    status: NodeStatus::Skipped,
                    start_ms: None,
                    end_ms: None,
                    duration_seconds: None,
                    artifacts: Vec::new(),
                    error: Some(format!("skipped: upstream node `{cause}` failed")),
                }
            }
        };
        node_records.push(record);
    }

    let mut files = vec![write_file(out, SPEC_FILE, ArtifactKind::Json, &spec.to_canonical_bytes())?];
    let report = spec.report_node().and_then(|r| match values[spec.node_index(&r.id).unwrap()].as_deref() {
        Some(NodeValue::Report(rep)) => Some(rep.clone()),
        _ => None,
    });
    if let Some(rep) = &report {
        let json = to_canonical_bytes(rep).expect("report serializes");
        files.push(write_file(out, REPORT_JSON, ArtifactKind::Report, &json)?);
        files.push(write_file(out, REPORT_TEXT, ArtifactKind::Text, render_text(rep).as_bytes())?);
    }
    let exports = spec
        .outputs
        .iter()
        .filter_map(|o| node_records.iter().find(|r| r.id == o.node)?.artifacts.iter().find(|a| a.name == o.artifact).cloned())
        .collect();

    let manifest = RunManifest {
        spec_digest: digest,
        seed,
        started_at,
        finished_at: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
        engine_version: crate::ENGINE_VERSION.to_string(),
        max_parallel: opts.max_parallel,
        parallel_kernels: crate::par::is_parallel(),
        node_records,
        files,
        exports,
    };
    let bytes = to_canonical_bytes(&manifest).expect("manifest serializes");
    let path = out.join(MANIFEST_FILE);
    std::fs::write(&path, bytes).map_err(io_err(&path))?;
    Ok(RunOutcome { manifest, report })
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

fn prepare_out_dir(out: &Path) -> Result<(), EngineError> {
    if out.exists() {
        let mut entries = std::fs::read_dir(out).map_err(io_err(out))?;
        if entries.next().is_some() {
            return Err(EngineError::OutDirNotEmpty(out.to_path_buf()));
        }
    }
    for sub in ["artifacts", "logs"] {
        let p = out.join(sub);
        std::fs::create_dir_all(&p).map_err(io_err(&p))?;
    }
    Ok(())
}

fn write_file(out: &Path, rel: &str, kind: ArtifactKind, bytes: &[u8]) -> Result<ArtifactRecord, EngineError> {
    let path = out.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    std::fs::write(&path, bytes).map_err(io_err(&path))?;
    let name = Path::new(rel).file_stem().and_then(|s| s.to_str()).unwrap_or(rel).to_string();
    Ok(ArtifactRecord { name, kind, path: rel.to_string(), sha256: sha256_hex(bytes) })
}

fn write_node_output(out: &Path, node: &crate::spec::PipelineNode, value: &NodeValue) -> Result<Vec<ArtifactRecord>, EngineError> {
    let name = node.kind().artifact_name();
    let (ext, kind, bytes) = match value {
        NodeValue::Dataset(d) => (
            "csv",
            ArtifactKind::Dataset,
            to_csv_bytes(d).map_err(|e| EngineError::Io { path: out.join(&node.id), source: std::io::Error::other(e) })?,
        ),
        NodeValue::Metrics(m) => ("json", ArtifactKind::MetricResults, to_canonical_bytes(m).expect("serializable")),
        NodeValue::Report(r) => ("json", ArtifactKind::Report, to_canonical_bytes(r).expect("serializable")),
        NodeValue::Json(v) => ("json", ArtifactKind::Json, to_canonical_bytes(v).expect("serializable")),
    };
    let rel = format!("artifacts/{}/{name}.{ext}", node.id);
    Ok(vec![write_file(out, &rel, kind, &bytes)?])
}

fn write_log(out: &Path, id: &str, lines: &[String], status: &str) -> std::io::Result<()> {
    let mut text = String::new();
    for l in lines {
        text.push_str(l);
        text.push('\n');
    }
    text.push_str(&format!("status: {status}\n"));
    std::fs::write(out.join("logs").join(format!("{id}.log")), text)
}
