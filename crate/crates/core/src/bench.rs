//! Benchmark harness: a seeded fixture dataset and the standard pipeline
//! (load, preprocess, RSD generation, three parallel evaluations, report)
//! timed per stage across dataset sizes.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::canonical::to_canonical_bytes;
use crate::engine::{self, rng::derive_stream, EngineError, NodeStatus, RunOptions};
use crate::spec::{parse_spec, PipelineSpec, SpecError};
use crate::tabular::{write_csv, Column, ColumnSpec, Dataset, Schema, TabularError};

/// Stage (node id) names of the standard pipeline, in pipeline order.
pub const STAGES: [&str; 7] = ["load", "preprocess", "generate", "quality", "diagnostic", "privacy", "report"];

/// Seed of the bench fixture data; fixed so fixtures are identical across runs.
pub const FIXTURE_SEED: u64 = 20_240_917;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("need at least two sizes, each at least 10 rows")]
    BadSizes,
    #[error("size {size}: node `{node}` failed: {message}")]
    NodeFailure { size: usize, node: String, message: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Tabular(#[from] TabularError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Six columns: three continuous, three categorical with 4, 6 and 8 levels.
pub fn fixture_schema() -> Schema {
    let labels = |prefix: &str, k: usize| (0..k).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
    Schema::new(vec![
        ColumnSpec::continuous("income"),
        ColumnSpec::continuous("age"),
        ColumnSpec::continuous("score"),
        ColumnSpec::categorical("region", labels("r", 4)),
        ColumnSpec::categorical("segment", labels("s", 6)),
        ColumnSpec::categorical("outcome", labels("o", 8)),
    ])
    .expect("fixture schema is valid")
}

fn bucket(x: f64, k: usize) -> u32 {
    // Standard normal through its CDF, then into k equal-probability bins.
    let u = 0.5 * (1.0 + statrs::function::erf::erf(x / std::f64::consts::SQRT_2));
    ((u * k as f64) as usize).min(k - 1) as u32
}

/// Deterministic mixed-type dataset with correlated columns.
pub fn fixture_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = derive_stream(seed, "bench/fixture");
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
    let (mut income, mut age, mut score) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut region, mut segment, mut outcome) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let latent = z();
        let a = 0.6 * latent + 0.8 * z();
        let b = 0.5 * latent - 0.5 * a + 0.7 * z();
        income.push((10.5 + 0.4 * latent).exp());
        age.push(45.0 + 12.0 * a);
        score.push(b);
        region.push(bucket(0.7 * latent + 0.71 * z(), 4));
        segment.push(bucket(0.5 * a + 0.87 * z(), 6));
        outcome.push(bucket(0.6 * b + 0.4 * latent + 0.69 * z(), 8));
    }
    Dataset::new(
        fixture_schema(),
        vec![
            Column::Continuous(income),
            Column::Continuous(age),
            Column::Continuous(score),
            Column::Categorical(region),
            Column::Categorical(segment),
            Column::Categorical(outcome),
        ],
    )
    .expect("fixture columns match schema")
}

/// The standard pipeline over `real.csv` / `schema.json` next to the pipeline spec.
pub fn standard_spec(n_out: usize, seed: u64) -> PipelineSpec {
    let doc = json!({
        "version": "1",
        "metadata": {"name": "standard benchmark pipeline"},
        "inputs": {"real": {"path": "real.csv", "schema": "schema.json"}},
        "seed": seed,
        "nodes": [
            {"id": "load", "kind": "load", "params": {"input": "real"}},
            {"id": "preprocess", "kind": "preprocess", "depends_on": ["load"], "params": {"clip_to_bounds": true}},
            {"id": "generate", "kind": "generate", "depends_on": ["preprocess"],
             "params": {"n_out": n_out, "method": {"rsd": {}}}},
            {"id": "quality", "kind": "evaluate_utility", "depends_on": ["preprocess", "generate"]},
            {"id": "diagnostic", "kind": "evaluate_diagnostic", "depends_on": ["preprocess", "generate"]},
            {"id": "privacy", "kind": "evaluate_privacy", "depends_on": ["preprocess", "generate"],
             "params": {"config": {"key_columns": ["region", "segment"], "sensitive_column": "outcome"}}},
            {"id": "report", "kind": "report", "depends_on": ["quality", "diagnostic", "privacy"],
             "params": {"thresholds": {"diagnostic_overall": 0.9}}}
        ],
        "outputs": [{"node": "generate", "artifact": "synthetic"}, {"node": "report", "artifact": "report"}]
    });
    parse_spec(&serde_json::to_vec(&doc).expect("json")).expect("standard spec is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeResult {
    pub size: usize,
    pub per_stage_seconds: BTreeMap<String, f64>,
    pub total_wall_seconds: f64,
    pub serialized_stage_sum_seconds: f64,
    /// Wall time not covered by the span from first node start to last node end.
    pub scheduling_overhead_seconds: f64,
}

impl SizeResult {
    pub fn stage(&self, name: &str) -> f64 {
        self.per_stage_seconds.get(name).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchResult {
    pub sizes: Vec<usize>,
    pub max_parallel: usize,
    pub parallel_kernels: bool,
    pub per_size: Vec<SizeResult>,
}

impl BenchResult {
    pub fn size(&self, n: usize) -> Option<&SizeResult> {
        self.per_size.iter().find(|s| s.size == n)
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.to_path_buf(), source }
}

/// Runs the standard pipeline once per size under `out`. Writes
/// `bench.json` and `bench.txt` there.
pub fn run_bench(sizes: &[usize], out: &Path, max_parallel: usize, seed: u64) -> Result<BenchResult, BenchError> {
    if sizes.len() < 2 || sizes.iter().any(|&s| s < 10) {
        return Err(BenchError::BadSizes);
    }
    let mut per_size = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let case = out.join(format!("n{size}"));
        std::fs::create_dir_all(&case).map_err(io(&case))?;
        write_csv(&fixture_dataset(size, FIXTURE_SEED), case.join("real.csv"))?;
        let schema_path = case.join("schema.json");
        std::fs::write(&schema_path, serde_json::to_vec_pretty(&fixture_schema()).expect("json")).map_err(io(&schema_path))?;
        let spec = standard_spec(size, seed);
        let spec_path = case.join("spec.json");
        std::fs::write(&spec_path, spec.to_canonical_bytes()).map_err(io(&spec_path))?;

        let opts = RunOptions::new(case.join("run"), &case).max_parallel(max_parallel);
        let t = Instant::now();
        let outcome = engine::run(&spec, &opts)?;
        let total_wall_seconds = t.elapsed().as_secs_f64();
        if let Some(f) = outcome.manifest.failures().next() {
            return Err(BenchError::NodeFailure {
                size,
                node: f.id.clone(),
                message: f.error.clone().unwrap_or_default(),
            });
        }
        let records = &outcome.manifest.node_records;
        debug_assert!(records.iter().all(|r| r.status == NodeStatus::Succeeded));
        let per_stage_seconds: BTreeMap<String, f64> =
            records.iter().map(|r| (r.id.clone(), r.duration_seconds.unwrap_or(0.0))).collect();
        let serialized_stage_sum_seconds = STAGES.iter().map(|s| per_stage_seconds.get(*s).copied().unwrap_or(0.0)).sum();
        let first = records.iter().filter_map(|r| r.start_ms).min().unwrap_or(0);
        let last = records.iter().filter_map(|r| r.end_ms).max().unwrap_or(0);
        let span = (last - first) as f64 / 1000.0;
        per_size.push(SizeResult {
            size,
            per_stage_seconds,
            total_wall_seconds,
            serialized_stage_sum_seconds,
            scheduling_overhead_seconds: (total_wall_seconds - span).max(0.0),
        });
    }
    let result = BenchResult { sizes: sizes.to_vec(), max_parallel, parallel_kernels: crate::par::is_parallel(), per_size };
    let json_path = out.join("bench.json");
    std::fs::write(&json_path, to_canonical_bytes(&result).expect("json")).map_err(io(&json_path))?;
    let txt_path = out.join("bench.txt");
    std::fs::write(&txt_path, render_table(&result)).map_err(io(&txt_path))?;
    Ok(result)
}

/// Fixed-width table: one row per size, one column per stage.
pub fn render_table(r: &BenchResult) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:>8}", "rows");
    for st in STAGES {
        let _ = write!(s, " {st:>10}");
    }
    let _ = writeln!(s, " {:>10} {:>10}", "stage_sum", "wall");
    for z in &r.per_size {
        let _ = write!(s, "{:>8}", z.size);
        for st in STAGES {
            let _ = write!(s, " {:>10.3}", z.stage(st));
        }
        let _ = writeln!(s, " {:>10.3} {:>10.3}", z.serialized_stage_sum_seconds, z.total_wall_seconds);
    }
    let _ = writeln!(s, "seconds; max_parallel={}, parallel kernels={}", r.max_parallel, r.parallel_kernels);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_is_seeded() {
        let a = fixture_dataset(500, FIXTURE_SEED);
        assert_eq!(a, fixture_dataset(500, FIXTURE_SEED));
        assert_ne!(a, fixture_dataset(500, FIXTURE_SEED + 1));
        for (j, k) in [(3, 4), (4, 6), (5, 8)] {
            let codes = a.column(j).as_categorical().unwrap();
            let mut seen = vec![false; k];
            codes.iter().for_each(|&c| seen[c as usize] = true);
            assert!(seen.iter().all(|&s| s), "column {j} misses a level");
        }
    }

    #[test]
    fn standard_spec_has_all_stages() {
        let spec = standard_spec(100, 1);
        let ids: Vec<&str> = spec.nodes.iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, STAGES);
    }

    #[test]
    fn rejects_single_size() {
        assert!(matches!(run_bench(&[100], Path::new("/nonexistent"), 1, 1), Err(BenchError::BadSizes)));
    }
}
