use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sdgflow_core::engine::{self, verify_manifest, EngineError, NodeStatus, RunOptions, RunOutcome, VerifyError};
use sdgflow_core::spec::parse_spec;
use sdgflow_core::PipelineSpec;
use sha2::{Digest, Sha256};

fn example_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../pipelines/rsd_example")
}

fn example() -> PipelineSpec {
    parse_spec(&std::fs::read(example_dir().join("spec.json")).unwrap()).unwrap()
}

fn run_in(out: &Path, p: usize, seed: Option<u64>) -> RunOutcome {
    engine::run(&example(), &RunOptions::new(out, example_dir()).max_parallel(p).seed(seed)).unwrap()
}

/// Artifact hash per (node, artifact name).
fn hashes(o: &RunOutcome) -> BTreeMap<(String, String), String> {
    o.manifest
        .node_records
        .iter()
        .flat_map(|r| r.artifacts.iter().map(move |a| ((r.id.clone(), a.name.clone()), a.sha256.clone())))
        .collect()
}

fn file_sha256(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

#[test]
fn example_is_reproducible_across_parallelism() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_in(&tmp.path().join("p4"), 4, None);
    let b = run_in(&tmp.path().join("p1"), 1, None);
    assert!(a.succeeded() && a.report_passed());
    assert_eq!(hashes(&a), hashes(&b));
    assert_eq!(a.report, b.report);
    for f in ["report.json", "report.txt", "spec.json"] {
        assert_eq!(file_sha256(&tmp.path().join("p4").join(f)), file_sha256(&tmp.path().join("p1").join(f)));
    }
    assert_eq!(a.manifest.spec_digest.hash, "259e93531139a7fe9404c29e6c5d0a962a0c917e36ff4e973e13965d1e2660f2");
    assert_eq!(a.manifest.seed, 42);
}

#[test]
fn manifest_hashes_match_files_and_inspect_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = run_in(&out, 4, None);
    for r in &o.manifest.node_records {
        assert_eq!(r.status, NodeStatus::Succeeded, "{}", r.id);
        let (start, end) = (r.start_ms.unwrap(), r.end_ms.unwrap());
        assert!(start <= end);
        for a in &r.artifacts {
            assert_eq!(file_sha256(&out.join(&a.path)), a.sha256, "{}", a.path);
        }
    }
    let exported: Vec<&str> = o.manifest.exports.iter().map(|a| a.name.as_str()).collect();
    assert_eq!(exported, ["synthetic", "report"]);
    assert!(verify_manifest(&out).unwrap().passed());
}

#[test]
fn tampering_any_artifact_fails_inspection() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = run_in(&out, 2, None);
    let mut paths: Vec<String> =
        o.manifest.node_records.iter().flat_map(|r| r.artifacts.iter().map(|a| a.path.clone())).collect();
    paths.extend(o.manifest.files.iter().map(|a| a.path.clone()));
    for path in paths {
        let file = out.join(&path);
        let original = std::fs::read(&file).unwrap();
        let mut changed = original.clone();
        changed.push(b' ');
        std::fs::write(&file, &changed).unwrap();
        let v = verify_manifest(&out);
        let failed = match &v {
            Ok(v) => !v.passed(),
            Err(VerifyError::Corrupt { .. }) => true,
            Err(e) => panic!("{path}: unexpected {e}"),
        };
        assert!(failed, "tampering {path} went unnoticed");
        std::fs::write(&file, &original).unwrap();
    }
    assert!(verify_manifest(&out).unwrap().passed());
}

#[test]
fn seed_override_changes_data_not_digest() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_in(&tmp.path().join("a"), 4, None);
    let b = run_in(&tmp.path().join("b"), 4, Some(7));
    assert_eq!(b.manifest.seed, 7);
    assert_eq!(a.manifest.spec_digest, b.manifest.spec_digest);
    let key = ("synthesize".to_string(), "synthetic".to_string());
    assert_ne!(hashes(&a)[&key], hashes(&b)[&key]);
    assert!(verify_manifest(tmp.path().join("b")).unwrap().passed());
}

#[test]
fn refuses_a_used_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("stale.txt"), b"x").unwrap();
    let err = engine::run(&example(), &RunOptions::new(tmp.path(), example_dir())).unwrap_err();
    assert!(matches!(err, EngineError::OutDirNotEmpty(_)));
}

#[test]
fn missing_manifest_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(matches!(verify_manifest(tmp.path()), Err(VerifyError::ManifestMissing(_))));
}
