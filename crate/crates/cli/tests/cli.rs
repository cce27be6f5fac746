use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sdgflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdgflow")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn example_spec() -> PathBuf {
    repo().join("pipelines/rsd_example/spec.json")
}

fn spec_fixture(name: &str) -> PathBuf {
    repo().join("crates/core/tests/fixtures/specs").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Copy of the bundled example with its spec edited by `edit`.
fn edited_example(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let src = repo().join("pipelines/rsd_example");
    for f in ["real.csv", "schema.json"] {
        std::fs::copy(src.join(f), dir.join(f)).unwrap();
    }
    let mut doc: serde_json::Value = serde_json::from_slice(&std::fs::read(src.join("spec.json")).unwrap()).unwrap();
    edit(&mut doc);
    let path = dir.join("spec.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&doc).unwrap()).unwrap();
    path
}

#[test]
fn validate_exit_codes() {
    assert_eq!(code(&sdgflow(&["validate", s(&example_spec())])), 0);

    let cycle = sdgflow(&["validate", s(&spec_fixture("cycle.json"))]);
    assert_eq!(code(&cycle), 1);
    assert!(stdout(&cycle).contains("A -> B -> C -> A"), "{}", stdout(&cycle));

    let leak = sdgflow(&["validate", s(&spec_fixture("raw_export.json"))]);
    assert_eq!(code(&leak), 1);
    assert!(stdout(&leak).contains("input:real -> load -> outputs"), "{}", stdout(&leak));

    let tmp = tempfile::tempdir().unwrap();
    let broken = tmp.path().join("broken.json");
    std::fs::write(&broken, b"{\"version\": \"1\",\n  \"nodes\": [").unwrap();
    let syntax = sdgflow(&["validate", s(&broken)]);
    assert_eq!(code(&syntax), 2);
    assert!(stdout(&syntax).contains("line 2") || stderr(&syntax).contains("line 2"));
    assert_eq!(code(&sdgflow(&["validate", s(&tmp.path().join("absent.json"))])), 2);
}

#[test]
fn run_passes_and_inspect_verifies() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = sdgflow(&["run", s(&example_spec()), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("report: PASS"));
    for f in ["manifest.json", "spec.json", "report.json", "report.txt"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let i = sdgflow(&["inspect", s(&out)]);
    assert_eq!(code(&i), 0, "{}", stdout(&i));
    assert!(stdout(&i).contains("verification: PASS"));
}

#[test]
fn repeated_runs_share_dataset_hashes() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = |name: &str, p: &str| -> serde_json::Value {
        let out = tmp.path().join(name);
        assert_eq!(code(&sdgflow(&["run", s(&example_spec()), "--out", s(&out), "--max-parallel", p])), 0);
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap()
    };
    let (a, b) = (manifest("a", "4"), manifest("b", "1"));
    assert_eq!(a["node_records"].as_array().unwrap().len(), 7);
    for (ra, rb) in a["node_records"].as_array().unwrap().iter().zip(b["node_records"].as_array().unwrap()) {
        assert_eq!(ra["artifacts"], rb["artifacts"], "{}", ra["id"]);
    }
    assert_eq!(a["exports"], b["exports"]);
}

#[test]
fn impossible_threshold_fails_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = edited_example(tmp.path(), |doc| {
        doc["nodes"][6]["params"]["thresholds"]["min_nn_distance"] = 1.1.into();
    });
    let o = sdgflow(&["run", s(&spec), "--out", s(&tmp.path().join("run"))]);
    assert_eq!(code(&o), 1, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("report: FAIL"));
}

#[test]
fn node_failure_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = edited_example(tmp.path(), |doc| {
        doc["inputs"]["customers"]["path"] = "missing.csv".into();
    });
    let o = sdgflow(&["run", s(&spec), "--out", s(&tmp.path().join("run"))]);
    assert_eq!(code(&o), 2, "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn invalid_spec_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    for fixture in ["cycle.json", "raw_export.json"] {
        let o = sdgflow(&["run", s(&spec_fixture(fixture)), "--out", s(&tmp.path().join(fixture))]);
        assert_eq!(code(&o), 3, "{fixture}");
    }
}

#[test]
fn seed_flag_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    assert_eq!(code(&sdgflow(&["run", s(&example_spec()), "--out", s(&out), "--seed", "99"])), 0);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 99);
}

#[test]
fn inspect_detects_tampering_and_missing_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    assert_eq!(code(&sdgflow(&["run", s(&example_spec()), "--out", s(&out)])), 0);

    let synthetic = out.join("artifacts/synthesize/synthetic.csv");
    let mut bytes = std::fs::read(&synthetic).unwrap();
    let last = bytes.len() - 2;
    bytes[last] = if bytes[last] == b'1' { b'2' } else { b'1' };
    std::fs::write(&synthetic, &bytes).unwrap();
    let o = sdgflow(&["inspect", s(&out)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("artifacts/synthesize/synthetic.csv"), "{}", stdout(&o));

    std::fs::remove_file(out.join("manifest.json")).unwrap();
    assert_eq!(code(&sdgflow(&["inspect", s(&out)])), 2);
}

#[test]
fn bench_reports_every_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let o = sdgflow(&["bench", "--sizes", "1000,10000", "--out", s(tmp.path())]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("bench.json")).unwrap()).unwrap();
    let per_size = r["per_size"].as_array().unwrap();
    assert_eq!(per_size.len(), 2);
    for entry in per_size {
        let stages = entry["per_stage_seconds"].as_object().unwrap();
        for stage in ["load", "preprocess", "generate", "quality", "diagnostic", "privacy", "report"] {
            assert!(stages.contains_key(stage), "{stage}");
        }
    }
    assert!(tmp.path().join("bench.txt").is_file());
}

#[test]
fn bench_needs_two_sizes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&sdgflow(&["bench", "--sizes", "1000", "--out", s(tmp.path())])), 2);
}
