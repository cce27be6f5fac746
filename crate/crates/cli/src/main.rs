use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use sdgflow_core::bench::{render_table, run_bench};
use sdgflow_core::engine::{self, verify_manifest, NodeStatus, RunOptions};
use sdgflow_core::spec::{data_flow_audit, parse_spec, spec_digest, PipelineSpec, SpecError};

#[derive(Parser)]
#[command(name = "sdgflow", version, about = "Validate, run, inspect and benchmark synthetic data pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate and audit a spec. Exit 0 valid, 1 findings, 2 unreadable or malformed.
    Validate { spec: PathBuf },
    /// Execute a spec. Exit 0 pass, 1 report fail, 2 node or I/O failure, 3 invalid spec.
    Run {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 4)]
        max_parallel: usize,
    },
    /// Time the standard pipeline on seeded fixtures. Exit 0 ok, 2 failure.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_parallel: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify a run directory. Exit 0 pass, 1 verification failure, 2 missing or corrupt files.
    Inspect { run_dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { spec } => validate(&spec),
        Command::Run { spec, out, seed, max_parallel } => run(&spec, &out, seed, max_parallel),
        Command::Bench { sizes, out, max_parallel, seed } => bench(&sizes, &out, max_parallel, seed),
        Command::Inspect { run_dir } => inspect(&run_dir),
    };
    ExitCode::from(code)
}

enum Loaded {
    Ok(PipelineSpec),
    /// I/O or syntax problem.
    Unreadable(String),
    /// Well-formed JSON that fails validation or audit.
    Findings(Vec<String>),
}

fn load(path: &Path) -> Loaded {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => return Loaded::Unreadable(format!("{}: {e}", path.display())),
    };
    let spec = match parse_spec(&bytes) {
        Ok(s) => s,
        Err(e @ SpecError::Syntax { .. }) => return Loaded::Unreadable(format!("{}: {e}", path.display())),
        Err(e) => return Loaded::Findings(vec![format!("{}: {e}", path.display())]),
    };
    let audit = data_flow_audit(&spec);
    if !audit.passed {
        return Loaded::Findings(
            audit
                .violations
                .iter()
                .map(|v| format!("{}: leak: output {}/{}: {} ({})", path.display(), v.output.node, v.output.artifact, v.path.join(" -> "), v.reason))
                .collect(),
        );
    }
    Loaded::Ok(spec)
}

fn validate(path: &Path) -> u8 {
    match load(path) {
        Loaded::Ok(spec) => {
            println!("ok: {} nodes, spec sha256 {}", spec.nodes.len(), spec_digest(&spec).hash);
            0
        }
        Loaded::Findings(f) => {
            f.iter().for_each(|l| println!("{l}"));
            1
        }
        Loaded::Unreadable(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn run(path: &Path, out: &Path, seed: Option<u64>, max_parallel: usize) -> u8 {
    let spec = match load(path) {
        Loaded::Ok(s) => s,
        Loaded::Findings(f) => {
            f.iter().for_each(|l| eprintln!("{l}"));
            return 3;
        }
        Loaded::Unreadable(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let opts = RunOptions::new(out, base).max_parallel(max_parallel).seed(seed);
    let outcome = match engine::run(&spec, &opts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    for r in &outcome.manifest.node_records {
        let status = match r.status {
            NodeStatus::Succeeded => "ok",
            NodeStatus::Failed => "FAILED",
            NodeStatus::Skipped => "skipped",
        };
        let time = r.duration_seconds.map(|d| format!(" {d:.3}s")).unwrap_or_default();
        println!("{:<24} {:<20} {status}{time}", r.id, r.kind.as_str());
        if let (NodeStatus::Failed, Some(e)) = (r.status, &r.error) {
            println!("    {e}");
        }
    }
    if !outcome.succeeded() {
        println!("run failed; see {}", out.join("logs").display());
        return 2;
    }
    let passed = outcome.report_passed();
    println!("report: {}", if passed { "PASS" } else { "FAIL" });
    if passed {
        0
    } else {
        1
    }
}

fn bench(sizes: &[usize], out: &Path, max_parallel: usize, seed: u64) -> u8 {
    let result = std::fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .and_then(|_| run_bench(sizes, out, max_parallel, seed).context("benchmark failed"));
    match result {
        Ok(r) => {
            print!("{}", render_table(&r));
            0
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn inspect(dir: &Path) -> u8 {
    match verify_manifest(dir) {
        Ok(v) => {
            for c in &v.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                if c.detail.is_empty() {
                    println!("{mark} {}", c.name);
                } else {
                    println!("{mark} {}: {}", c.name, c.detail);
                }
            }
            println!("verification: {}", if v.passed() { "PASS" } else { "FAIL" });
            if v.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
