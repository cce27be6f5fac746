//! Offline synthetic tabular data pipelines.
//!
//! A pipeline is a declarative JSON document ([`spec::PipelineSpec`]) that
//! names the real inputs, the generator, the evaluations to run and the
//! artifacts that may leave the owner's environment. The [`engine`] executes
//! it as a DAG on the local machine and writes an auditable run directory.

pub mod bench;
pub mod canonical;
pub mod engine;
pub mod eval;
pub mod generators;
pub mod par;
pub mod report;
pub mod spec;
pub mod tabular;

pub use engine::rng::{derive_stream, RngStream};
pub use spec::PipelineSpec;
pub use tabular::{Cell, Column, ColumnKind, ColumnSpec, Dataset, Schema};

/// Version string recorded in every run manifest.
pub const ENGINE_VERSION: &str = concat!("sdgflow/", env!("CARGO_PKG_VERSION"));
