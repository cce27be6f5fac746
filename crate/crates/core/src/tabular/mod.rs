//! Immutable typed tables: schema, dataset, CSV I/O, encoding and Gower distance.

mod csv_io;
mod dataset;
mod encode;
mod gower;
mod schema;

pub use csv_io::{load_csv, read_csv, to_csv_bytes, write_csv, MissingPolicy};
pub use dataset::{Cell, Column, Dataset};
pub use encode::{encode, EncodedColumn, EncodedLevel, EncodedMatrix};
pub use gower::{gower_distance, ColumnRanges};
pub use schema::{ColumnKind, ColumnSpec, Schema};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TabularError {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("header mismatch: expected [{expected}], found [{found}]")]
    HeaderMismatch { expected: String, found: String },
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a finite number")]
    TypeError { row: usize, column: String, value: String },
    #[error("row {row}, column `{column}`: unknown category `{value}`")]
    UnknownCategory { row: usize, column: String, value: String },
    #[error("row {row}, column `{column}`: missing value")]
    MissingValue { row: usize, column: String },
    #[error("dataset is empty")]
    Empty,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema json: {0}")]
    Json(#[from] serde_json::Error),
}
