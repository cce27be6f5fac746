//! Synthetic data generators: realistic (copula), artificial (rules),
//! causal (linear SEM) and hybrid (column-partitioned composition).

mod asd;
mod config;
mod csd;
mod hsd;
mod rsd;
mod rules;

pub use asd::generate_asd;
pub use config::*;
pub use csd::generate_csd;
pub use hsd::generate_hsd;
pub use rsd::generate_rsd;

use thiserror::Error;

use crate::engine::rng::RngStream;
use crate::tabular::{Dataset, Schema, TabularError};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("realistic generation needs at least 10 real rows, got {0}")]
    TooFewRows(usize),
    #[error("this generator needs real data")]
    MissingRealData,
    #[error("rule `{rule}` could not be satisfied within {attempts} attempts")]
    RuleUnsatisfiable { rule: String, attempts: usize },
    #[error(transparent)]
    Tabular(#[from] TabularError),
}

/// A generated dataset plus notes about degenerate inputs.
#[derive(Debug, Clone)]
pub struct GeneratorOutput {
    pub dataset: Dataset,
    pub notes: Vec<String>,
}

/// Runs one generator. `schema` is the output schema; for modes that read
/// real data it must equal `real`'s schema.
pub fn generate(
    config: &GeneratorConfig,
    real: Option<&Dataset>,
    schema: &Schema,
    rng: &mut RngStream,
) -> Result<GeneratorOutput, GenerateError> {
    if config.n_out == 0 {
        return Err(GenerateError::Config("n_out must be at least 1".into()));
    }
    config.method.validate(schema)?;
    match &config.method {
        Method::Rsd(p) => generate_rsd(real.ok_or(GenerateError::MissingRealData)?, p, config.n_out, rng),
        Method::Asd(p) => generate_asd(schema, p, config.n_out, rng),
        Method::Csd(p) => generate_csd(p, schema, config.n_out, rng),
        Method::Hsd(p) => generate_hsd(real, schema, p, config.n_out, rng),
    }
}
