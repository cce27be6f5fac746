//! Artificial generation from per-column models and rules, without real data.

use rand::Rng;
use rand_distr::{Distribution, Normal as NormalDist};

use crate::engine::rng::RngStream;
use crate::tabular::{Cell, Column, ColumnKind, Dataset, Schema};

use super::rules::RuleSet;
use super::{AsdParams, ColumnModel, GenerateError, GeneratorOutput};

pub(crate) enum Sampler {
    Uniform(f64, f64),
    Normal(f64, f64),
    Quantiles(Vec<f64>, Vec<f64>),
    Categorical(Vec<(u32, f64)>),
    /// Filled in by a derivation rule.
    Derived,
}

impl Sampler {
    pub fn new(model: Option<&ColumnModel>, column: &crate::tabular::ColumnSpec) -> Self {
        match model {
            None => Sampler::Derived,
            Some(ColumnModel::Uniform { a, b }) => Sampler::Uniform(*a, *b),
            Some(ColumnModel::Normal { mean, sd }) => Sampler::Normal(*mean, *sd),
            Some(ColumnModel::Quantiles { probs, values }) => Sampler::Quantiles(probs.clone(), values.clone()),
            Some(ColumnModel::Categorical(weights)) => {
                let total: f64 = weights.iter().map(|w| w.weight).sum();
                let mut acc = 0.0;
                let cum = weights
                    .iter()
                    .map(|w| {
                        acc += w.weight / total;
                        (column.category_index(&w.label).expect("validated"), acc)
                    })
                    .collect();
                Sampler::Categorical(cum)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Cell {
        match self {
            Sampler::Uniform(a, b) => {
                let u: f64 = rng.random();
                Cell::Continuous(a + (b - a) * u)
            }
            Sampler::Normal(mean, sd) => {
                if *sd == 0.0 {
                    Cell::Continuous(*mean)
                } else {
                    Cell::Continuous(NormalDist::new(*mean, *sd).expect("validated").sample(rng))
                }
            }
            Sampler::Quantiles(probs, values) => {
                let u: f64 = rng.random();
                let k = probs.partition_point(|&p| p <= u).clamp(1, probs.len() - 1);
                let (p0, p1) = (probs[k - 1], probs[k]);
                let t = (u - p0) / (p1 - p0);
                Cell::Continuous(values[k - 1] + t * (values[k] - values[k - 1]))
            }
            Sampler::Categorical(cum) => {
                let u: f64 = rng.random();
                let j = cum.iter().position(|&(_, f)| u < f).unwrap_or(cum.len() - 1);
                Cell::Categorical(cum[j].0)
            }
            Sampler::Derived => Cell::Continuous(0.0),
        }
    }
}

/// Collects accepted rows column by column.
pub(crate) fn rows_to_dataset(schema: &Schema, rows: &[Vec<Cell>]) -> Result<Dataset, GenerateError> {
    let columns = schema
        .columns()
        .iter()
        .enumerate()
        .map(|(j, spec)| match spec.kind {
            ColumnKind::Continuous => Column::Continuous(
                rows.iter()
                    .map(|r| match r[j] {
                        Cell::Continuous(x) => x,
                        Cell::Categorical(_) => unreachable!(),
                    })
                    .collect(),
            ),
            ColumnKind::Categorical => Column::Categorical(
                rows.iter()
                    .map(|r| match r[j] {
                        Cell::Categorical(c) => c,
                        Cell::Continuous(_) => unreachable!(),
                    })
                    .collect(),
            ),
        })
        .collect();
    Ok(Dataset::new(schema.clone(), columns)?)
}

pub fn generate_asd(
    schema: &Schema,
    params: &AsdParams,
    n_out: usize,
    rng: &mut RngStream,
) -> Result<GeneratorOutput, GenerateError> {
    params.validate(schema)?;
    let samplers: Vec<Sampler> =
        schema.columns().iter().map(|c| Sampler::new(params.column_models.get(&c.name), c)).collect();
    let rules = RuleSet::compile(&params.rules, schema)?;
    let mut violations = vec![0usize; rules.len()];
    let mut rows = Vec::with_capacity(n_out);
    let mut attempts_total = 0usize;
    for _ in 0..n_out {
        let mut accepted = None;
        for _ in 0..params.max_attempts_per_row {
            attempts_total += 1;
            let mut row: Vec<Cell> = samplers.iter().map(|s| s.sample(rng)).collect();
            rules.apply_derivations(&mut row);
            if rules.check(&row, |i| violations[i] += 1) {
                accepted = Some(row);
                break;
            }
        }
        match accepted {
            Some(row) => rows.push(row),
            None => {
                let worst = (0..rules.len()).max_by_key(|&i| (violations[i], std::cmp::Reverse(i))).unwrap_or(0);
                return Err(GenerateError::RuleUnsatisfiable {
                    rule: rules.describe(worst).to_string(),
                    attempts: params.max_attempts_per_row,
                });
            }
        }
    }
    let mut notes = Vec::new();
    if attempts_total > n_out {
        notes.push(format!("rejection sampling drew {attempts_total} candidate rows for {n_out} accepted"));
    }
    Ok(GeneratorOutput { dataset: rows_to_dataset(schema, &rows)?, notes })
}
