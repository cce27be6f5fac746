//! Hybrid generation: independent sub-generators on disjoint column sets,
//! joined by row index, with optional post-join rules enforced by rejection.

use crate::engine::rng::RngStream;
use crate::tabular::{Cell, Dataset, Schema};

use super::asd::rows_to_dataset;
use super::rules::RuleSet;
use super::{generate, GenerateError, GeneratorConfig, GeneratorOutput, HsdParams};

pub fn generate_hsd(
    real: Option<&Dataset>,
    schema: &Schema,
    params: &HsdParams,
    n_out: usize,
    rng: &mut RngStream,
) -> Result<GeneratorOutput, GenerateError> {
    params.validate(schema)?;
    let rules = RuleSet::compile(&params.post_rules, schema)?;
    let mut accepted: Vec<Vec<Cell>> = Vec::with_capacity(n_out);
    let mut notes = Vec::new();
    let mut violations = vec![0usize; rules.len()];
    let mut round = 0usize;
    while accepted.len() < n_out {
        if round >= params.max_attempts_per_row {
            let worst = (0..rules.len()).max_by_key(|&i| (violations[i], std::cmp::Reverse(i))).unwrap_or(0);
            return Err(GenerateError::RuleUnsatisfiable {
                rule: rules.describe(worst).to_string(),
                attempts: params.max_attempts_per_row,
            });
        }
        let need = n_out - accepted.len();
        let mut parts = Vec::with_capacity(params.parts.len());
        for (i, part) in params.parts.iter().enumerate() {
            let sub_schema = schema.select(&part.columns)?;
            let sub_real = match real {
                Some(r) if part.method.needs_real() => Some(r.select(&part.columns)?),
                _ => None,
            };
            let cfg = GeneratorConfig { n_out: need, method: part.method.clone() };
            let mut sub_rng = rng.substream(&format!("part{i}/round{round}"));
            let out = generate(&cfg, sub_real.as_ref(), &sub_schema, &mut sub_rng)?;
            if round == 0 {
                notes.extend(out.notes.into_iter().map(|n| format!("part {i}: {n}")));
            }
            parts.push(out.dataset);
        }
        let joined = Dataset::hstack(schema.clone(), &parts)?;
        for r in 0..joined.n_rows() {
            let mut row = joined.row(r);
            if !rules.is_empty() {
                rules.apply_derivations(&mut row);
                if !rules.check(&row, |i| violations[i] += 1) {
                    continue;
                }
            }
            accepted.push(row);
        }
        round += 1;
    }
    if round > 1 {
        notes.push(format!("post rules needed {round} generation rounds"));
    }
    Ok(GeneratorOutput { dataset: rows_to_dataset(schema, &accepted)?, notes })
}
