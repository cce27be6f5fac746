//! Rules resolved to column indices for fast per-row checks.

use crate::tabular::{Cell, Schema};

use super::config::{derivation_order, Rule};
use super::GenerateError;

enum Compiled {
    Implication { if_col: usize, if_val: u32, then_col: usize, allowed: Vec<u32> },
    Range { col: usize, min: f64, max: f64 },
    Derivation { target: usize, terms: Vec<(usize, f64)>, constant: f64 },
}

pub(crate) struct RuleSet {
    rules: Vec<Compiled>,
    descriptions: Vec<String>,
    derivation_order: Vec<usize>,
}

impl RuleSet {
    pub fn compile(rules: &[Rule], schema: &Schema) -> Result<Self, GenerateError> {
        let idx = |name: &str| {
            schema.index_of(name).ok_or_else(|| GenerateError::Config(format!("rule references unknown column `{name}`")))
        };
        let cat = |col: usize, label: &str| {
            schema.columns()[col]
                .category_index(label)
                .ok_or_else(|| GenerateError::Config(format!("unknown category `{label}`")))
        };
        let mut compiled = Vec::with_capacity(rules.len());
        for r in rules {
            compiled.push(match r {
                Rule::Implication { if_column, if_value, then_column, then_values } => {
                    let if_col = idx(if_column)?;
                    let then_col = idx(then_column)?;
                    Compiled::Implication {
                        if_col,
                        if_val: cat(if_col, if_value)?,
                        then_col,
                        allowed: then_values.iter().map(|v| cat(then_col, v)).collect::<Result<_, _>>()?,
                    }
                }
                Rule::RangeConstraint { column, min, max } => Compiled::Range { col: idx(column)?, min: *min, max: *max },
                Rule::Derivation { target, terms, constant } => Compiled::Derivation {
                    target: idx(target)?,
                    terms: terms.iter().map(|t| Ok((idx(&t.column)?, t.coefficient))).collect::<Result<_, GenerateError>>()?,
                    constant: *constant,
                },
            });
        }
        Ok(Self {
            rules: compiled,
            descriptions: rules.iter().map(Rule::describe).collect(),
            derivation_order: derivation_order(rules)?,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn describe(&self, i: usize) -> &str {
        &self.descriptions[i]
    }

    /// Writes derived columns into `row`.
    pub fn apply_derivations(&self, row: &mut [Cell]) {
        for &i in &self.derivation_order {
            if let Compiled::Derivation { target, terms, constant } = &self.rules[i] {
                let mut acc = 0.0;
                for &(c, w) in terms {
                    acc += w * num(row[c]);
                }
                row[*target] = Cell::Continuous(acc + constant);
            }
        }
    }

    /// Calls `violated(i)` for each rule the row breaks; returns whether all hold.
    pub fn check(&self, row: &[Cell], mut violated: impl FnMut(usize)) -> bool {
        let mut ok = true;
        for (i, r) in self.rules.iter().enumerate() {
            let holds = match r {
                Compiled::Implication { if_col, if_val, then_col, allowed } => {
                    cat(row[*if_col]) != *if_val || allowed.contains(&cat(row[*then_col]))
                }
                Compiled::Range { col, min, max } => {
                    let x = num(row[*col]);
                    *min <= x && x <= *max
                }
                // Derived values are exact by construction; a non-finite
                // result is the only way this can fail.
                Compiled::Derivation { target, .. } => num(row[*target]).is_finite(),
            };
            if !holds {
                ok = false;
                violated(i);
            }
        }
        ok
    }
}

fn num(c: Cell) -> f64 {
    match c {
        Cell::Continuous(x) => x,
        Cell::Categorical(_) => unreachable!("validated as continuous"),
    }
}

fn cat(c: Cell) -> u32 {
    match c {
        Cell::Categorical(x) => x,
        Cell::Continuous(_) => unreachable!("validated as categorical"),
    }
}
