//! Generator configuration as it appears under a generate node's `params`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::tabular::{ColumnKind, Schema};

use super::GenerateError;

pub const DEFAULT_MAX_ATTEMPTS: usize = 1000;

fn default_attempts() -> usize {
    DEFAULT_MAX_ATTEMPTS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Rsd,
    Asd,
    Csd,
    Hsd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n_out: usize,
    pub method: Method,
}

impl GeneratorConfig {
    pub fn mode(&self) -> Mode {
        self.method.mode()
    }
}

/// Mode together with its parameters; serialized as `{"rsd": {...}}` etc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rsd(RsdParams),
    Asd(AsdParams),
    Csd(CsdParams),
    Hsd(HsdParams),
}

impl Method {
    pub fn mode(&self) -> Mode {
        match self {
            Method::Rsd(_) => Mode::Rsd,
            Method::Asd(_) => Mode::Asd,
            Method::Csd(_) => Mode::Csd,
            Method::Hsd(_) => Mode::Hsd,
        }
    }

    /// Whether this method reads real data.
    pub fn needs_real(&self) -> bool {
        match self {
            Method::Rsd(_) => true,
            Method::Asd(_) | Method::Csd(_) => false,
            Method::Hsd(h) => h.parts.iter().any(|p| p.method.needs_real()),
        }
    }

    /// Checks parameters against the output schema.
    pub fn validate(&self, schema: &Schema) -> Result<(), GenerateError> {
        match self {
            Method::Rsd(p) => p.validate(),
            Method::Asd(p) => p.validate(schema),
            Method::Csd(p) => p.validate(schema),
            Method::Hsd(p) => p.validate(schema),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RsdParams {
    /// Weight of the identity matrix in the fitted correlation, in [0, 1].
    #[serde(default)]
    pub correlation_shrinkage: f64,
}

impl RsdParams {
    pub fn validate(&self) -> Result<(), GenerateError> {
        if !(0.0..=1.0).contains(&self.correlation_shrinkage) {
            return Err(GenerateError::Config("correlation_shrinkage must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsdParams {
    /// Keyed by column name. Columns targeted by a derivation need no model.
    pub column_models: BTreeMap<String, ColumnModel>,
    #[serde(default)]
    pub rules: Vec<Rule>,
    #[serde(default = "default_attempts")]
    pub max_attempts_per_row: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnModel {
    Uniform { a: f64, b: f64 },
    Normal { mean: f64, sd: f64 },
    /// Piecewise-linear inverse CDF through `(probs[i], values[i])`.
    Quantiles { probs: Vec<f64>, values: Vec<f64> },
    Categorical(Vec<LabelWeight>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelWeight {
    pub label: String,
    pub weight: f64,
}

impl ColumnModel {
    fn validate(&self, column: &str, kind: ColumnKind, schema: &Schema) -> Result<(), GenerateError> {
        let bad = |m: &str| Err(GenerateError::Config(format!("column `{column}`: {m}")));
        match (self, kind) {
            (ColumnModel::Uniform { a, b }, ColumnKind::Continuous) => {
                if !(a.is_finite() && b.is_finite() && a <= b) {
                    return bad("uniform needs finite a <= b");
                }
            }
            (ColumnModel::Normal { mean, sd }, ColumnKind::Continuous) => {
                if !(mean.is_finite() && sd.is_finite() && *sd >= 0.0) {
                    return bad("normal needs finite mean and sd >= 0");
                }
            }
            (ColumnModel::Quantiles { probs, values }, ColumnKind::Continuous) => {
                let ok = probs.len() >= 2
                    && probs.len() == values.len()
                    && probs.first() == Some(&0.0)
                    && probs.last() == Some(&1.0)
                    && probs.windows(2).all(|w| w[0] < w[1])
                    && values.iter().all(|v| v.is_finite())
                    && values.windows(2).all(|w| w[0] <= w[1]);
                if !ok {
                    return bad("quantile table needs probs 0..1 strictly increasing and non-decreasing values");
                }
            }
            (ColumnModel::Categorical(weights), ColumnKind::Categorical) => {
                let spec = schema.column(column).expect("checked by caller");
                if weights.is_empty() {
                    return bad("categorical model needs at least one label");
                }
                for lw in weights {
                    if spec.category_index(&lw.label).is_none() {
                        return bad(&format!("label `{}` is not a category of the column", lw.label));
                    }
                    if !(lw.weight > 0.0 && lw.weight.is_finite()) {
                        return bad("weights must be positive");
                    }
                }
            }
            _ => return bad("model does not match the column kind"),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// If `if_column == if_value` then `then_column` must be one of `then_values`.
    Implication { if_column: String, if_value: String, then_column: String, then_values: Vec<String> },
    RangeConstraint { column: String, min: f64, max: f64 },
    /// `target = sum(coefficient * column) + constant`.
    Derivation {
        target: String,
        terms: Vec<Term>,
        #[serde(default)]
        constant: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub column: String,
    pub coefficient: f64,
}

impl Rule {
    pub fn describe(&self) -> String {
        match self {
            Rule::Implication { if_column, if_value, then_column, then_values } => {
                format!("{if_column}={if_value} => {then_column} in {{{}}}", then_values.join(","))
            }
            Rule::RangeConstraint { column, min, max } => format!("{column} in [{min}, {max}]"),
            Rule::Derivation { target, terms, constant } => {
                let rhs: Vec<String> = terms.iter().map(|t| format!("{}*{}", t.coefficient, t.column)).collect();
                format!("{target} = {} + {constant}", rhs.join(" + "))
            }
        }
    }
}

/// Validates a rule list against a schema, including derivation acyclicity.
pub fn validate_rules(rules: &[Rule], schema: &Schema) -> Result<(), GenerateError> {
    let col = |name: &str, want: Option<ColumnKind>| -> Result<(), GenerateError> {
        match schema.column(name) {
            None => Err(GenerateError::Config(format!("rule references unknown column `{name}`"))),
            Some(c) if want.is_some_and(|k| k != c.kind) => {
                Err(GenerateError::Config(format!("rule column `{name}` has the wrong kind")))
            }
            Some(_) => Ok(()),
        }
    };
    let mut targets = Vec::new();
    for rule in rules {
        match rule {
            Rule::Implication { if_column, if_value, then_column, then_values } => {
                col(if_column, Some(ColumnKind::Categorical))?;
                col(then_column, Some(ColumnKind::Categorical))?;
                let ic = schema.column(if_column).unwrap();
                let tc = schema.column(then_column).unwrap();
                if ic.category_index(if_value).is_none() || then_values.iter().any(|v| tc.category_index(v).is_none()) {
                    return Err(GenerateError::Config(format!("rule `{}` names an unknown category", rule.describe())));
                }
            }
            Rule::RangeConstraint { column, min, max } => {
                col(column, Some(ColumnKind::Continuous))?;
                if !(min <= max) {
                    return Err(GenerateError::Config(format!("rule `{}` has min > max", rule.describe())));
                }
            }
            Rule::Derivation { target, terms, constant } => {
                col(target, Some(ColumnKind::Continuous))?;
                for t in terms {
                    col(&t.column, Some(ColumnKind::Continuous))?;
                    if !t.coefficient.is_finite() {
                        return Err(GenerateError::Config("derivation coefficients must be finite".into()));
                    }
                }
                if !constant.is_finite() {
                    return Err(GenerateError::Config("derivation constant must be finite".into()));
                }
                if targets.contains(&target.as_str()) {
                    return Err(GenerateError::Config(format!("column `{target}` is derived twice")));
                }
                targets.push(target.as_str());
            }
        }
    }
    derivation_order(rules).map(|_| ())
}

/// Indices of derivation rules in an order where every source is computed
/// before it is read.
pub(crate) fn derivation_order(rules: &[Rule]) -> Result<Vec<usize>, GenerateError> {
    let derivs: Vec<(usize, &str, Vec<&str>)> = rules
        .iter()
        .enumerate()
        .filter_map(|(i, r)| match r {
            Rule::Derivation { target, terms, .. } => {
                Some((i, target.as_str(), terms.iter().map(|t| t.column.as_str()).collect()))
            }
            _ => None,
        })
        .collect();
    let mut done: Vec<bool> = vec![false; derivs.len()];
    let mut order = Vec::new();
    while order.len() < derivs.len() {
        let next = (0..derivs.len()).find(|&d| {
            !done[d]
                && derivs[d].2.iter().all(|src| {
                    derivs.iter().enumerate().all(|(e, (_, tgt, _))| *tgt != *src || done[e])
                })
        });
        match next {
            Some(d) => {
                done[d] = true;
                order.push(derivs[d].0);
            }
            None => return Err(GenerateError::Config("derivation rules form a cycle".into())),
        }
    }
    Ok(order)
}

impl AsdParams {
    pub fn validate(&self, schema: &Schema) -> Result<(), GenerateError> {
        if self.max_attempts_per_row == 0 {
            return Err(GenerateError::Config("max_attempts_per_row must be at least 1".into()));
        }
        validate_rules(&self.rules, schema)?;
        let derived: Vec<&str> = self
            .rules
            .iter()
            .filter_map(|r| match r {
                Rule::Derivation { target, .. } => Some(target.as_str()),
                _ => None,
            })
            .collect();
        for name in self.column_models.keys() {
            if schema.column(name).is_none() {
                return Err(GenerateError::Config(format!("model for unknown column `{name}`")));
            }
        }
        for spec in schema.columns() {
            match self.column_models.get(&spec.name) {
                Some(model) => model.validate(&spec.name, spec.kind, schema)?,
                None if derived.contains(&spec.name.as_str()) => {}
                None => return Err(GenerateError::Config(format!("column `{}` has no model", spec.name))),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsdParams {
    #[serde(default)]
    pub edges: Vec<CausalEdge>,
    pub noise: BTreeMap<String, Noise>,
    #[serde(default)]
    pub intercepts: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CausalEdge {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    Normal { sd: f64 },
    Uniform { half_width: f64 },
}

impl CsdParams {
    pub fn validate(&self, schema: &Schema) -> Result<(), GenerateError> {
        for spec in schema.columns() {
            if spec.kind != ColumnKind::Continuous {
                return Err(GenerateError::Config(format!(
                    "causal generation supports continuous columns only; `{}` is categorical",
                    spec.name
                )));
            }
            match self.noise.get(&spec.name) {
                None => return Err(GenerateError::Config(format!("column `{}` has no noise spec", spec.name))),
                Some(Noise::Normal { sd: s }) | Some(Noise::Uniform { half_width: s }) => {
                    if !(s.is_finite() && *s >= 0.0) {
                        return Err(GenerateError::Config(format!("noise scale for `{}` must be >= 0", spec.name)));
                    }
                }
            }
        }
        let known = |n: &str| schema.column(n).is_some();
        if let Some(n) = self.noise.keys().chain(self.intercepts.keys()).find(|n| !known(n)) {
            return Err(GenerateError::Config(format!("unknown column `{n}`")));
        }
        for e in &self.edges {
            if !known(&e.from) || !known(&e.to) {
                return Err(GenerateError::Config(format!("edge {} -> {} names an unknown column", e.from, e.to)));
            }
            if !e.weight.is_finite() {
                return Err(GenerateError::Config("edge weights must be finite".into()));
            }
        }
        self.column_order(schema).map(|_| ())
    }

    /// Schema column indices in causal order, ties broken by column name.
    pub(crate) fn column_order(&self, schema: &Schema) -> Result<Vec<usize>, GenerateError> {
        let names: Vec<String> = schema.names().map(str::to_string).collect();
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|e| (schema.index_of(&e.from).unwrap(), schema.index_of(&e.to).unwrap()))
            .collect();
        crate::spec::graph::Dag::new(names, &edges)
            .topological_order()
            .map_err(|cycle| GenerateError::Config(format!("causal graph has a cycle: {}", cycle.join(" -> "))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsdParams {
    pub parts: Vec<HsdPart>,
    #[serde(default)]
    pub post_rules: Vec<Rule>,
    #[serde(default = "default_attempts")]
    pub max_attempts_per_row: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsdPart {
    pub columns: Vec<String>,
    pub method: Method,
}

impl HsdParams {
    pub fn validate(&self, schema: &Schema) -> Result<(), GenerateError> {
        if self.max_attempts_per_row == 0 {
            return Err(GenerateError::Config("max_attempts_per_row must be at least 1".into()));
        }
        let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, part) in self.parts.iter().enumerate() {
            if matches!(part.method, Method::Hsd(_)) {
                return Err(GenerateError::Config("hybrid parts cannot themselves be hybrid".into()));
            }
            if part.columns.is_empty() {
                return Err(GenerateError::Config(format!("hybrid part {i} has no columns")));
            }
            for c in &part.columns {
                if schema.column(c).is_none() {
                    return Err(GenerateError::Config(format!("hybrid part {i} names unknown column `{c}`")));
                }
                if owner.insert(c, i).is_some() {
                    return Err(GenerateError::Config(format!("column `{c}` is assigned to two hybrid parts")));
                }
            }
            let sub = schema.select(&part.columns).map_err(|e| GenerateError::Config(e.to_string()))?;
            part.method.validate(&sub)?;
        }
        if let Some(c) = schema.names().find(|c| !owner.contains_key(c)) {
            return Err(GenerateError::Config(format!("column `{c}` is not assigned to any hybrid part")));
        }
        validate_rules(&self.post_rules, schema)
    }
}
