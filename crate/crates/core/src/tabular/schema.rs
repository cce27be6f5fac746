use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TabularError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
}

impl ColumnSpec {
    pub fn continuous(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: ColumnKind::Continuous, categories: None, bounds: None }
    }

    pub fn bounded(name: impl Into<String>, min: f64, max: f64) -> Self {
        Self { bounds: Some((min, max)), ..Self::continuous(name) }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, categories: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Categorical,
            categories: Some(categories.into_iter().map(Into::into).collect()),
            bounds: None,
        }
    }

    /// Category labels; empty for continuous columns.
    pub fn labels(&self) -> &[String] {
        self.categories.as_deref().unwrap_or(&[])
    }

    pub fn n_categories(&self) -> usize {
        self.labels().len()
    }

    pub fn category_index(&self, label: &str) -> Option<u32> {
        self.labels().iter().position(|c| c == label).map(|i| i as u32)
    }

    fn validate(&self) -> Result<(), TabularError> {
        let bad = |m: String| Err(TabularError::InvalidSchema(m));
        if self.name.is_empty() {
            return bad("column name is empty".into());
        }
        match self.kind {
            ColumnKind::Categorical => {
                let cats = match &self.categories {
                    Some(c) if !c.is_empty() => c,
                    _ => return bad(format!("categorical column `{}` needs categories", self.name)),
                };
                if cats.iter().any(|c| c.is_empty()) {
                    return bad(format!("column `{}` has an empty category label", self.name));
                }
                let mut seen = HashSet::new();
                if let Some(dup) = cats.iter().find(|c| !seen.insert(c.as_str())) {
                    return bad(format!("column `{}` lists category `{dup}` twice", self.name));
                }
                if self.bounds.is_some() {
                    return bad(format!("categorical column `{}` cannot have bounds", self.name));
                }
            }
            ColumnKind::Continuous => {
                if self.categories.is_some() {
                    return bad(format!("continuous column `{}` cannot have categories", self.name));
                }
                if let Some((lo, hi)) = self.bounds {
                    if !(lo <= hi) {
                        return bad(format!("column `{}` has bounds min > max", self.name));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Ordered, validated list of columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawSchema")]
pub struct Schema {
    columns: Vec<ColumnSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchema {
    columns: Vec<ColumnSpec>,
}

impl TryFrom<RawSchema> for Schema {
    type Error = TabularError;
    fn try_from(raw: RawSchema) -> Result<Self, Self::Error> {
        Schema::new(raw.columns)
    }
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self, TabularError> {
        if columns.is_empty() {
            return Err(TabularError::InvalidSchema("schema has no columns".into()));
        }
        let mut names = HashSet::new();
        for c in &columns {
            c.validate()?;
            if !names.insert(c.name.as_str()) {
                return Err(TabularError::InvalidSchema(format!("duplicate column name `{}`", c.name)));
            }
        }
        Ok(Self { columns })
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, TabularError> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, TabularError> {
        Self::from_json(&std::fs::read(path)?)
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    /// Sub-schema with the named columns, in the order given.
    pub fn select(&self, names: &[String]) -> Result<Schema, TabularError> {
        let cols = names
            .iter()
            .map(|n| {
                self.column(n)
                    .cloned()
                    .ok_or_else(|| TabularError::InvalidSchema(format!("unknown column `{n}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Schema::new(cols)
    }

    /// Same names, order, kinds and categories (bounds are not compared).
    pub fn is_structurally_equal(&self, other: &Schema) -> bool {
        self.len() == other.len()
            && self
                .columns
                .iter()
                .zip(&other.columns)
                .all(|(a, b)| a.name == b.name && a.kind == b.kind && a.categories == b.categories)
    }
}
