use std::hash::{Hash, Hasher};

use super::{ColumnKind, Schema, TabularError};

/// Column storage. Categorical values are indices into the column's category list.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Continuous(Vec<f64>),
    Categorical(Vec<u32>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Continuous(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_continuous(&self) -> Option<&[f64]> {
        match self {
            Column::Continuous(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_categorical(&self) -> Option<&[u32]> {
        match self {
            Column::Categorical(v) => Some(v),
            _ => None,
        }
    }

    pub fn cell(&self, row: usize) -> Cell {
        match self {
            Column::Continuous(v) => Cell::Continuous(v[row]),
            Column::Categorical(v) => Cell::Categorical(v[row]),
        }
    }

    fn take(&self, rows: &[usize]) -> Column {
        match self {
            Column::Continuous(v) => Column::Continuous(rows.iter().map(|&i| v[i]).collect()),
            Column::Categorical(v) => Column::Categorical(rows.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// A single cell value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Continuous(f64),
    Categorical(u32),
}

impl Eq for Cell {}

impl Hash for Cell {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match *self {
            Cell::Continuous(x) => {
                0u8.hash(state);
                // +0.0 and -0.0 compare equal, so they must hash equal.
                let x = if x == 0.0 { 0.0 } else { x };
                x.to_bits().hash(state);
            }
            Cell::Categorical(c) => {
                1u8.hash(state);
                c.hash(state);
            }
        }
    }
}

impl Cell {
    /// Total order used for canonical row ordering.
    pub fn total_cmp(&self, other: &Cell) -> std::cmp::Ordering {
        match (self, other) {
            (Cell::Continuous(a), Cell::Continuous(b)) => a.total_cmp(b),
            (Cell::Categorical(a), Cell::Categorical(b)) => a.cmp(b),
            (Cell::Continuous(_), Cell::Categorical(_)) => std::cmp::Ordering::Less,
            (Cell::Categorical(_), Cell::Continuous(_)) => std::cmp::Ordering::Greater,
        }
    }
}

/// Immutable typed table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    columns: Vec<Column>,
    n_rows: usize,
}

impl Dataset {
    /// Builds a dataset, checking lengths, kinds, category indices and finiteness.
    pub fn new(schema: Schema, columns: Vec<Column>) -> Result<Self, TabularError> {
        let bad = |m: String| Err(TabularError::InvalidDataset(m));
        if columns.len() != schema.len() {
            return bad(format!("{} columns for a {}-column schema", columns.len(), schema.len()));
        }
        let n_rows = columns.first().map_or(0, Column::len);
        for (spec, col) in schema.columns().iter().zip(&columns) {
            if col.len() != n_rows {
                return bad(format!("column `{}` has {} rows, expected {n_rows}", spec.name, col.len()));
            }
            match (spec.kind, col) {
                (ColumnKind::Continuous, Column::Continuous(v)) => {
                    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                        return bad(format!("column `{}` row {i} is not finite", spec.name));
                    }
                }
                (ColumnKind::Categorical, Column::Categorical(v)) => {
                    let k = spec.n_categories() as u32;
                    if let Some(i) = v.iter().position(|&x| x >= k) {
                        return bad(format!("column `{}` row {i}: category index out of range", spec.name));
                    }
                }
                _ => return bad(format!("column `{}` storage does not match its kind", spec.name)),
            }
        }
        Ok(Self { schema, columns, n_rows })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, idx: usize) -> &Column {
        &self.columns[idx]
    }

    pub fn column_by_name(&self, name: &str) -> Option<&Column> {
        self.schema.index_of(name).map(|i| &self.columns[i])
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn row(&self, i: usize) -> Vec<Cell> {
        self.columns.iter().map(|c| c.cell(i)).collect()
    }

    pub fn take_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            n_rows: rows.len(),
        }
    }

    /// Projection onto the named columns, in the order given.
    pub fn select(&self, names: &[String]) -> Result<Dataset, TabularError> {
        let schema = self.schema.select(names)?;
        let columns = names
            .iter()
            .map(|n| self.column_by_name(n).cloned().expect("validated by select"))
            .collect();
        Ok(Dataset { schema, columns, n_rows: self.n_rows })
    }

    /// Row-wise concatenation of two datasets with structurally equal schemas.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset, TabularError> {
        if !self.schema.is_structurally_equal(&other.schema) {
            return Err(TabularError::InvalidDataset("cannot concatenate datasets with different schemas".into()));
        }
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| match (a, b) {
                (Column::Continuous(x), Column::Continuous(y)) => Column::Continuous([x.as_slice(), y].concat()),
                (Column::Categorical(x), Column::Categorical(y)) => Column::Categorical([x.as_slice(), y].concat()),
                _ => unreachable!("kinds checked above"),
            })
            .collect();
        Ok(Dataset { schema: self.schema.clone(), columns, n_rows: self.n_rows + other.n_rows })
    }

    /// Joins column blocks with equal row counts side by side and reorders
    /// them to match `schema`.
    pub fn hstack(schema: Schema, parts: &[Dataset]) -> Result<Dataset, TabularError> {
        let columns = schema
            .columns()
            .iter()
            .map(|spec| {
                parts
                    .iter()
                    .find_map(|p| p.column_by_name(&spec.name))
                    .cloned()
                    .ok_or_else(|| TabularError::InvalidDataset(format!("no part provides column `{}`", spec.name)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Dataset::new(schema, columns)
    }

    /// Row indices sorted by a total order on cell values.
    pub fn canonical_row_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n_rows).collect();
        idx.sort_by(|&a, &b| {
            self.columns
                .iter()
                .map(|c| c.cell(a).total_cmp(&c.cell(b)))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        idx
    }

    /// Observed (min, max) of each continuous column; `None` for categorical
    /// columns and for empty datasets.
    pub fn observed_ranges(&self) -> Vec<Option<(f64, f64)>> {
        self.columns
            .iter()
            .map(|c| match c {
                Column::Continuous(v) if !v.is_empty() => Some(
                    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x))),
                ),
                _ => None,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::ColumnSpec;

    fn schema() -> Schema {
        Schema::new(vec![ColumnSpec::continuous("x"), ColumnSpec::categorical("c", ["a", "b"])]).unwrap()
    }

    #[test]
    fn rejects_bad_columns() {
        let s = schema();
        assert!(Dataset::new(s.clone(), vec![Column::Continuous(vec![1.0]), Column::Categorical(vec![0, 1])]).is_err());
        assert!(Dataset::new(s.clone(), vec![Column::Continuous(vec![f64::NAN]), Column::Categorical(vec![0])]).is_err());
        assert!(Dataset::new(s.clone(), vec![Column::Continuous(vec![1.0]), Column::Categorical(vec![2])]).is_err());
        assert!(Dataset::new(s, vec![Column::Categorical(vec![0]), Column::Categorical(vec![0])]).is_err());
    }

    #[test]
    fn concat_and_take() {
        let s = schema();
        let a = Dataset::new(s.clone(), vec![Column::Continuous(vec![1.0, 2.0]), Column::Categorical(vec![0, 1])]).unwrap();
        let b = a.concat(&a).unwrap();
        assert_eq!(b.n_rows(), 4);
        let t = b.take_rows(&[3, 0]);
        assert_eq!(t.row(0), vec![Cell::Continuous(2.0), Cell::Categorical(1)]);
        assert_eq!(t.row(1), vec![Cell::Continuous(1.0), Cell::Categorical(0)]);
    }

    #[test]
    fn signed_zero_cells_hash_equal() {
        use std::collections::HashSet;
        let set: HashSet<Cell> = [Cell::Continuous(0.0), Cell::Continuous(-0.0)].into_iter().collect();
        assert_eq!(set.len(), 1);
    }
}
