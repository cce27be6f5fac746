use serde::Serialize;

use super::{Column, Dataset, TabularError};

/// What one encoded predictor stands for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EncodedColumn {
    pub source: String,
    pub level: EncodedLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodedLevel {
    /// Indicator for this category (the first category is the dropped reference).
    Category(String),
    ScaledContinuous,
}

/// Row-major design matrix without an intercept column.
#[derive(Debug, Clone)]
pub struct EncodedMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<f64>,
    pub column_map: Vec<EncodedColumn>,
    /// Continuous source columns with zero variance, encoded as zeros.
    pub degenerate: Vec<String>,
}

impl EncodedMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }
}

/// One-hot encodes categorical columns (reference level dropped) and
/// standardizes continuous columns, keeping schema column order.
pub fn encode(ds: &Dataset) -> Result<EncodedMatrix, TabularError> {
    if ds.is_empty() {
        return Err(TabularError::Empty);
    }
    let n = ds.n_rows();
    let mut column_map = Vec::new();
    let mut blocks: Vec<Block> = Vec::new();
    let mut degenerate = Vec::new();
    for (spec, col) in ds.schema().columns().iter().zip(ds.columns()) {
        match col {
            Column::Continuous(v) => {
                let mean = v.iter().sum::<f64>() / n as f64;
                let var = if n > 1 {
                    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
                } else {
                    0.0
                };
                let sd = var.sqrt();
                // Relative test: spread below rounding noise counts as constant.
                let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
                let constant = !(sd > 1e-12 * scale);
                if constant {
                    degenerate.push(spec.name.clone());
                }
                column_map.push(EncodedColumn { source: spec.name.clone(), level: EncodedLevel::ScaledContinuous });
                blocks.push(Block::Scaled { values: v, mean, sd: if constant { 0.0 } else { sd } });
            }
            Column::Categorical(v) => {
                for label in spec.labels().iter().skip(1) {
                    column_map.push(EncodedColumn {
                        source: spec.name.clone(),
                        level: EncodedLevel::Category(label.clone()),
                    });
                }
                blocks.push(Block::OneHot { values: v, levels: spec.n_categories() });
            }
        }
    }
    let k = column_map.len();
    let mut data = vec![0.0; n * k];
    let mut offset = 0;
    for block in &blocks {
        match *block {
            Block::Scaled { values, mean, sd } => {
                if sd > 0.0 {
                    for (i, x) in values.iter().enumerate() {
                        data[i * k + offset] = (x - mean) / sd;
                    }
                }
                offset += 1;
            }
            Block::OneHot { values, levels } => {
                for (i, &c) in values.iter().enumerate() {
                    if c > 0 {
                        data[i * k + offset + c as usize - 1] = 1.0;
                    }
                }
                offset += levels - 1;
            }
        }
    }
    Ok(EncodedMatrix { n_rows: n, n_cols: k, data, column_map, degenerate })
}

enum Block<'a> {
    Scaled { values: &'a [f64], mean: f64, sd: f64 },
    OneHot { values: &'a [u32], levels: usize },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{ColumnSpec, Schema};

    #[test]
    fn predictor_count_follows_dropped_reference() {
        let s = Schema::new(vec![ColumnSpec::continuous("x"), ColumnSpec::categorical("b", ["n", "y"])]).unwrap();
        let ds = Dataset::new(s, vec![Column::Continuous(vec![1., 2., 3., 4.]), Column::Categorical(vec![0, 1, 1, 0])]).unwrap();
        let m = encode(&ds).unwrap();
        assert_eq!(m.n_cols, 2);
        assert_eq!(m.row(1)[1], 1.0);
        assert_eq!(m.row(0)[1], 0.0);

        let s = Schema::new(vec![
            ColumnSpec::categorical("a", ["1", "2", "3"]),
            ColumnSpec::categorical("b", ["1", "2", "3", "4"]),
        ])
        .unwrap();
        let ds = Dataset::new(s, vec![Column::Categorical(vec![0, 2]), Column::Categorical(vec![3, 1])]).unwrap();
        let m = encode(&ds).unwrap();
        assert_eq!(m.n_cols, 5);
        assert_eq!(m.row(0), &[0., 0., 0., 0., 1.]);
        assert_eq!(m.row(1), &[0., 1., 1., 0., 0.]);
        assert_eq!(m.column_map[2], EncodedColumn { source: "b".into(), level: EncodedLevel::Category("2".into()) });
    }

    #[test]
    fn continuous_is_standardized() {
        let s = Schema::new(vec![ColumnSpec::continuous("x")]).unwrap();
        let ds = Dataset::new(s, vec![Column::Continuous(vec![10., 20., 35., 1e3, -4.])]).unwrap();
        let m = encode(&ds).unwrap();
        let mean = m.data.iter().sum::<f64>() / 5.0;
        let var = m.data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12);
        assert!((var.sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_column_flagged_as_zeros() {
        let s = Schema::new(vec![ColumnSpec::continuous("x")]).unwrap();
        let ds = Dataset::new(s, vec![Column::Continuous(vec![7.0; 6])]).unwrap();
        let m = encode(&ds).unwrap();
        assert!(m.data.iter().all(|&x| x == 0.0));
        assert_eq!(m.degenerate, vec!["x".to_string()]);
    }

    #[test]
    fn empty_dataset_rejected() {
        let s = Schema::new(vec![ColumnSpec::continuous("x")]).unwrap();
        let ds = Dataset::new(s, vec![Column::Continuous(vec![])]).unwrap();
        assert!(matches!(encode(&ds), Err(TabularError::Empty)));
    }
}
