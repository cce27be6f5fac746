use super::{Cell, Dataset, Schema};

/// Per-column (min, max) used to normalize continuous differences.
pub type ColumnRanges = Vec<Option<(f64, f64)>>;

/// Gower distance between two rows of the same schema: the mean over columns
/// of `|a - b| / (max - min)` for continuous columns (0 when the range is
/// empty) and a 0/1 mismatch for categorical columns.
pub fn gower_distance(a: &[Cell], b: &[Cell], schema: &Schema, ranges: &[Option<(f64, f64)>]) -> f64 {
    debug_assert_eq!(a.len(), schema.len());
    let total: f64 = a
        .iter()
        .zip(b)
        .zip(ranges)
        .map(|((x, y), r)| match (x, y) {
            (Cell::Continuous(x), Cell::Continuous(y)) => {
                let span = r.map_or(0.0, |(lo, hi)| hi - lo);
                if span > 0.0 {
                    ((x - y).abs() / span).min(1.0)
                } else {
                    0.0
                }
            }
            (Cell::Categorical(x), Cell::Categorical(y)) => f64::from(u8::from(x != y)),
            _ => 1.0,
        })
        .sum();
    total / schema.len() as f64
}

impl Dataset {
    /// Ranges for Gower distance taken from this dataset's observed values.
    pub fn gower_ranges(&self) -> ColumnRanges {
        self.observed_ranges()
    }
}
