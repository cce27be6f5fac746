//! Marginal and pairwise distribution similarity.

use serde_json::{json, Map, Value};

use crate::eval::ks::ks_statistic;
use crate::eval::{Direction, EvalError, MetricResult, Provenance};
use crate::tabular::{Column, Dataset};

fn check_schemas(real: &Dataset, synth: &Dataset) -> Result<(), EvalError> {
    if !real.schema().is_structurally_equal(synth.schema()) {
        return Err(EvalError::SchemaMismatch);
    }
    if real.is_empty() || synth.is_empty() {
        return Err(EvalError::Precondition("fidelity needs non-empty datasets".into()));
    }
    Ok(())
}

fn frequencies(codes: &[u32], k: usize) -> Vec<f64> {
    let mut f = vec![0.0; k];
    for &c in codes {
        f[c as usize] += 1.0;
    }
    let n = codes.len() as f64;
    f.iter_mut().for_each(|x| *x /= n);
    f
}

pub(crate) fn total_variation(a: &[u32], b: &[u32], k: usize) -> f64 {
    let (fa, fb) = (frequencies(a, k), frequencies(b, k));
    0.5 * fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Mean over columns of `1 - KS` (continuous) or `1 - TVD` (categorical).
pub fn univariate_fidelity(real: &Dataset, synth: &Dataset) -> Result<MetricResult, EvalError> {
    check_schemas(real, synth)?;
    let mut per_column = Map::new();
    let mut total = 0.0;
    for (j, spec) in real.schema().columns().iter().enumerate() {
        let s = match (real.column(j), synth.column(j)) {
            (Column::Continuous(a), Column::Continuous(b)) => 1.0 - ks_statistic(a, b),
            (Column::Categorical(a), Column::Categorical(b)) => 1.0 - total_variation(a, b, spec.n_categories()),
            _ => unreachable!("schemas checked"),
        };
        per_column.insert(spec.name.clone(), json!(s));
        total += s;
    }
    let score = total / real.n_cols() as f64;
    Ok(MetricResult::new("univariate_fidelity", score, Direction::HigherBetter, Provenance::Utility)
        .with("per_column", Value::Object(per_column)))
}

/// Pearson correlation; `None` when either column is constant.
pub(crate) fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Cramér's V after dropping empty rows and columns of the contingency
/// table; `None` when fewer than two levels remain on either side.
pub(crate) fn cramers_v(a: &[u32], ka: usize, b: &[u32], kb: usize) -> Option<f64> {
    let mut table = vec![vec![0.0f64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x as usize][y as usize] += 1.0;
    }
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..kb).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let keep_r: Vec<usize> = (0..ka).filter(|&i| rows[i] > 0.0).collect();
    let keep_c: Vec<usize> = (0..kb).filter(|&j| cols[j] > 0.0).collect();
    let m = keep_r.len().min(keep_c.len());
    if m < 2 {
        return None;
    }
    let n = a.len() as f64;
    let mut chi2 = 0.0;
    for &i in &keep_r {
        for &j in &keep_c {
            let e = rows[i] * cols[j] / n;
            chi2 += (table[i][j] - e).powi(2) / e;
        }
    }
    Some((chi2 / (n * (m - 1) as f64)).sqrt().min(1.0))
}

/// Correlation ratio of a continuous column on a categorical one; `None`
/// when the continuous column is constant.
pub(crate) fn correlation_ratio(cat: &[u32], k: usize, y: &[f64]) -> Option<f64> {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss_total: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_total <= 0.0 {
        return None;
    }
    let mut sums = vec![0.0; k];
    let mut counts = vec![0.0; k];
    for (&c, &v) in cat.iter().zip(y) {
        sums[c as usize] += v;
        counts[c as usize] += 1.0;
    }
    let ss_between: f64 = (0..k)
        .filter(|&g| counts[g] > 0.0)
        .map(|g| counts[g] * (sums[g] / counts[g] - mean).powi(2))
        .sum();
    Some((ss_between / ss_total).sqrt().min(1.0))
}

/// Mean over column pairs of a similarity of pairwise association:
/// `1 - |Δρ|/2` for two continuous columns, `1 - |ΔV|` for two categorical
/// columns (Cramér's V), `1 - |Δη|` for mixed pairs (correlation ratio).
/// Undefined associations count as 0 and are flagged.
pub fn bivariate_fidelity(real: &Dataset, synth: &Dataset) -> Result<MetricResult, EvalError> {
    check_schemas(real, synth)?;
    let cols = real.schema().columns();
    if cols.len() < 2 {
        return Ok(MetricResult::new("bivariate_fidelity", 1.0, Direction::HigherBetter, Provenance::Utility)
            .flag("fewer than two columns"));
    }
    let mut flags = Vec::new();
    let mut per_pair = Map::new();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            let pair = format!("{}|{}", cols[i].name, cols[j].name);
            let mut assoc = |d: &Dataset, which: &str| -> f64 {
                let v = match (d.column(i), d.column(j)) {
                    (Column::Continuous(x), Column::Continuous(y)) => pearson(x, y),
                    (Column::Categorical(x), Column::Categorical(y)) => {
                        cramers_v(x, cols[i].n_categories(), y, cols[j].n_categories())
                    }
                    (Column::Categorical(c), Column::Continuous(y)) => correlation_ratio(c, cols[i].n_categories(), y),
                    (Column::Continuous(y), Column::Categorical(c)) => correlation_ratio(c, cols[j].n_categories(), y),
                };
                v.unwrap_or_else(|| {
                    flags.push(format!("{pair}: undefined association in {which} data"));
                    0.0
                })
            };
            let (a, b) = (assoc(real, "real"), assoc(synth, "synthetic"));
            let s = match (cols[i].kind, cols[j].kind) {
                (k1, k2) if k1 == k2 && matches!(k1, crate::tabular::ColumnKind::Continuous) => 1.0 - (a - b).abs() / 2.0,
                _ => 1.0 - (a - b).abs(),
            };
            per_pair.insert(pair, json!(s));
            total += s;
            pairs += 1;
        }
    }
    let mut m = MetricResult::new("bivariate_fidelity", total / pairs as f64, Direction::HigherBetter, Provenance::Utility)
        .with("per_pair", Value::Object(per_pair));
    for f in flags {
        m = m.flag(f);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{ColumnSpec, Schema};

    fn ds(x: Vec<f64>, c: Vec<u32>) -> Dataset {
        let s = Schema::new(vec![ColumnSpec::continuous("x"), ColumnSpec::categorical("c", ["a", "b", "z"])]).unwrap();
        Dataset::new(s, vec![Column::Continuous(x), Column::Categorical(c)]).unwrap()
    }

    #[test]
    fn identical_data_scores_one() {
        let d = ds(vec![1.0, 2.0, 3.0, 5.0], vec![0, 1, 0, 1]);
        assert_eq!(univariate_fidelity(&d, &d).unwrap().score, 1.0);
        assert_eq!(bivariate_fidelity(&d, &d).unwrap().score, 1.0);
    }

    #[test]
    fn univariate_hand_value() {
        let r = ds(vec![0.0, 1.0], vec![0, 0]);
        let s = ds(vec![2.0, 3.0], vec![0, 1]);
        // KS = 1, TVD = 0.5.
        assert!((univariate_fidelity(&r, &s).unwrap().score - 0.25).abs() < 1e-15);
    }

    #[test]
    fn association_hand_values() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), None);
        assert!((cramers_v(&[0, 0, 1, 1], 2, &[1, 1, 0, 0], 2).unwrap() - 1.0).abs() < 1e-12);
        assert!(cramers_v(&[0, 1, 0, 1], 2, &[0, 0, 1, 1], 2).unwrap().abs() < 1e-12);
        assert_eq!(cramers_v(&[0, 0], 2, &[0, 1], 2), None);
        // Groups {1,3} and {5,7}: SS_between = 16, SS_total = 20.
        let eta = correlation_ratio(&[0, 0, 1, 1], 2, &[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert!((eta - (0.8f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_column_is_flagged() {
        let r = ds(vec![1.0, 1.0, 1.0], vec![0, 1, 0]);
        let m = bivariate_fidelity(&r, &r).unwrap();
        assert_eq!(m.score, 1.0);
        assert_eq!(m.flags().len(), 2);
    }
}
