//! Realistic generation with a Gaussian copula.
//!
//! Each column is mapped to normal scores through its empirical marginal
//! (mid-rank ECDF for continuous columns, stacked category intervals in
//! schema order for categorical ones). The normal-score correlation matrix is
//! repaired to be positive semidefinite, optionally shrunk toward identity,
//! sampled, and mapped back through the inverse marginals.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::engine::rng::RngStream;
use crate::par;
use crate::tabular::{Column, Dataset};

use super::{GenerateError, GeneratorOutput, RsdParams};

pub const MIN_REAL_ROWS: usize = 10;
const EIGEN_FLOOR: f64 = 1e-8;

enum Marginal {
    /// Sorted real values.
    Continuous(Vec<f64>),
    /// Cumulative category probabilities in schema order; last entry is 1.
    Categorical(Vec<f64>),
}

impl Marginal {
    fn inverse(&self, u: f64) -> Cell {
        match self {
            Marginal::Continuous(sorted) => {
                let n = sorted.len();
                let h = (u * n as f64 - 0.5).clamp(0.0, (n - 1) as f64);
                let lo = h.floor() as usize;
                let hi = (lo + 1).min(n - 1);
                let t = h - lo as f64;
                Cell::Num(sorted[lo] + t * (sorted[hi] - sorted[lo]))
            }
            Marginal::Categorical(cum) => {
                let j = cum.iter().position(|&f| u < f).unwrap_or_else(|| {
                    // u at (or rounding past) 1: last category with mass.
                    let mut j = cum.len() - 1;
                    while j > 0 && cum[j] == cum[j - 1] {
                        j -= 1;
                    }
                    j
                });
                Cell::Cat(j as u32)
            }
        }
    }
}

enum Cell {
    Num(f64),
    Cat(u32),
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid parameters")
}

/// Normal scores of a continuous column from mid-ranks (ties averaged).
fn continuous_scores(v: &[f64], normal: &Normal) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut scores = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 share their average; u = (rank - 0.5) / n.
        let u = ((i + j) as f64 / 2.0 + 0.5) / n as f64;
        let z = normal.inverse_cdf(u);
        for &k in &idx[i..=j] {
            scores[k] = z;
        }
        i = j + 1;
    }
    let sorted = idx.iter().map(|&k| v[k]).collect();
    (scores, sorted)
}

fn categorical_scores(v: &[u32], n_cats: usize, normal: &Normal) -> (Vec<f64>, Vec<f64>) {
    let n = v.len() as f64;
    let mut counts = vec![0usize; n_cats];
    for &c in v {
        counts[c as usize] += 1;
    }
    let mut cum = Vec::with_capacity(n_cats);
    let mut acc = 0usize;
    let mut mid_z = Vec::with_capacity(n_cats);
    for &c in &counts {
        let lo = acc as f64 / n;
        acc += c;
        let hi = acc as f64 / n;
        cum.push(hi);
        mid_z.push(if c > 0 { normal.inverse_cdf((lo + hi) / 2.0) } else { 0.0 });
    }
    *cum.last_mut().unwrap() = 1.0;
    (v.iter().map(|&c| mid_z[c as usize]).collect(), cum)
}

/// Pearson correlation of score columns; zero-variance columns get identity rows.
fn correlation(scores: &[Vec<f64>]) -> (DMatrix<f64>, Vec<bool>) {
    let p = scores.len();
    let n = scores[0].len() as f64;
    let centered: Vec<Vec<f64>> = scores
        .iter()
        .map(|s| {
            let m = s.iter().sum::<f64>() / n;
            s.iter().map(|x| x - m).collect()
        })
        .collect();
    let ss: Vec<f64> = centered.iter().map(|c| c.iter().map(|x| x * x).sum()).collect();
    let degenerate: Vec<bool> = ss.iter().map(|&s| !(s > 1e-12 * n)).collect();
    let mut r = DMatrix::identity(p, p);
    for a in 0..p {
        for b in (a + 1)..p {
            if degenerate[a] || degenerate[b] {
                continue;
            }
            let cross: f64 = centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y).sum();
            let rho = (cross / (ss[a] * ss[b]).sqrt()).clamp(-1.0, 1.0);
            r[(a, b)] = rho;
            r[(b, a)] = rho;
        }
    }
    (r, degenerate)
}

/// Eigenvalue clipping at `EIGEN_FLOOR`, then rescaling to unit diagonal.
pub(crate) fn nearest_correlation(r: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(r.clone());
    let clipped = eig.eigenvalues.map(|l| l.max(EIGEN_FLOOR));
    let a = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    let d: Vec<f64> = (0..a.nrows()).map(|i| a[(i, i)].sqrt()).collect();
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| if i == j { 1.0 } else { a[(i, j)] / (d[i] * d[j]) })
}

/// Factor `L` with `L Lᵀ = r` from the eigendecomposition (robust to
/// eigenvalues at the floor).
fn sqrt_factor(r: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(r.clone());
    let s = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&s)
}

pub fn generate_rsd(
    real: &Dataset,
    params: &RsdParams,
    n_out: usize,
    rng: &mut RngStream,
) -> Result<GeneratorOutput, GenerateError> {
    params.validate()?;
    if real.n_rows() < MIN_REAL_ROWS {
        return Err(GenerateError::TooFewRows(real.n_rows()));
    }
    if n_out == 0 {
        return Err(GenerateError::Config("n_out must be at least 1".into()));
    }
    let normal = std_normal();
    let specs = real.schema().columns();

    let fitted: Vec<(Vec<f64>, Marginal)> = par::map_range(real.n_cols(), |j| match real.column(j) {
        Column::Continuous(v) => {
            let (scores, sorted) = continuous_scores(v, &normal);
            (scores, Marginal::Continuous(sorted))
        }
        Column::Categorical(v) => {
            let (scores, cum) = categorical_scores(v, specs[j].n_categories(), &normal);
            (scores, Marginal::Categorical(cum))
        }
    });
    let (scores, marginals): (Vec<Vec<f64>>, Vec<Marginal>) = fitted.into_iter().unzip();

    let (raw_corr, degenerate) = correlation(&scores);
    let mut notes: Vec<String> = specs
        .iter()
        .zip(&degenerate)
        .filter(|(_, d)| **d)
        .map(|(s, _)| format!("column `{}` has a degenerate marginal; generated as constant", s.name))
        .collect();
    let mut corr = nearest_correlation(&raw_corr);
    let lambda = params.correlation_shrinkage;
    if lambda > 0.0 {
        let n = corr.nrows();
        corr = corr * (1.0 - lambda) + DMatrix::identity(n, n) * lambda;
    }
    let factor = sqrt_factor(&corr);
    let p = real.n_cols();

    // Draws stay sequential so the output is independent of thread count.
    let mut g = vec![0.0; n_out * p];
    for x in g.iter_mut() {
        *x = StandardNormal.sample(rng);
    }

    let rows: Vec<Vec<Cell>> = par::map_range(n_out, |i| {
        let gi = &g[i * p..(i + 1) * p];
        (0..p)
            .map(|a| {
                let z: f64 = (0..p).map(|b| factor[(a, b)] * gi[b]).sum();
                let u = normal.cdf(z);
                marginals[a].inverse(u)
            })
            .collect()
    });

    let columns = (0..p)
        .map(|j| match &marginals[j] {
            Marginal::Continuous(_) => Column::Continuous(
                rows.iter()
                    .map(|r| match r[j] {
                        Cell::Num(x) => x,
                        Cell::Cat(_) => unreachable!(),
                    })
                    .collect(),
            ),
            Marginal::Categorical(_) => Column::Categorical(
                rows.iter()
                    .map(|r| match r[j] {
                        Cell::Cat(c) => c,
                        Cell::Num(_) => unreachable!(),
                    })
                    .collect(),
            ),
        })
        .collect();
    if lambda > 0.0 {
        notes.push(format!("correlation shrunk toward identity by {lambda}"));
    }
    Ok(GeneratorOutput { dataset: Dataset::new(real.schema().clone(), columns)?, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::rng::derive_stream;
    use crate::tabular::{ColumnSpec, Schema};

    #[test]
    fn nearest_correlation_repairs_indefinite_matrix() {
        // Pairwise-consistent but jointly impossible correlations.
        let r = DMatrix::from_row_slice(3, 3, &[1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0]);
        assert!(SymmetricEigen::new(r.clone()).eigenvalues.min() < 0.0);
        let c = nearest_correlation(&r);
        assert!(SymmetricEigen::new(c.clone()).eigenvalues.min() > -1e-12);
        for i in 0..3 {
            assert!((c[(i, i)] - 1.0).abs() < 1e-15);
        }
        assert!((c.clone() - c.transpose()).abs().max() < 1e-12);
    }

    #[test]
    fn constant_column_stays_constant() {
        let s = Schema::new(vec![ColumnSpec::continuous("x"), ColumnSpec::continuous("k")]).unwrap();
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let real = Dataset::new(s, vec![Column::Continuous(x), Column::Continuous(vec![3.5; 50])]).unwrap();
        let out = generate_rsd(&real, &RsdParams::default(), 200, &mut derive_stream(1, "g")).unwrap();
        assert!(out.dataset.column(1).as_continuous().unwrap().iter().all(|&v| v == 3.5));
        assert_eq!(out.notes.len(), 1);
    }

    #[test]
    fn single_row_within_bounds_and_too_few_rows() {
        let s = Schema::new(vec![ColumnSpec::continuous("x"), ColumnSpec::categorical("c", ["a", "b", "z"])]).unwrap();
        let x: Vec<f64> = (0..12).map(|i| (i * i) as f64).collect();
        let c: Vec<u32> = (0..12).map(|i| (i % 2) as u32).collect();
        let real = Dataset::new(s.clone(), vec![Column::Continuous(x), Column::Categorical(c)]).unwrap();
        let out = generate_rsd(&real, &RsdParams::default(), 1, &mut derive_stream(3, "g")).unwrap();
        assert_eq!(out.dataset.n_rows(), 1);
        let v = out.dataset.column(0).as_continuous().unwrap()[0];
        assert!((0.0..=121.0).contains(&v));
        // Category `z` never occurs in the real data.
        let many = generate_rsd(&real, &RsdParams::default(), 500, &mut derive_stream(3, "g")).unwrap();
        assert!(many.dataset.column(1).as_categorical().unwrap().iter().all(|&c| c < 2));

        let small = real.take_rows(&[0, 1, 2]);
        assert!(matches!(
            generate_rsd(&small, &RsdParams::default(), 5, &mut derive_stream(3, "g")),
            Err(GenerateError::TooFewRows(3))
        ));
    }

    #[test]
    fn deterministic_given_stream() {
        let s = Schema::new(vec![ColumnSpec::continuous("x"), ColumnSpec::continuous("y")]).unwrap();
        let x: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let y: Vec<f64> = (0..40).map(|i| (i as f64).cos()).collect();
        let real = Dataset::new(s, vec![Column::Continuous(x), Column::Continuous(y)]).unwrap();
        let a = generate_rsd(&real, &RsdParams::default(), 100, &mut derive_stream(9, "g")).unwrap();
        let b = generate_rsd(&real, &RsdParams::default(), 100, &mut derive_stream(9, "g")).unwrap();
        assert_eq!(a.dataset, b.dataset);
    }
}
