//! Ridge-regularized logistic regression fitted by Newton/IRLS, used as the
//! real-vs-synthetic propensity model.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::eval::EvalError;
use crate::par;
use crate::tabular::{encode, Dataset, EncodedMatrix};

pub const RIDGE: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 100;
pub const TOLERANCE: f64 = 1e-8;
/// Linear predictors are clamped here so fitted probabilities stay inside (0, 1).
const ETA_CLAMP: f64 = 35.0;
const ROWS_PER_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropensityModel {
    /// Intercept first, then one coefficient per encoded predictor.
    pub coefficients: Vec<f64>,
    /// Synthetic fraction `n_s / (n_r + n_s)`.
    pub c: f64,
    /// Number of encoded predictors.
    pub k: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Every synthetic row scored above every real row.
    pub separated: bool,
}

#[derive(Debug, Clone)]
pub struct PropensityFit {
    pub model: PropensityModel,
    /// Real rows first, then synthetic rows.
    pub scores: Vec<f64>,
    pub n_real: usize,
    pub n_synth: usize,
    pub design: EncodedMatrix,
}

#[derive(Debug, Clone)]
pub struct LogisticFit {
    pub coefficients: Vec<f64>,
    pub scores: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Encodes `real` stacked over `synth` (real rows first).
pub fn stacked_design(real: &Dataset, synth: &Dataset) -> Result<EncodedMatrix, EvalError> {
    if !real.schema().is_structurally_equal(synth.schema()) {
        return Err(EvalError::SchemaMismatch);
    }
    Ok(encode(&real.concat(synth)?)?)
}

/// Fits `P(synthetic | x)` on the stacked, encoded data.
pub fn fit_propensity(real: &Dataset, synth: &Dataset) -> Result<PropensityFit, EvalError> {
    let (n_real, n_synth) = (real.n_rows(), synth.n_rows());
    if n_real < 2 || n_synth < 2 {
        return Err(EvalError::Precondition("propensity fitting needs at least 2 real and 2 synthetic rows".into()));
    }
    let design = stacked_design(real, synth)?;
    let labels: Vec<f64> = (0..n_real + n_synth).map(|i| if i < n_real { 0.0 } else { 1.0 }).collect();
    let fit = fit_logistic(&design, &labels);
    let min_synth = fit.scores[n_real..].iter().copied().fold(f64::INFINITY, f64::min);
    let max_real = fit.scores[..n_real].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let separated = min_synth > max_real;
    let model = PropensityModel {
        coefficients: fit.coefficients,
        c: n_synth as f64 / (n_real + n_synth) as f64,
        k: design.n_cols,
        converged: fit.converged && !separated,
        iterations: fit.iterations,
        separated,
    };
    Ok(PropensityFit { model, scores: fit.scores, n_real, n_synth, design })
}

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta.clamp(-ETA_CLAMP, ETA_CLAMP)).exp())
}

fn linear_predictor(beta: &[f64], row: &[f64]) -> f64 {
    beta[0] + row.iter().zip(&beta[1..]).map(|(x, b)| x * b).sum::<f64>()
}

/// Newton-Raphson on the ridge-penalized log-likelihood (intercept not
/// penalized). Stops when the largest coefficient update is below
/// `TOLERANCE` or after `MAX_ITERATIONS`.
pub fn fit_logistic(x: &EncodedMatrix, labels: &[f64]) -> LogisticFit {
    let n = x.n_rows;
    let p = x.n_cols + 1;
    let mean = labels.iter().sum::<f64>() / n as f64;
    let mut beta = vec![0.0; p];
    beta[0] = (mean.clamp(1e-12, 1.0 - 1e-12) / (1.0 - mean.clamp(1e-12, 1.0 - 1e-12))).ln();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Upper triangle of X'WX (row-major p x p) and the gradient, per chunk.
        let partials = par::map_chunks(n, ROWS_PER_CHUNK, |range| {
            let mut h = vec![0.0; p * p];
            let mut g = vec![0.0; p];
            let mut xi = vec![0.0; p];
            xi[0] = 1.0;
            for i in range {
                let row = x.row(i);
                xi[1..].copy_from_slice(row);
                let mu = sigmoid(linear_predictor(&beta, row));
                let w = (mu * (1.0 - mu)).max(1e-10);
                let r = labels[i] - mu;
                for a in 0..p {
                    let wa = w * xi[a];
                    g[a] += r * xi[a];
                    if wa == 0.0 {
                        continue;
                    }
                    let ha = &mut h[a * p..(a + 1) * p];
                    for b in a..p {
                        ha[b] += wa * xi[b];
                    }
                }
            }
            (h, g)
        });
        let mut h = DMatrix::<f64>::zeros(p, p);
        let mut g = DVector::<f64>::zeros(p);
        for (ph, pg) in &partials {
            for a in 0..p {
                g[a] += pg[a];
                for b in a..p {
                    h[(a, b)] += ph[a * p + b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                h[(a, b)] = h[(b, a)];
            }
        }
        for a in 1..p {
            h[(a, a)] += RIDGE;
            g[a] -= RIDGE * beta[a];
        }
        let step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => match h.lu().solve(&g) {
                Some(s) => s,
                None => break,
            },
        };
        let mut max_step: f64 = 0.0;
        for a in 0..p {
            beta[a] += step[a];
            max_step = max_step.max(step[a].abs());
        }
        if !max_step.is_finite() {
            break;
        }
        if max_step < TOLERANCE {
            converged = true;
            break;
        }
    }
    let scores = par::map_range(n, |i| sigmoid(linear_predictor(&beta, x.row(i))));
    LogisticFit { coefficients: beta, scores, converged, iterations }
}
