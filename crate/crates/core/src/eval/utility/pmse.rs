//! Propensity-score mean squared error, its null distribution, and SPECKS.

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::engine::rng::RngStream;
use crate::eval::ks::ks_statistic;
use crate::eval::{Direction, EvalError, MetricResult, Provenance};
use crate::par;
use crate::spec::NullKind;
use crate::tabular::{Dataset, EncodedMatrix};

use super::propensity::{fit_logistic, stacked_design};

pub const MIN_PERMUTATIONS: usize = 20;

/// `(1/N) * sum((p_i - c)^2)`.
pub fn pmse_value(scores: &[f64], c: f64) -> f64 {
    scores.iter().map(|p| (p - c) * (p - c)).sum::<f64>() / scores.len() as f64
}

pub fn pmse_observed(scores: &[f64], c: f64) -> MetricResult {
    assert!(!scores.is_empty(), "pMSE needs at least one score");
    MetricResult::new("pmse", pmse_value(scores, c), Direction::LowerBetter, Provenance::Utility).with("c", c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullModel {
    pub kind: NullKind,
    /// Number of label permutations (0 for the analytic null).
    pub permutations: usize,
    pub null_mean: f64,
    pub null_sd: f64,
    pub samples: Vec<f64>,
}

/// Closed-form null for a first-order logistic model with `k` predictors:
/// mean `k c (1-c) / N`, sd `sqrt(2k) c (1-c) / N`.
pub fn analytic_null(k: usize, c: f64, n: usize) -> NullModel {
    let scale = c * (1.0 - c) / n as f64;
    NullModel {
        kind: NullKind::Analytic,
        permutations: 0,
        null_mean: k as f64 * scale,
        null_sd: (2.0 * k as f64).sqrt() * scale,
        samples: Vec::new(),
    }
}

pub fn pmse_null(
    real: &Dataset,
    synth: &Dataset,
    kind: NullKind,
    permutations: usize,
    rng: &RngStream,
) -> Result<NullModel, EvalError> {
    if real.n_rows() < 2 || synth.n_rows() < 2 {
        return Err(EvalError::Precondition("null model needs at least 2 real and 2 synthetic rows".into()));
    }
    let design = stacked_design(real, synth)?;
    pmse_null_encoded(&design, real.n_rows(), synth.n_rows(), kind, permutations, rng)
}

/// Null model on an already encoded stacked design (real rows first).
/// Permutation `b` shuffles the labels with substream `perm/<b>`.
pub fn pmse_null_encoded(
    design: &EncodedMatrix,
    n_real: usize,
    n_synth: usize,
    kind: NullKind,
    permutations: usize,
    rng: &RngStream,
) -> Result<NullModel, EvalError> {
    let n = n_real + n_synth;
    let c = n_synth as f64 / n as f64;
    match kind {
        NullKind::Analytic => Ok(analytic_null(design.n_cols, c, n)),
        NullKind::Permutation => {
            if permutations < MIN_PERMUTATIONS {
                return Err(EvalError::Precondition(format!(
                    "permutation null needs at least {MIN_PERMUTATIONS} permutations, got {permutations}"
                )));
            }
            let samples = par::map_range(permutations, |b| {
                let mut labels = base_labels(n_real, n_synth);
                labels.shuffle(&mut rng.substream(&format!("perm/{b}")));
                pmse_value(&fit_logistic(design, &labels).scores, c)
            });
            Ok(from_samples(samples))
        }
    }
}

fn base_labels(n_real: usize, n_synth: usize) -> Vec<f64> {
    (0..n_real + n_synth).map(|i| if i < n_real { 0.0 } else { 1.0 }).collect()
}

fn from_samples(samples: Vec<f64>) -> NullModel {
    let b = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / b;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (b - 1.0);
    NullModel { kind: NullKind::Permutation, permutations: samples.len(), null_mean: mean, null_sd: var.sqrt(), samples }
}

fn null_details(m: MetricResult, null: &NullModel, observed: f64) -> MetricResult {
    m.with("observed_pmse", observed)
        .with("null_kind", serde_json::to_value(null.kind).unwrap())
        .with("null_mean", null.null_mean)
        .with("null_sd", null.null_sd)
        .with("permutations", null.permutations as u64)
}

/// `(observed - null_mean) / null_sd`.
pub fn pmse_standardized(observed: f64, null: &NullModel) -> Result<MetricResult, EvalError> {
    if !(null.null_sd > 0.0) {
        return Err(EvalError::DegenerateNull("null standard deviation is zero".into()));
    }
    let score = (observed - null.null_mean) / null.null_sd;
    Ok(null_details(
        MetricResult::new("pmse_standardized", score, Direction::CenteredZero, Provenance::Utility),
        null,
        observed,
    ))
}

/// `observed / null_mean`.
pub fn pmse_ratio(observed: f64, null: &NullModel) -> Result<MetricResult, EvalError> {
    if !(null.null_mean > 0.0) {
        return Err(EvalError::DegenerateNull("null mean is zero".into()));
    }
    Ok(null_details(
        MetricResult::new("pmse_ratio", observed / null.null_mean, Direction::CenteredOne, Provenance::Utility),
        null,
        observed,
    ))
}

/// Two-sample KS distance between real and synthetic propensity scores.
pub fn specks(scores_real: &[f64], scores_synth: &[f64]) -> MetricResult {
    assert!(!scores_real.is_empty() && !scores_synth.is_empty(), "SPECKS needs both score sets");
    MetricResult::new("specks", ks_statistic(scores_real, scores_synth), Direction::LowerBetter, Provenance::Utility)
}
