//! Utility metrics: marginal and pairwise fidelity, and propensity-score
//! metrics (observed pMSE, null-standardized pMSE, pMSE ratio, SPECKS).

mod fidelity;
mod pmse;
mod propensity;

pub use fidelity::{bivariate_fidelity, univariate_fidelity};
pub use pmse::{
    analytic_null, pmse_null, pmse_null_encoded, pmse_observed, pmse_ratio, pmse_standardized, pmse_value, specks,
    NullModel, MIN_PERMUTATIONS,
};
pub use propensity::{fit_logistic, fit_propensity, stacked_design, LogisticFit, PropensityFit, PropensityModel};

use crate::engine::rng::RngStream;
use crate::spec::{NullConfig, UtilityMetric};
use crate::tabular::Dataset;

use super::{EvalError, MetricResult};

/// Computes the selected utility metrics, in the order requested. The
/// propensity model and null are fitted once and shared.
pub fn evaluate_utility(
    real: &Dataset,
    synth: &Dataset,
    metrics: &[UtilityMetric],
    null: NullConfig,
    rng: &RngStream,
) -> Result<Vec<MetricResult>, EvalError> {
    let needs_fit = metrics.iter().any(|m| {
        matches!(m, UtilityMetric::Pmse | UtilityMetric::PmseStandardized | UtilityMetric::PmseRatio | UtilityMetric::Specks)
    });
    let needs_null = metrics.iter().any(|m| matches!(m, UtilityMetric::PmseStandardized | UtilityMetric::PmseRatio));
    let fit = if needs_fit { Some(fit_propensity(real, synth)?) } else { None };
    let null_model = match (&fit, needs_null) {
        (Some(f), true) => Some(pmse_null_encoded(&f.design, f.n_real, f.n_synth, null.kind, null.permutations, rng)?),
        _ => None,
    };
    let mut out = Vec::with_capacity(metrics.len());
    for m in metrics {
        let result = match m {
            UtilityMetric::UnivariateFidelity => univariate_fidelity(real, synth)?,
            UtilityMetric::BivariateFidelity => bivariate_fidelity(real, synth)?,
            UtilityMetric::Pmse => {
                let f = fit.as_ref().unwrap();
                pmse_observed(&f.scores, f.model.c)
                    .with("converged", f.model.converged)
                    .with("iterations", f.model.iterations as u64)
                    .with("k", f.model.k as u64)
            }
            UtilityMetric::PmseStandardized => {
                let f = fit.as_ref().unwrap();
                pmse_standardized(pmse_value(&f.scores, f.model.c), null_model.as_ref().unwrap())?
            }
            UtilityMetric::PmseRatio => {
                let f = fit.as_ref().unwrap();
                pmse_ratio(pmse_value(&f.scores, f.model.c), null_model.as_ref().unwrap())?
            }
            UtilityMetric::Specks => {
                let f = fit.as_ref().unwrap();
                let (r, s) = f.scores.split_at(f.n_real);
                specks(r, s)
            }
        };
        out.push(result);
    }
    Ok(out)
}
