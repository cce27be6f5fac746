//! Kind-specific node parameters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::eval::privacy::PrivacyConfig;
use crate::generators::Method;
use crate::tabular::{MissingPolicy, Schema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Load,
    Preprocess,
    Generate,
    EvaluateDiagnostic,
    EvaluateUtility,
    EvaluatePrivacy,
    Report,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Load => "load",
            NodeKind::Preprocess => "preprocess",
            NodeKind::Generate => "generate",
            NodeKind::EvaluateDiagnostic => "evaluate_diagnostic",
            NodeKind::EvaluateUtility => "evaluate_utility",
            NodeKind::EvaluatePrivacy => "evaluate_privacy",
            NodeKind::Report => "report",
        }
    }

    pub fn is_evaluate(self) -> bool {
        matches!(self, NodeKind::EvaluateDiagnostic | NodeKind::EvaluateUtility | NodeKind::EvaluatePrivacy)
    }

    /// Nodes whose output is (derived from) real data without synthesis.
    pub fn yields_real_data(self) -> bool {
        matches!(self, NodeKind::Load | NodeKind::Preprocess)
    }

    /// Name of the single artifact a node of this kind produces.
    pub fn artifact_name(self) -> &'static str {
        match self {
            NodeKind::Load | NodeKind::Preprocess => "dataset",
            NodeKind::Generate => "synthetic",
            NodeKind::EvaluateDiagnostic | NodeKind::EvaluateUtility | NodeKind::EvaluatePrivacy => "metrics",
            NodeKind::Report => "report",
        }
    }
}

impl std::fmt::Display for NodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadParams {
    /// Key into the pipeline spec's `inputs`.
    pub input: String,
    #[serde(default)]
    pub missing_policy: MissingPolicy,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessParams {
    /// Keep only these columns, in this order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<String>>,
    /// Clamp continuous values into their schema bounds.
    #[serde(default)]
    pub clip_to_bounds: bool,
    #[serde(default)]
    pub drop_duplicates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateParams {
    pub n_out: usize,
    pub method: Method,
    /// Output schema for generators that run without a real-data dependency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<Schema>,
}

impl GenerateParams {
    pub fn config(&self) -> crate::generators::GeneratorConfig {
        crate::generators::GeneratorConfig { n_out: self.n_out, method: self.method.clone() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticParams {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityMetric {
    UnivariateFidelity,
    BivariateFidelity,
    Pmse,
    PmseStandardized,
    PmseRatio,
    Specks,
}

impl UtilityMetric {
    pub const ALL: [UtilityMetric; 6] = [
        UtilityMetric::UnivariateFidelity,
        UtilityMetric::BivariateFidelity,
        UtilityMetric::Pmse,
        UtilityMetric::PmseStandardized,
        UtilityMetric::PmseRatio,
        UtilityMetric::Specks,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            UtilityMetric::UnivariateFidelity => "univariate_fidelity",
            UtilityMetric::BivariateFidelity => "bivariate_fidelity",
            UtilityMetric::Pmse => "pmse",
            UtilityMetric::PmseStandardized => "pmse_standardized",
            UtilityMetric::PmseRatio => "pmse_ratio",
            UtilityMetric::Specks => "specks",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullKind {
    Permutation,
    Analytic,
}

pub const DEFAULT_PERMUTATIONS: usize = 50;

fn default_permutations() -> usize {
    DEFAULT_PERMUTATIONS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullConfig {
    pub kind: NullKind,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
}

impl Default for NullConfig {
    fn default() -> Self {
        Self { kind: NullKind::Permutation, permutations: DEFAULT_PERMUTATIONS }
    }
}

fn all_utility() -> Vec<UtilityMetric> {
    UtilityMetric::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityParams {
    #[serde(default = "all_utility")]
    pub metrics: Vec<UtilityMetric>,
    #[serde(default)]
    pub null: NullConfig,
}

impl Default for UtilityParams {
    fn default() -> Self {
        Self { metrics: all_utility(), null: NullConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrivacyMetric {
    CategoricalCap,
    NewRowSynthesis,
    InferenceAttack,
    Tcap,
    MinNnDistance,
    SampleOverlap,
}

impl PrivacyMetric {
    pub const ALL: [PrivacyMetric; 6] = [
        PrivacyMetric::CategoricalCap,
        PrivacyMetric::NewRowSynthesis,
        PrivacyMetric::InferenceAttack,
        PrivacyMetric::Tcap,
        PrivacyMetric::MinNnDistance,
        PrivacyMetric::SampleOverlap,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PrivacyMetric::CategoricalCap => "categorical_cap",
            PrivacyMetric::NewRowSynthesis => "new_row_synthesis",
            PrivacyMetric::InferenceAttack => "inference_attack",
            PrivacyMetric::Tcap => "tcap",
            PrivacyMetric::MinNnDistance => "min_nn_distance",
            PrivacyMetric::SampleOverlap => "sample_overlap",
        }
    }

    /// Metrics that need key and sensitive columns.
    pub fn needs_keys(self) -> bool {
        matches!(self, PrivacyMetric::CategoricalCap | PrivacyMetric::InferenceAttack | PrivacyMetric::Tcap)
    }
}

fn all_privacy() -> Vec<PrivacyMetric> {
    PrivacyMetric::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacyParams {
    #[serde(default = "all_privacy")]
    pub metrics: Vec<PrivacyMetric>,
    #[serde(default)]
    pub config: PrivacyConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportParams {
    /// Metric name to bound; the comparison sense follows the metric's direction.
    #[serde(default)]
    pub thresholds: BTreeMap<String, f64>,
}

/// Typed parameters; the variant determines the node kind.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeParams {
    Load(LoadParams),
    Preprocess(PreprocessParams),
    Generate(GenerateParams),
    EvaluateDiagnostic(DiagnosticParams),
    EvaluateUtility(UtilityParams),
    EvaluatePrivacy(PrivacyParams),
    Report(ReportParams),
}

impl NodeParams {
    pub fn kind(&self) -> NodeKind {
        match self {
            NodeParams::Load(_) => NodeKind::Load,
            NodeParams::Preprocess(_) => NodeKind::Preprocess,
            NodeParams::Generate(_) => NodeKind::Generate,
            NodeParams::EvaluateDiagnostic(_) => NodeKind::EvaluateDiagnostic,
            NodeParams::EvaluateUtility(_) => NodeKind::EvaluateUtility,
            NodeParams::EvaluatePrivacy(_) => NodeKind::EvaluatePrivacy,
            NodeParams::Report(_) => NodeKind::Report,
        }
    }

    pub(crate) fn from_value(kind: NodeKind, v: serde_json::Value) -> serde_json::Result<Self> {
        use serde_json::from_value as f;
        Ok(match kind {
            NodeKind::Load => NodeParams::Load(f(v)?),
            NodeKind::Preprocess => NodeParams::Preprocess(f(v)?),
            NodeKind::Generate => NodeParams::Generate(f(v)?),
            NodeKind::EvaluateDiagnostic => NodeParams::EvaluateDiagnostic(f(v)?),
            NodeKind::EvaluateUtility => NodeParams::EvaluateUtility(f(v)?),
            NodeKind::EvaluatePrivacy => NodeParams::EvaluatePrivacy(f(v)?),
            NodeKind::Report => NodeParams::Report(f(v)?),
        })
    }

    pub(crate) fn to_value(&self) -> serde_json::Result<serde_json::Value> {
        use serde_json::to_value as t;
        match self {
            NodeParams::Load(p) => t(p),
            NodeParams::Preprocess(p) => t(p),
            NodeParams::Generate(p) => t(p),
            NodeParams::EvaluateDiagnostic(p) => t(p),
            NodeParams::EvaluateUtility(p) => t(p),
            NodeParams::EvaluatePrivacy(p) => t(p),
            NodeParams::Report(p) => t(p),
        }
    }

    /// Metric names this node will emit (empty for non-evaluate nodes).
    pub fn metric_names(&self) -> Vec<&'static str> {
        match self {
            NodeParams::EvaluateDiagnostic(_) => vec![crate::eval::diagnostic::METRIC_NAME],
            NodeParams::EvaluateUtility(p) => p.metrics.iter().map(|m| m.as_str()).collect(),
            NodeParams::EvaluatePrivacy(p) => p.metrics.iter().map(|m| m.as_str()).collect(),
            _ => Vec::new(),
        }
    }
}
