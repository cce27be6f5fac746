//! Disclosure-risk metrics: correct attribution (CAP, TCAP), inference
//! attack lift, new-row synthesis, nearest-neighbour distance and sample
//! overlap.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::engine::rng::RngStream;
use crate::par;
use crate::spec::PrivacyMetric;
use crate::tabular::{Cell, Column, ColumnKind, Dataset, Schema};

use super::{Direction, EvalError, MetricResult, Provenance};

fn default_tolerance() -> f64 {
    0.01
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacyConfig {
    #[serde(default)]
    pub key_columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitive_column: Option<String>,
    #[serde(default = "default_tolerance")]
    pub numeric_match_tolerance: f64,
    #[serde(default = "one")]
    pub tcap_homogeneity: f64,
    #[serde(default = "one")]
    pub overlap_sample_fraction: f64,
}

impl Default for PrivacyConfig {
    fn default() -> Self {
        Self {
            key_columns: Vec::new(),
            sensitive_column: None,
            numeric_match_tolerance: default_tolerance(),
            tcap_homogeneity: 1.0,
            overlap_sample_fraction: 1.0,
        }
    }
}

impl PrivacyConfig {
    pub fn new(keys: &[&str], sensitive: &str) -> Self {
        Self {
            key_columns: keys.iter().map(|s| s.to_string()).collect(),
            sensitive_column: Some(sensitive.to_string()),
            ..Self::default()
        }
    }

    /// Checks that do not need a schema. `keyed` is whether any selected
    /// metric uses the key and sensitive columns.
    pub fn validate_shape(&self, keyed: bool) -> Result<(), EvalError> {
        let bad = |m: &str| Err(EvalError::Config(m.to_string()));
        if !(self.numeric_match_tolerance >= 0.0 && self.numeric_match_tolerance.is_finite()) {
            return bad("numeric_match_tolerance must be a finite non-negative number");
        }
        if !(self.tcap_homogeneity > 0.0 && self.tcap_homogeneity <= 1.0) {
            return bad("tcap_homogeneity must be in (0, 1]");
        }
        if !(self.overlap_sample_fraction > 0.0 && self.overlap_sample_fraction <= 1.0) {
            return bad("overlap_sample_fraction must be in (0, 1]");
        }
        if keyed {
            let Some(sensitive) = &self.sensitive_column else {
                return bad("sensitive_column is required");
            };
            if self.key_columns.is_empty() {
                return bad("key_columns must not be empty");
            }
            if self.key_columns.contains(sensitive) {
                return bad("sensitive_column must not be a key column");
            }
            let unique: HashSet<&String> = self.key_columns.iter().collect();
            if unique.len() != self.key_columns.len() {
                return bad("key_columns contains duplicates");
            }
        }
        Ok(())
    }

    /// Full check against a schema: named columns exist and are categorical.
    pub fn validate(&self, schema: &Schema, keyed: bool) -> Result<(), EvalError> {
        self.validate_shape(keyed)?;
        if keyed {
            for name in self.key_columns.iter().chain(self.sensitive_column.iter()) {
                match schema.column(name) {
                    None => return Err(EvalError::Config(format!("unknown column `{name}`"))),
                    Some(c) if c.kind != ColumnKind::Categorical => {
                        return Err(EvalError::Config(format!("column `{name}` must be categorical")))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }
}

fn check_schemas(real: &Dataset, synth: &Dataset) -> Result<(), EvalError> {
    if real.schema().is_structurally_equal(synth.schema()) {
        Ok(())
    } else {
        Err(EvalError::SchemaMismatch)
    }
}

/// Key columns and sensitive column as code slices, plus the sensitive
/// column's category count.
struct Keyed<'a> {
    keys: Vec<&'a [u32]>,
    sensitive: &'a [u32],
}

impl<'a> Keyed<'a> {
    fn new(d: &'a Dataset, cfg: &PrivacyConfig) -> Self {
        let cat = |name: &str| d.column_by_name(name).and_then(Column::as_categorical).expect("config validated");
        Keyed {
            keys: cfg.key_columns.iter().map(|k| cat(k)).collect(),
            sensitive: cat(cfg.sensitive_column.as_deref().expect("config validated")),
        }
    }

    fn key(&self, row: usize) -> Vec<u32> {
        self.keys.iter().map(|c| c[row]).collect()
    }

    fn len(&self) -> usize {
        self.sensitive.len()
    }
}

fn prepare<'a>(
    real: &'a Dataset,
    synth: &'a Dataset,
    cfg: &PrivacyConfig,
) -> Result<(Keyed<'a>, Keyed<'a>, usize), EvalError> {
    check_schemas(real, synth)?;
    cfg.validate(real.schema(), true)?;
    let m = real.schema().column(cfg.sensitive_column.as_deref().unwrap()).unwrap().n_categories();
    Ok((Keyed::new(real, cfg), Keyed::new(synth, cfg), m))
}

/// Sensitive-value counts per key combination.
fn group_counts(d: &Keyed, m: usize) -> HashMap<Vec<u32>, Vec<u64>> {
    let mut groups: HashMap<Vec<u32>, Vec<u64>> = HashMap::new();
    for i in 0..d.len() {
        groups.entry(d.key(i)).or_insert_with(|| vec![0; m])[d.sensitive[i] as usize] += 1;
    }
    groups
}

/// Modal category (lowest index on ties), its count and the group total.
fn modal(counts: &[u64]) -> (u32, u64, u64) {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    (best as u32, counts[best], counts.iter().sum())
}

/// `1 - mean attribution`, where a real row's attribution is the share of
/// synthetic rows with its key combination that also carry its sensitive
/// value. Real rows without a key match are excluded.
pub fn categorical_cap(real: &Dataset, synth: &Dataset, cfg: &PrivacyConfig) -> Result<MetricResult, EvalError> {
    let (r, s, m) = prepare(real, synth, cfg)?;
    let groups = group_counts(&s, m);
    let mut total = 0.0;
    let mut matched = 0usize;
    for i in 0..r.len() {
        if let Some(counts) = groups.get(&r.key(i)) {
            let n: u64 = counts.iter().sum();
            total += counts[r.sensitive[i] as usize] as f64 / n as f64;
            matched += 1;
        }
    }
    let unmatched = r.len() - matched;
    let base = |score| {
        MetricResult::new("categorical_cap", score, Direction::HigherBetter, Provenance::Privacy)
            .with("matched_rows", matched as u64)
            .with("unmatched_rows", unmatched as u64)
    };
    if matched == 0 {
        return Ok(base(1.0).flag("undefined-baseline"));
    }
    let rate = total / matched as f64;
    Ok(base(1.0 - rate).with("attribution_rate", rate))
}

/// Normalized lift of a per-key modal classifier trained on the synthetic
/// data and applied to the real rows, over the real majority-class rate.
pub fn inference_attack_score(real: &Dataset, synth: &Dataset, cfg: &PrivacyConfig) -> Result<MetricResult, EvalError> {
    let (r, s, m) = prepare(real, synth, cfg)?;
    let model: HashMap<Vec<u32>, u32> = group_counts(&s, m).into_iter().map(|(k, c)| (k, modal(&c).0)).collect();
    let mut real_counts = vec![0u64; m];
    r.sensitive.iter().for_each(|&v| real_counts[v as usize] += 1);
    let baseline = if r.len() == 0 { 1.0 } else { modal(&real_counts).1 as f64 / r.len() as f64 };
    let (mut predicted, mut correct) = (0u64, 0u64);
    for i in 0..r.len() {
        if let Some(&guess) = model.get(&r.key(i)) {
            predicted += 1;
            correct += u64::from(guess == r.sensitive[i]);
        }
    }
    let base = |score| {
        MetricResult::new("inference_attack", score, Direction::LowerBetter, Provenance::Privacy)
            .with("baseline", baseline)
            .with("predicted_rows", predicted)
            .with("unpredicted_rows", r.len() as u64 - predicted)
    };
    if baseline >= 1.0 {
        return Ok(base(0.0).flag("degenerate-baseline"));
    }
    if predicted == 0 {
        return Ok(base(0.0).flag("no-predicted-rows"));
    }
    let accuracy = correct as f64 / predicted as f64;
    let score = ((accuracy - baseline) / (1.0 - baseline)).max(0.0);
    Ok(base(score).with("accuracy", accuracy))
}

/// Share of real rows in attackable key groups whose sensitive value equals
/// the group's synthetic modal value. A group is attackable when its modal
/// proportion reaches `tcap_homogeneity`.
pub fn tcap(real: &Dataset, synth: &Dataset, cfg: &PrivacyConfig) -> Result<MetricResult, EvalError> {
    let (r, s, m) = prepare(real, synth, cfg)?;
    let attackable: HashMap<Vec<u32>, u32> = group_counts(&s, m)
        .into_iter()
        .filter_map(|(k, c)| {
            let (v, count, total) = modal(&c);
            (count as f64 / total as f64 >= cfg.tcap_homogeneity).then_some((k, v))
        })
        .collect();
    let (mut n, mut hits) = (0u64, 0u64);
    for i in 0..r.len() {
        if let Some(&v) = attackable.get(&r.key(i)) {
            n += 1;
            hits += u64::from(v == r.sensitive[i]);
        }
    }
    let base = |score| {
        MetricResult::new("tcap", score, Direction::LowerBetter, Provenance::Privacy)
            .with("attackable_rows", n)
            .with("attackable_groups", attackable.len() as u64)
            .with("homogeneity", cfg.tcap_homogeneity)
    };
    if n == 0 {
        return Ok(base(0.0).flag("no-attackable-records"));
    }
    Ok(base(hits as f64 / n as f64))
}

/// Whether synthetic value `s` is within relative tolerance of real value `r`.
pub fn numeric_match(s: f64, r: f64, tol: f64) -> bool {
    if r == 0.0 {
        s.abs() <= tol
    } else {
        (s - r).abs() <= tol * r.abs()
    }
}

/// Fraction of synthetic rows that match no real row: categorical cells
/// equal and continuous cells within relative tolerance `tol`.
pub fn new_row_synthesis(real: &Dataset, synth: &Dataset, tol: f64) -> Result<MetricResult, EvalError> {
    check_schemas(real, synth)?;
    if synth.is_empty() {
        return Err(EvalError::Precondition("synthetic dataset is empty".into()));
    }
    let cats: Vec<usize> = (0..real.n_cols()).filter(|&j| matches!(real.column(j), Column::Categorical(_))).collect();
    let conts: Vec<usize> = (0..real.n_cols()).filter(|&j| matches!(real.column(j), Column::Continuous(_))).collect();
    let cat_key = |d: &Dataset, i: usize| -> Vec<u32> { cats.iter().map(|&j| d.column(j).as_categorical().unwrap()[i]).collect() };
    fn cont(d: &Dataset, j: usize) -> &[f64] {
        d.column(j).as_continuous().unwrap()
    }

    // Real rows grouped by categorical tuple, sorted by the first continuous column.
    let mut groups: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    for i in 0..real.n_rows() {
        groups.entry(cat_key(real, i)).or_default().push(i);
    }
    if let Some(&p) = conts.first() {
        let pivot = cont(real, p);
        for rows in groups.values_mut() {
            rows.sort_by(|&a, &b| pivot[a].total_cmp(&pivot[b]));
        }
    }

    let is_match = |si: usize, ri: usize| conts.iter().all(|&j| numeric_match(cont(synth, j)[si], cont(real, j)[ri], tol));
    let matches_any = |si: usize| -> bool {
        let Some(rows) = groups.get(&cat_key(synth, si)) else {
            return false;
        };
        let Some(&p) = conts.first() else {
            return true;
        };
        if tol >= 1.0 {
            return rows.iter().any(|&ri| is_match(si, ri));
        }
        let (pivot_r, s) = (cont(real, p), cont(synth, p)[si]);
        // Any matching r satisfies |s - r| <= max(tol |s| / (1 - tol), tol).
        let half = (tol * s.abs() / (1.0 - tol)).max(tol) * (1.0 + 1e-9) + f64::MIN_POSITIVE;
        let lo = rows.partition_point(|&ri| pivot_r[ri] < s - half);
        rows[lo..].iter().take_while(|&&ri| pivot_r[ri] <= s + half).any(|&ri| is_match(si, ri))
    };
    let novel: usize = par::map_chunks(synth.n_rows(), 1024, |range| range.filter(|&i| !matches_any(i)).count())
        .into_iter()
        .sum();
    let score = novel as f64 / synth.n_rows() as f64;
    Ok(MetricResult::new("new_row_synthesis", score, Direction::HigherBetter, Provenance::Privacy)
        .with("novel_rows", novel as u64)
        .with("tolerance", tol))
}

/// Minimum Gower distance between any synthetic row and any real row, with
/// continuous ranges taken from the real data.
///
/// The result equals the exhaustive minimum. Real rows are grouped by their
/// categorical cells and sorted within each group on one continuous column.
/// A synthetic row scans its own group outward from its position, and other
/// groups only while their categorical mismatches alone could still beat the
/// best distance so far.
pub fn min_nn_distance(real: &Dataset, synth: &Dataset) -> Result<MetricResult, EvalError> {
    check_schemas(real, synth)?;
    if real.is_empty() || synth.is_empty() {
        return Err(EvalError::Precondition("nearest-neighbour distance needs non-empty datasets".into()));
    }
    let result = |d: f64| MetricResult::new("min_nn_distance", d, Direction::HigherBetter, Provenance::Privacy);
    let real_rows: HashSet<Vec<Cell>> = (0..real.n_rows()).map(|i| real.row(i)).collect();
    if (0..synth.n_rows()).any(|i| real_rows.contains(&synth.row(i))) {
        return Ok(result(0.0).with("exact_copy", true));
    }
    drop(real_rows);

    let p = real.n_cols() as f64;
    let spans: Vec<f64> = real.gower_ranges().iter().map(|r| r.map_or(0.0, |(lo, hi)| hi - lo)).collect();
    let (cols, scols) = (real.columns(), synth.columns());
    let dist = |si: usize, ri: usize| -> f64 {
        let mut acc = 0.0;
        for j in 0..cols.len() {
            acc += match (&scols[j], &cols[j]) {
                (Column::Continuous(s), Column::Continuous(r)) => {
                    if spans[j] > 0.0 {
                        ((s[si] - r[ri]).abs() / spans[j]).min(1.0)
                    } else {
                        0.0
                    }
                }
                (Column::Categorical(s), Column::Categorical(r)) => f64::from(u8::from(s[si] != r[ri])),
                _ => unreachable!("schemas checked"),
            };
        }
        acc / p
    };
    let cat_cols: Vec<(&[u32], &[u32])> = cols
        .iter()
        .zip(scols)
        .filter_map(|(r, s)| Some((r.as_categorical()?, s.as_categorical()?)))
        .collect();
    let pivot = (0..cols.len()).find(|&j| matches!(cols[j], Column::Continuous(_)) && spans[j] > 0.0);
    let (rv, sv, span) = match pivot {
        Some(j) => (cols[j].as_continuous().unwrap(), scols[j].as_continuous().unwrap(), spans[j]),
        None => (&[][..], &[][..], 1.0),
    };

    // Real rows grouped by categorical tuple, each group sorted on the pivot.
    let mut by_key: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    for i in 0..real.n_rows() {
        by_key.entry(cat_cols.iter().map(|(r, _)| r[i]).collect()).or_default().push(i);
    }
    let mut groups: Vec<(Vec<u32>, Vec<usize>, Vec<f64>)> = by_key
        .into_iter()
        .map(|(k, mut rows)| {
            if pivot.is_some() {
                rows.sort_by(|&a, &b| rv[a].total_cmp(&rv[b]));
            } else {
                rows.truncate(1);
            }
            let values = rows.iter().map(|&i| if pivot.is_some() { rv[i] } else { 0.0 }).collect();
            (k, rows, values)
        })
        .collect();
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    let group_of: HashMap<&[u32], usize> = groups.iter().enumerate().map(|(g, (k, _, _))| (k.as_slice(), g)).collect();

    // Lower bounds carry a relative slack that covers summation rounding.
    const SLACK: f64 = 1.0 - 1e-12;
    let best = AtomicU64::new(f64::INFINITY.to_bits());
    let current = || f64::from_bits(best.load(Ordering::Relaxed));
    let scan = |si: usize, g: usize, mismatches: f64, mut local: f64| -> f64 {
        let (_, rows, values) = &groups[g];
        let lower = |k: usize| {
            let t = if pivot.is_some() { ((sv[si] - values[k]).abs() / span).min(1.0) } else { 0.0 };
            (mismatches + t) / p * SLACK
        };
        let start = if pivot.is_some() { values.partition_point(|&v| v < sv[si]) } else { 0 };
        let mut up = start;
        while up < rows.len() && lower(up) < local {
            local = local.min(dist(si, rows[up]));
            up += 1;
        }
        let mut down = start;
        while down > 0 && lower(down - 1) < local {
            local = local.min(dist(si, rows[down - 1]));
            down -= 1;
        }
        local
    };

    par::map_chunks(synth.n_rows(), 256, |range| {
        for si in range {
            let mut local = current();
            if local == 0.0 {
                return;
            }
            let key: Vec<u32> = cat_cols.iter().map(|(_, s)| s[si]).collect();
            let own = group_of.get(key.as_slice()).copied();
            if let Some(g) = own {
                local = scan(si, g, 0.0, local);
            }
            if 1.0 / p * SLACK < local {
                for g in 0..groups.len() {
                    if Some(g) == own {
                        continue;
                    }
                    let m = groups[g].0.iter().zip(&key).filter(|(a, b)| a != b).count() as f64;
                    if m / p * SLACK < local {
                        local = scan(si, g, m, local);
                    }
                }
            }
            // Non-negative f64 bit patterns order like the values.
            best.fetch_min(local.to_bits(), Ordering::Relaxed);
        }
    });
    Ok(result(current()).with("exact_copy", false))
}

/// Share of sampled real rows with an exact copy among the sampled synthetic
/// rows. Each side samples `ceil(fraction * n)` rows without replacement
/// from its canonical row order.
pub fn sample_overlap(real: &Dataset, synth: &Dataset, fraction: f64, rng: &RngStream) -> Result<MetricResult, EvalError> {
    check_schemas(real, synth)?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(EvalError::Config("overlap_sample_fraction must be in (0, 1]".into()));
    }
    if real.is_empty() || synth.is_empty() {
        return Err(EvalError::Precondition("sample overlap needs non-empty datasets".into()));
    }
    let sample = |d: &Dataset, label: &str| -> Vec<usize> {
        let order = d.canonical_row_order();
        let k = ((fraction * d.n_rows() as f64).ceil() as usize).clamp(1, d.n_rows());
        if k == d.n_rows() {
            return order;
        }
        let mut stream = rng.substream(label);
        index::sample(&mut stream, order.len(), k).into_iter().map(|i| order[i]).collect()
    };
    let (rs, ss) = (sample(real, "overlap/real"), sample(synth, "overlap/synth"));
    let synth_rows: HashSet<Vec<Cell>> = ss.iter().map(|&i| synth.row(i)).collect();
    let hits = rs.iter().filter(|&&i| synth_rows.contains(&real.row(i))).count();
    Ok(MetricResult::new("sample_overlap", hits as f64 / rs.len() as f64, Direction::LowerBetter, Provenance::Privacy)
        .with("sampled_real", rs.len() as u64)
        .with("sampled_synthetic", ss.len() as u64)
        .with("fraction", fraction))
}

/// Computes the selected privacy metrics, in the order requested.
pub fn evaluate_privacy(
    real: &Dataset,
    synth: &Dataset,
    metrics: &[PrivacyMetric],
    cfg: &PrivacyConfig,
    rng: &RngStream,
) -> Result<Vec<MetricResult>, EvalError> {
    check_schemas(real, synth)?;
    cfg.validate(real.schema(), metrics.iter().any(|m| m.needs_keys()))?;
    par::map_range(metrics.len(), |i| match metrics[i] {
        PrivacyMetric::CategoricalCap => categorical_cap(real, synth, cfg),
        PrivacyMetric::NewRowSynthesis => new_row_synthesis(real, synth, cfg.numeric_match_tolerance),
        PrivacyMetric::InferenceAttack => inference_attack_score(real, synth, cfg),
        PrivacyMetric::Tcap => tcap(real, synth, cfg),
        PrivacyMetric::MinNnDistance => min_nn_distance(real, synth),
        PrivacyMetric::SampleOverlap => sample_overlap(real, synth, cfg.overlap_sample_fraction, rng),
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::rng::derive_stream;
    use crate::tabular::{gower_distance, ColumnSpec};

    fn cat_schema() -> Schema {
        Schema::new(vec![
            ColumnSpec::categorical("k", ["a", "b"]),
            ColumnSpec::categorical("s", ["x", "y", "z"]),
        ])
        .unwrap()
    }

    fn cat(k: &[u32], s: &[u32]) -> Dataset {
        Dataset::new(cat_schema(), vec![Column::Categorical(k.to_vec()), Column::Categorical(s.to_vec())]).unwrap()
    }

    fn cfg() -> PrivacyConfig {
        PrivacyConfig::new(&["k"], "s")
    }

    #[test]
    fn config_checks() {
        assert!(PrivacyConfig::default().validate_shape(false).is_ok());
        assert!(PrivacyConfig::default().validate_shape(true).is_err());
        assert!(PrivacyConfig::new(&["s"], "s").validate_shape(true).is_err());
        let bad = PrivacyConfig { tcap_homogeneity: 0.0, ..cfg() };
        assert!(bad.validate_shape(true).is_err());
        assert!(PrivacyConfig::new(&["nope"], "s").validate(&cat_schema(), true).is_err());
    }

    #[test]
    fn cap_hand_values() {
        let real = cat(&[0, 0, 1], &[0, 1, 2]);
        assert_eq!(categorical_cap(&real, &real, &cfg()).unwrap().score, 1.0 - (0.5 + 0.5 + 1.0) / 3.0);
        let disjoint = cat(&[1], &[0]);
        let m = categorical_cap(&cat(&[0], &[0]), &disjoint, &cfg()).unwrap();
        assert_eq!(m.score, 1.0);
        assert_eq!(m.flags(), ["undefined-baseline"]);
    }

    #[test]
    fn inference_hand_values() {
        let real = cat(&[0, 0, 1, 1], &[0, 0, 1, 1]);
        assert_eq!(inference_attack_score(&real, &real, &cfg()).unwrap().score, 1.0);
        // Synthetic predicts x for every key: accuracy 0.5 equals the baseline.
        let synth = cat(&[0, 1], &[0, 0]);
        assert_eq!(inference_attack_score(&real, &synth, &cfg()).unwrap().score, 0.0);
        let constant = cat(&[0, 1], &[2, 2]);
        let m = inference_attack_score(&constant, &constant, &cfg()).unwrap();
        assert_eq!((m.score, m.flags()), (0.0, vec!["degenerate-baseline"]));
    }

    #[test]
    fn tcap_hand_values() {
        let real = cat(&[0, 0, 1, 1], &[0, 0, 1, 1]);
        assert_eq!(tcap(&real, &real, &cfg()).unwrap().score, 1.0);
        let mixed = cat(&[0, 0, 1, 1], &[0, 1, 1, 2]);
        let m = tcap(&real, &mixed, &cfg()).unwrap();
        assert_eq!((m.score, m.flags()), (0.0, vec!["no-attackable-records"]));
        let half = PrivacyConfig { tcap_homogeneity: 0.5, ..cfg() };
        // Modal values (lowest index on ties): key a -> x, key b -> y.
        assert_eq!(tcap(&real, &mixed, &half).unwrap().score, 1.0);
    }

    fn cont(x: &[f64], c: &[u32]) -> Dataset {
        let s = Schema::new(vec![ColumnSpec::continuous("x"), ColumnSpec::categorical("c", ["a", "b"])]).unwrap();
        Dataset::new(s, vec![Column::Continuous(x.to_vec()), Column::Categorical(c.to_vec())]).unwrap()
    }

    #[test]
    fn new_row_tolerance_arithmetic() {
        let real = cont(&[100.0], &[0]);
        let synth = cont(&[100.5], &[0]);
        assert_eq!(new_row_synthesis(&real, &synth, 0.01).unwrap().score, 0.0);
        assert_eq!(new_row_synthesis(&real, &synth, 0.001).unwrap().score, 1.0);
        assert_eq!(new_row_synthesis(&real, &cont(&[100.5], &[1]), 0.5).unwrap().score, 1.0);
        assert_eq!(new_row_synthesis(&cont(&[0.0], &[0]), &cont(&[0.005], &[0]), 0.01).unwrap().score, 0.0);
    }

    #[test]
    fn min_nn_hand_values() {
        let real = cont(&[0.0, 10.0], &[0, 0]);
        assert_eq!(min_nn_distance(&real, &cont(&[5.0], &[0])).unwrap().score, 0.25);
        assert_eq!(min_nn_distance(&real, &real).unwrap().score, 0.0);
        let one = Schema::new(vec![ColumnSpec::categorical("c", ["a", "b"])]).unwrap();
        let a = Dataset::new(one.clone(), vec![Column::Categorical(vec![0, 0])]).unwrap();
        let b = Dataset::new(one, vec![Column::Categorical(vec![1])]).unwrap();
        assert_eq!(min_nn_distance(&a, &b).unwrap().score, 1.0);
    }

    #[test]
    fn min_nn_matches_exhaustive_search() {
        let real = cont(&[0.3, 1.7, -2.0, 4.4, 0.9, 3.1], &[0, 1, 1, 0, 0, 1]);
        let synth = cont(&[1.0, 5.0, -3.0, 2.2], &[1, 0, 0, 1]);
        let ranges = real.gower_ranges();
        let mut want = f64::INFINITY;
        for i in 0..synth.n_rows() {
            for r in 0..real.n_rows() {
                want = want.min(gower_distance(&synth.row(i), &real.row(r), real.schema(), &ranges));
            }
        }
        assert_eq!(min_nn_distance(&real, &synth).unwrap().score, want);
    }

    #[test]
    fn overlap_hand_values() {
        let rng = derive_stream(3, "privacy");
        let real = cat(&[0, 0, 1, 1], &[0, 1, 0, 1]);
        assert_eq!(sample_overlap(&real, &real, 1.0, &rng).unwrap().score, 1.0);
        assert_eq!(sample_overlap(&real, &cat(&[0], &[0]), 1.0, &rng).unwrap().score, 0.25);
        assert_eq!(sample_overlap(&real, &cat(&[0], &[2]), 1.0, &rng).unwrap().score, 0.0);
        let half = sample_overlap(&real, &real, 0.5, &rng).unwrap();
        assert_eq!(half.details["sampled_real"], 2);
        assert_eq!(half, sample_overlap(&real, &real, 0.5, &rng).unwrap());
    }
}
