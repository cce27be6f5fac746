use proptest::prelude::*;
use sdgflow_core::derive_stream;
use sdgflow_core::eval::privacy::{
    categorical_cap, inference_attack_score, min_nn_distance, new_row_synthesis, sample_overlap, tcap, PrivacyConfig,
};
use sdgflow_core::{Column, ColumnSpec, Dataset, Schema};

/// A keyed table: `keys[k][i]` is key column k of row i.
#[derive(Debug, Clone)]
struct Table {
    keys: Vec<Vec<u32>>,
    sensitive: Vec<u32>,
}

const KEY_LEVELS: u32 = 3;
const SENSITIVE_LEVELS: u32 = 3;

fn keyed_schema(n_keys: usize) -> Schema {
    let mut cols: Vec<ColumnSpec> =
        (0..n_keys).map(|k| ColumnSpec::categorical(format!("k{k}"), ["a", "b", "c"])).collect();
    cols.push(ColumnSpec::categorical("s", ["x", "y", "z"]));
    Schema::new(cols).unwrap()
}

fn keyed_cfg(n_keys: usize, homogeneity: f64) -> PrivacyConfig {
    let names: Vec<String> = (0..n_keys).map(|k| format!("k{k}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    PrivacyConfig { tcap_homogeneity: homogeneity, ..PrivacyConfig::new(&refs, "s") }
}

fn to_dataset(t: &Table) -> Dataset {
    let mut cols: Vec<Column> = t.keys.iter().cloned().map(Column::Categorical).collect();
    cols.push(Column::Categorical(t.sensitive.clone()));
    Dataset::new(keyed_schema(t.keys.len()), cols).unwrap()
}

fn table(n_keys: usize, rows: usize) -> impl Strategy<Value = Table> {
    (
        proptest::collection::vec(proptest::collection::vec(0..KEY_LEVELS, rows), n_keys),
        proptest::collection::vec(0..SENSITIVE_LEVELS, rows),
    )
        .prop_map(|(keys, sensitive)| Table { keys, sensitive })
}

/// Real and synthetic tables sharing a key count, 1..=12 rows each.
fn table_pair() -> impl Strategy<Value = (Table, Table)> {
    (1usize..=3, 1usize..=12, 1usize..=12).prop_flat_map(|(k, nr, ns)| (table(k, nr), table(k, ns)))
}

fn key_of(t: &Table, i: usize) -> Vec<u32> {
    t.keys.iter().map(|c| c[i]).collect()
}

/// Synthetic rows whose keys equal real row `i`, by direct enumeration.
fn matching_synth(real: &Table, i: usize, synth: &Table) -> Vec<usize> {
    (0..synth.sensitive.len()).filter(|&j| key_of(synth, j) == key_of(real, i)).collect()
}

/// Most frequent sensitive value among `rows`, lowest value on ties, and its count.
fn mode_of(t: &Table, rows: &[usize]) -> (u32, usize) {
    let mut best = (0, 0);
    for v in 0..SENSITIVE_LEVELS {
        let c = rows.iter().filter(|&&j| t.sensitive[j] == v).count();
        if c > best.1 {
            best = (v, c);
        }
    }
    best
}

fn cap_oracle(real: &Table, synth: &Table) -> Option<f64> {
    let mut sum = 0.0;
    let mut matched = 0usize;
    for i in 0..real.sensitive.len() {
        let m = matching_synth(real, i, synth);
        if m.is_empty() {
            continue;
        }
        let same = m.iter().filter(|&&j| synth.sensitive[j] == real.sensitive[i]).count();
        sum += same as f64 / m.len() as f64;
        matched += 1;
    }
    (matched > 0).then(|| 1.0 - sum / matched as f64)
}

fn tcap_oracle(real: &Table, synth: &Table, homogeneity: f64) -> Option<f64> {
    let (mut n, mut hits) = (0usize, 0usize);
    for i in 0..real.sensitive.len() {
        let m = matching_synth(real, i, synth);
        if m.is_empty() {
            continue;
        }
        let (value, count) = mode_of(synth, &m);
        if count as f64 / m.len() as f64 >= homogeneity {
            n += 1;
            hits += usize::from(value == real.sensitive[i]);
        }
    }
    (n > 0).then(|| hits as f64 / n as f64)
}

fn inference_oracle(real: &Table, synth: &Table) -> f64 {
    let all: Vec<usize> = (0..real.sensitive.len()).collect();
    let baseline = mode_of(real, &all).1 as f64 / all.len() as f64;
    let (mut predicted, mut correct) = (0usize, 0usize);
    for i in all {
        let m = matching_synth(real, i, synth);
        if !m.is_empty() {
            predicted += 1;
            correct += usize::from(mode_of(synth, &m).0 == real.sensitive[i]);
        }
    }
    if baseline >= 1.0 || predicted == 0 {
        return 0.0;
    }
    ((correct as f64 / predicted as f64 - baseline) / (1.0 - baseline)).max(0.0)
}

fn has_flag(m: &sdgflow_core::eval::MetricResult, flag: &str) -> bool {
    m.flags().contains(&flag)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cap_matches_enumeration((real, synth) in table_pair()) {
        let cfg = keyed_cfg(real.keys.len(), 1.0);
        let m = categorical_cap(&to_dataset(&real), &to_dataset(&synth), &cfg).unwrap();
        match cap_oracle(&real, &synth) {
            Some(v) => prop_assert_eq!(m.score, v),
            None => {
                prop_assert_eq!(m.score, 1.0);
                prop_assert!(has_flag(&m, "undefined-baseline"));
            }
        }
    }

    #[test]
    fn tcap_matches_enumeration((real, synth) in table_pair(), h in prop::sample::select(vec![0.3, 0.5, 0.6, 0.8, 1.0])) {
        let cfg = keyed_cfg(real.keys.len(), h);
        let m = tcap(&to_dataset(&real), &to_dataset(&synth), &cfg).unwrap();
        match tcap_oracle(&real, &synth, h) {
            Some(v) => prop_assert_eq!(m.score, v),
            None => {
                prop_assert_eq!(m.score, 0.0);
                prop_assert!(has_flag(&m, "no-attackable-records"));
            }
        }
    }

    #[test]
    fn inference_matches_enumeration((real, synth) in table_pair()) {
        let cfg = keyed_cfg(real.keys.len(), 1.0);
        let m = inference_attack_score(&to_dataset(&real), &to_dataset(&synth), &cfg).unwrap();
        prop_assert_eq!(m.score, inference_oracle(&real, &synth));
    }

    #[test]
    fn keyed_metrics_ignore_row_order((real, synth) in table_pair(), seed in any::<u64>()) {
        let cfg = keyed_cfg(real.keys.len(), 0.5);
        let (r, s) = (to_dataset(&real), to_dataset(&synth));
        let mut order: Vec<usize> = (0..s.n_rows()).collect();
        order.reverse();
        let shift = (seed as usize) % order.len();
        order.rotate_left(shift);
        let s2 = s.take_rows(&order);
        prop_assert_eq!(tcap(&r, &s, &cfg).unwrap().score, tcap(&r, &s2, &cfg).unwrap().score);
        prop_assert_eq!(
            inference_attack_score(&r, &s, &cfg).unwrap().score,
            inference_attack_score(&r, &s2, &cfg).unwrap().score
        );
        let a = categorical_cap(&r, &s, &cfg).unwrap().score;
        let b = categorical_cap(&r, &s2, &cfg).unwrap().score;
        prop_assert!((a - b).abs() < 1e-12);
    }
}

fn mixed_schema() -> Schema {
    Schema::new(vec![
        ColumnSpec::continuous("x"),
        ColumnSpec::categorical("g", ["a", "b", "c"]),
        ColumnSpec::continuous("y"),
    ])
    .unwrap()
}

fn mixed(x: Vec<f64>, g: Vec<u32>, y: Vec<f64>) -> Dataset {
    Dataset::new(mixed_schema(), vec![Column::Continuous(x), Column::Categorical(g), Column::Continuous(y)]).unwrap()
}

fn mixed_table(rows: usize) -> impl Strategy<Value = Dataset> {
    (
        proptest::collection::vec(-20i32..20, rows),
        proptest::collection::vec(0u32..3, rows),
        proptest::collection::vec(0i32..5, rows),
    )
        .prop_map(|(x, g, y)| {
            mixed(x.into_iter().map(|v| f64::from(v) * 0.5).collect(), g, y.into_iter().map(f64::from).collect())
        })
}

/// Gower distance written out per column, ranges from `real`.
fn gower_oracle(real: &Dataset, a: &Dataset, i: usize, r: usize) -> f64 {
    let mut total = 0.0;
    for j in 0..real.n_cols() {
        total += match (a.column(j), real.column(j)) {
            (Column::Continuous(av), Column::Continuous(rv)) => {
                let lo = rv.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = rv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if hi > lo {
                    ((av[i] - rv[r]).abs() / (hi - lo)).min(1.0)
                } else {
                    0.0
                }
            }
            (Column::Categorical(av), Column::Categorical(rv)) => {
                if av[i] == rv[r] {
                    0.0
                } else {
                    1.0
                }
            }
            _ => unreachable!(),
        };
    }
    total / real.n_cols() as f64
}

fn relative_match(s: f64, r: f64, tol: f64) -> bool {
    if r == 0.0 {
        s.abs() <= tol
    } else {
        (s - r).abs() <= tol * r.abs()
    }
}

fn new_row_oracle(real: &Dataset, synth: &Dataset, tol: f64) -> f64 {
    let novel = (0..synth.n_rows())
        .filter(|&i| {
            !(0..real.n_rows()).any(|r| {
                (0..real.n_cols()).all(|j| match (synth.column(j), real.column(j)) {
                    (Column::Continuous(s), Column::Continuous(rv)) => relative_match(s[i], rv[r], tol),
                    (Column::Categorical(s), Column::Categorical(rv)) => s[i] == rv[r],
                    _ => unreachable!(),
                })
            })
        })
        .count();
    novel as f64 / synth.n_rows() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn min_nn_equals_exhaustive_minimum(real in (1usize..40).prop_flat_map(mixed_table), synth in (1usize..40).prop_flat_map(mixed_table)) {
        let mut best = f64::INFINITY;
        for i in 0..synth.n_rows() {
            for r in 0..real.n_rows() {
                best = best.min(gower_oracle(&real, &synth, i, r));
            }
        }
        let got = min_nn_distance(&real, &synth).unwrap().score;
        prop_assert!((got - best).abs() <= 1e-12, "got {got}, exhaustive {best}");
    }

    #[test]
    fn new_row_equals_pairwise_scan(
        real in (1usize..30).prop_flat_map(mixed_table),
        synth in (1usize..30).prop_flat_map(mixed_table),
        tol in prop::sample::select(vec![0.0, 0.01, 0.1, 0.25, 0.5, 0.99, 1.0, 2.0]),
    ) {
        prop_assert_eq!(new_row_synthesis(&real, &synth, tol).unwrap().score, new_row_oracle(&real, &synth, tol));
    }

    #[test]
    fn new_row_is_monotone_in_tolerance(real in (1usize..30).prop_flat_map(mixed_table), synth in (1usize..30).prop_flat_map(mixed_table)) {
        let tols = [0.0, 0.001, 0.05, 0.2, 0.5, 1.0, 3.0];
        let scores: Vec<f64> = tols.iter().map(|&t| new_row_synthesis(&real, &synth, t).unwrap().score).collect();
        prop_assert!(scores.windows(2).all(|w| w[1] <= w[0]), "{scores:?}");
    }
}

#[test]
fn maximal_leakage_fixture() {
    let real = mixed(vec![1.0, 2.5, -3.0, 4.0, 0.0], vec![0, 1, 2, 1, 0], vec![10.0, 20.0, 30.0, 40.0, 50.0]);
    let synth = real.clone();
    // CAP reaches 0 on a copy only when the keys determine the sensitive value.
    let keyed = to_dataset(&Table { keys: vec![vec![0, 1, 2, 1, 0]], sensitive: vec![0, 1, 2, 1, 0] });
    let cfg = keyed_cfg(1, 1.0);
    let rng = derive_stream(3, "privacy");

    let cap = categorical_cap(&keyed, &keyed.clone(), &cfg).unwrap();
    assert_eq!(cap.score, 0.0);
    assert_eq!(new_row_synthesis(&real, &synth, 0.01).unwrap().score, 0.0);
    assert_eq!(min_nn_distance(&real, &synth).unwrap().score, 0.0);
    assert_eq!(sample_overlap(&real, &synth, 1.0, &rng).unwrap().score, 1.0);
}

#[test]
fn copy_with_deterministic_mapping_leaks_fully() {
    // Key determines the sensitive value.
    let t = Table { keys: vec![vec![0, 1, 2, 0, 1, 2]], sensitive: vec![2, 0, 1, 2, 0, 1] };
    let d = to_dataset(&t);
    let cfg = keyed_cfg(1, 1.0);
    assert_eq!(tcap(&d, &d, &cfg).unwrap().score, 1.0);
    assert_eq!(inference_attack_score(&d, &d, &cfg).unwrap().score, 1.0);
}

#[test]
fn mixed_groups_are_not_attackable() {
    let real = Table { keys: vec![vec![0, 1]], sensitive: vec![0, 1] };
    let synth = Table { keys: vec![vec![0, 0, 1, 1]], sensitive: vec![0, 1, 1, 2] };
    let m = tcap(&to_dataset(&real), &to_dataset(&synth), &keyed_cfg(1, 1.0)).unwrap();
    assert_eq!(m.score, 0.0);
    assert!(has_flag(&m, "no-attackable-records"));
}

#[test]
fn ten_row_tcap_at_homogeneity_point_eight() {
    let real = Table {
        keys: vec![vec![0, 0, 1, 1, 2, 2, 0, 1, 2, 0], vec![0, 1, 0, 1, 0, 1, 0, 0, 1, 1]],
        sensitive: vec![0, 1, 2, 0, 1, 2, 0, 2, 2, 1],
    };
    let synth = Table {
        keys: vec![vec![0, 0, 0, 0, 0, 1, 1, 1, 2, 2], vec![0, 0, 0, 0, 0, 0, 0, 0, 1, 1]],
        sensitive: vec![0, 0, 0, 0, 1, 2, 2, 1, 2, 2],
    };
    let m = tcap(&to_dataset(&real), &to_dataset(&synth), &keyed_cfg(2, 0.8)).unwrap();
    assert_eq!(m.score, tcap_oracle(&real, &synth, 0.8).unwrap());
}

#[test]
fn shuffled_sensitive_on_six_rows() {
    let real = Table { keys: vec![vec![0, 0, 0, 1, 1, 1]], sensitive: vec![0, 1, 2, 0, 1, 2] };
    let synth = Table { keys: vec![vec![0, 0, 0, 1, 1, 1]], sensitive: vec![2, 0, 1, 1, 2, 0] };
    let m = categorical_cap(&to_dataset(&real), &to_dataset(&synth), &keyed_cfg(1, 1.0)).unwrap();
    // Each key group holds every sensitive value once, so every attribution is 1/3.
    assert!((m.score - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(m.score, cap_oracle(&real, &synth).unwrap());
}

#[test]
fn disjoint_keys_give_undefined_baseline() {
    let real = Table { keys: vec![vec![0, 0]], sensitive: vec![0, 1] };
    let synth = Table { keys: vec![vec![1, 2]], sensitive: vec![0, 1] };
    let m = categorical_cap(&to_dataset(&real), &to_dataset(&synth), &keyed_cfg(1, 1.0)).unwrap();
    assert_eq!(m.score, 1.0);
    assert!(has_flag(&m, "undefined-baseline"));
}

#[test]
fn independent_sensitive_on_eight_rows() {
    let real = Table { keys: vec![vec![0, 0, 0, 0, 1, 1, 1, 1]], sensitive: vec![0, 0, 1, 1, 0, 0, 1, 1] };
    let m = inference_attack_score(&to_dataset(&real), &to_dataset(&real), &keyed_cfg(1, 1.0)).unwrap();
    // Both groups tie, the modal guess is value 0, accuracy 1/2 equals the baseline.
    assert_eq!(m.score, 0.0);
    assert_eq!(m.score, inference_oracle(&real, &real));
}

#[test]
fn constant_sensitive_is_degenerate() {
    let real = Table { keys: vec![vec![0, 1, 2]], sensitive: vec![1, 1, 1] };
    let m = inference_attack_score(&to_dataset(&real), &to_dataset(&real), &keyed_cfg(1, 1.0)).unwrap();
    assert_eq!(m.score, 0.0);
    assert!(has_flag(&m, "degenerate-baseline"));
}

#[test]
fn new_row_threshold_arithmetic() {
    let single = |v: f64| {
        Dataset::new(Schema::new(vec![ColumnSpec::continuous("v")]).unwrap(), vec![Column::Continuous(vec![v])])
            .unwrap()
    };
    assert_eq!(new_row_synthesis(&single(100.0), &single(100.5), 0.01).unwrap().score, 0.0);
    assert_eq!(new_row_synthesis(&single(100.0), &single(100.5), 0.001).unwrap().score, 1.0);
    assert_eq!(new_row_synthesis(&single(0.0), &single(0.005), 0.01).unwrap().score, 0.0);
}

#[test]
fn disjoint_labels_are_all_new() {
    let real = mixed(vec![1.0, 2.0], vec![0, 0], vec![1.0, 1.0]);
    let synth = mixed(vec![1.0, 2.0], vec![1, 2], vec![1.0, 1.0]);
    assert_eq!(new_row_synthesis(&real, &synth, 0.01).unwrap().score, 1.0);
}

#[test]
fn min_nn_hand_values() {
    let schema = Schema::new(vec![ColumnSpec::continuous("v")]).unwrap();
    let one = |v: Vec<f64>| Dataset::new(schema.clone(), vec![Column::Continuous(v)]).unwrap();
    // Real range [0, 10]; nearest real value to 5 is 0 or 10.
    assert_eq!(min_nn_distance(&one(vec![0.0, 10.0]), &one(vec![5.0])).unwrap().score, 0.5);

    let cat = Schema::new(vec![ColumnSpec::categorical("c", ["a", "b"])]).unwrap();
    let real = Dataset::new(cat.clone(), vec![Column::Categorical(vec![0, 0])]).unwrap();
    let synth = Dataset::new(cat, vec![Column::Categorical(vec![1])]).unwrap();
    assert_eq!(min_nn_distance(&real, &synth).unwrap().score, 1.0);
}

#[test]
fn overlap_counts_exact_copies() {
    let real = mixed(vec![1.0, 2.0, 3.0, 4.0], vec![0, 1, 2, 0], vec![0.0; 4]);
    let synth = mixed(vec![9.0, 3.0, 7.0], vec![0, 2, 1], vec![0.0; 3]);
    let rng = derive_stream(1, "privacy");
    assert_eq!(sample_overlap(&real, &synth, 1.0, &rng).unwrap().score, 0.25);
    let disjoint = mixed(vec![9.0], vec![0], vec![0.0]);
    assert_eq!(sample_overlap(&real, &disjoint, 1.0, &rng).unwrap().score, 0.0);
}

#[test]
fn overlap_sampling_is_deterministic_and_order_free() {
    let n = 200;
    let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let g: Vec<u32> = (0..n).map(|i| (i % 3) as u32).collect();
    let real = mixed(x.clone(), g.clone(), vec![1.0; n]);
    let synth = mixed(x.iter().map(|v| v + f64::from(u8::from(*v as usize % 2 == 0))).collect(), g, vec![1.0; n]);
    let rng = derive_stream(9, "privacy");
    let a = sample_overlap(&real, &synth, 0.3, &rng).unwrap();
    assert_eq!(a, sample_overlap(&real, &synth, 0.3, &rng).unwrap());
    let reversed: Vec<usize> = (0..n).rev().collect();
    let b = sample_overlap(&real.take_rows(&reversed), &synth.take_rows(&reversed), 0.3, &rng).unwrap();
    assert_eq!(a.score, b.score);
    assert_eq!(a.details["sampled_real"], 60);
}
