//! Exact two-sample Kolmogorov-Smirnov statistic.

/// `sup_x |F_a(x) - F_b(x)|` over the empirical CDFs of `a` and `b`.
/// Returns 0 when either sample is empty.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    ks_sorted(&a, &b)
}

/// As [`ks_statistic`] for inputs already sorted ascending.
pub fn ks_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        // Step past every copy of the smallest remaining value in both samples.
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// ECDF difference evaluated at every observed point.
    fn brute(a: &[f64], b: &[f64]) -> f64 {
        let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
        a.iter().chain(b).map(|&x| (ecdf(a, x) - ecdf(b, x)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn hand_values() {
        assert!((ks_statistic(&[0.1, 0.4, 0.6], &[0.2, 0.5, 0.9]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0, 5.0]), 1.0);
        assert_eq!(ks_statistic(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]), 0.0);
    }

    proptest! {
        #[test]
        fn matches_brute_force(a in proptest::collection::vec(0u8..20, 1..30), b in proptest::collection::vec(0u8..20, 1..30)) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let d = ks_statistic(&a, &b);
            prop_assert!((d - brute(&a, &b)).abs() < 1e-12);
            prop_assert_eq!(d, ks_statistic(&b, &a));
        }
    }
}
