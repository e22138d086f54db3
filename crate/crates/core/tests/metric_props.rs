//! Property tests for the set-distance layer: metric axioms of the
//! Hausdorff distance, its union bound, and the max/min transport
//! inequalities used by the error-bound proofs.

use minimax_is::metric::{hausdorff, lipschitz_real, MetricTable};
use minimax_is::scalar::{abs_diff, smax};
use minimax_is::space::PointSet;
use proptest::prelude::*;

/// A random finite metric: symmetric positive integer weights closed under
/// shortest paths (Floyd-Warshall), so the triangle inequality holds by
/// construction.
fn random_metric(n: usize, weights: &[u8]) -> MetricTable<f64> {
    let mut d = vec![0.0f64; n * n];
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let w = f64::from(weights[k % weights.len()] % 9 + 1);
            d[i * n + j] = w;
            d[j * n + i] = w;
            k += 1;
        }
    }
    for mid in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i * n + mid] + d[mid * n + j];
                if i != j && via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    MetricTable::dense(n, d).expect("closure is a metric")
}

fn arb_space() -> impl Strategy<Value = (usize, Vec<u8>)> {
    (2usize..=12).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(any::<u8>(), n * (n - 1) / 2),
        )
    })
}

fn arb_subset(n: usize) -> impl Strategy<Value = PointSet> {
    prop::collection::vec(0..n as u32, 1..=6).prop_map(PointSet::new)
}

proptest! {
    #[test]
    fn hausdorff_is_a_metric(
        (n, weights) in arb_space(),
        seed_a in prop::collection::vec(0u32..12, 1..=6),
        seed_b in prop::collection::vec(0u32..12, 1..=6),
        seed_c in prop::collection::vec(0u32..12, 1..=6),
    ) {
        let d = random_metric(n, &weights);
        let clip = |v: Vec<u32>| PointSet::new(v.into_iter().map(|x| x % n as u32).collect());
        let (a, b, c) = (clip(seed_a), clip(seed_b), clip(seed_c));
        let h_ab = hausdorff(&a, &b, &d).unwrap();
        let h_ba = hausdorff(&b, &a, &d).unwrap();
        let h_aa = hausdorff(&a, &a, &d).unwrap();
        let h_ac = hausdorff(&a, &c, &d).unwrap();
        let h_bc = hausdorff(&b, &c, &d).unwrap();
        prop_assert_eq!(h_ab, h_ba);
        prop_assert_eq!(h_aa, 0.0);
        prop_assert_eq!(h_ab == 0.0, a == b);
        prop_assert!(h_ac <= h_ab + h_bc);
    }

    #[test]
    fn union_never_increases_the_distance(
        (n, weights) in arb_space(),
        sa in prop::collection::vec(0u32..12, 1..=6),
        sb in prop::collection::vec(0u32..12, 1..=6),
        sc in prop::collection::vec(0u32..12, 1..=6),
        sd in prop::collection::vec(0u32..12, 1..=6),
    ) {
        let d = random_metric(n, &weights);
        let clip = |v: Vec<u32>| PointSet::new(v.into_iter().map(|x| x % n as u32).collect());
        let (a, b, c, dd) = (clip(sa), clip(sb), clip(sc), clip(sd));
        let lhs = hausdorff(&a.union(&b), &c.union(&dd), &d).unwrap();
        let rhs = smax(
            hausdorff(&a, &c, &d).unwrap(),
            hausdorff(&b, &dd, &d).unwrap(),
        );
        prop_assert!(lhs <= rhs, "H(A u B, C u D) = {lhs} > max = {rhs}");
    }

    #[test]
    fn worst_case_transport_is_lipschitz_bounded(
        (n, weights) in arb_space(),
        sa in prop::collection::vec(0u32..12, 1..=6),
        sb in prop::collection::vec(0u32..12, 1..=6),
        values in prop::collection::vec(0u32..40, 12),
    ) {
        let d = random_metric(n, &weights);
        let clip = |v: Vec<u32>| PointSet::new(v.into_iter().map(|x| x % n as u32).collect());
        let (a, b) = (clip(sa), clip(sb));
        let f: Vec<f64> = values.into_iter().map(f64::from).take(n).collect();
        let l = lipschitz_real(&f, &d).unwrap();
        let max_a = a.iter().map(|x| f[x as usize]).fold(f64::MIN, f64::max);
        let max_b = b.iter().map(|x| f[x as usize]).fold(f64::MIN, f64::max);
        let h = hausdorff(&a, &b, &d).unwrap();
        prop_assert!((max_a - max_b).abs() <= l * h + 1e-9);
    }

    #[test]
    fn extrema_differ_at_most_by_the_sup_gap(
        f_vals in prop::collection::vec(0u32..50, 1..=12),
        g_vals in prop::collection::vec(0u32..50, 1..=12),
    ) {
        let n = f_vals.len().min(g_vals.len());
        let f: Vec<f64> = f_vals[..n].iter().map(|&v| f64::from(v)).collect();
        let g: Vec<f64> = g_vals[..n].iter().map(|&v| f64::from(v)).collect();
        let sup_gap = f
            .iter()
            .zip(&g)
            .map(|(a, b)| abs_diff(*a, *b))
            .fold(0.0, f64::max);
        let max_f = f.iter().cloned().fold(f64::MIN, f64::max);
        let max_g = g.iter().cloned().fold(f64::MIN, f64::max);
        let min_f = f.iter().cloned().fold(f64::MAX, f64::min);
        let min_g = g.iter().cloned().fold(f64::MAX, f64::min);
        prop_assert!((max_f - max_g).abs() <= sup_gap);
        prop_assert!((min_f - min_g).abs() <= sup_gap);
    }
}
