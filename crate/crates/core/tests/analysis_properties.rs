use proptest::prelude::*;
use variety_core::analysis::{cluster, cluster_with, dendrogram, ClusterMethod};
use variety_core::distance::{DistanceMatrix, MatrixLabel};

fn random_matrix() -> impl Strategy<Value = DistanceMatrix> {
    (2usize..9).prop_flat_map(|n| {
        proptest::collection::vec(0.0f64..=1.0, n * n).prop_map(move |v| {
            DistanceMatrix::from_upper(MatrixLabel::WEIGHTED, n, |i, j| v[i * n + j]).unwrap()
        })
    })
}

/// Two tight blocks far apart.
fn two_blocks(sizes: (usize, usize), within: &[f64], between: &[f64]) -> (DistanceMatrix, Vec<usize>) {
    let n = sizes.0 + sizes.1;
    let truth: Vec<usize> = (0..n).map(|i| usize::from(i >= sizes.0)).collect();
    let d = DistanceMatrix::from_upper(MatrixLabel::WEIGHTED, n, |i, j| {
        let idx = i * n + j;
        if truth[i] == truth[j] {
            within[idx % within.len()]
        } else {
            between[idx % between.len()]
        }
    })
    .unwrap();
    (d, truth)
}

/// Exhaustive minimum of the sum of distances to the best medoid, k = 2.
fn brute_force_cost(d: &DistanceMatrix) -> f64 {
    let n = d.n();
    let mut best = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            let cost: f64 = (0..n).map(|i| d.get(i, a).min(d.get(i, b))).sum();
            best = best.min(cost);
        }
    }
    best
}

proptest! {
    #[test]
    fn well_separated_blocks_are_recovered(
        a in 1usize..6,
        b in 1usize..6,
        within in proptest::collection::vec(0.0f64..0.1, 1..8),
        between in proptest::collection::vec(0.8f64..1.0, 1..8),
    ) {
        prop_assume!(a + b >= 2);
        let (d, truth) = two_blocks((a, b), &within, &between);
        for method in [ClusterMethod::Medoids, ClusterMethod::MdsKmeans] {
            let r = cluster_with(&d, 2, method).unwrap();
            // canonical labels: concept 0 is always in cluster 0
            prop_assert_eq!(&r.labels, &truth, "{:?}", method);
        }
        let r = cluster(&d, 2).unwrap();
        prop_assert!((r.cost - brute_force_cost(&d)).abs() <= 1e-9);
    }

    #[test]
    fn medoid_cost_matches_brute_force_on_small_inputs(d in random_matrix()) {
        let r = cluster(&d, 2).unwrap();
        // PAM is a local search; it must never beat the optimum
        prop_assert!(r.cost >= brute_force_cost(&d) - 1e-9);
        prop_assert_eq!(r.labels.len(), d.n());
        prop_assert_eq!(r.labels[0], 0);
    }

    #[test]
    fn dendrogram_heights_are_monotone(d in random_matrix()) {
        let ids: Vec<u32> = (1..=d.n() as u32).collect();
        let tree = dendrogram(&d, &ids).unwrap();
        prop_assert_eq!(tree.merges.len(), d.n() - 1);
        let heights: Vec<f64> = tree.heights().collect();
        prop_assert!(heights.windows(2).all(|w| w[0] <= w[1]));
        let mut order = tree.leaf_order.clone();
        order.sort_unstable();
        prop_assert_eq!(order, (0..d.n()).collect::<Vec<_>>());
        prop_assert_eq!(tree.merges.last().unwrap().size, d.n());
    }

    #[test]
    fn clustering_is_deterministic(d in random_matrix(), k in 1usize..4) {
        prop_assume!(k <= d.n());
        prop_assert_eq!(cluster(&d, k).unwrap(), cluster(&d, k).unwrap());
    }
}
