//! Randomized cross-module properties.

use proptest::prelude::*;

use ctf_core::dyadic::Dyadic;
use ctf_core::expansion::expansion_constant;
use ctf_core::metric::{brute_force_knn, EuclideanSpace, FiniteMetric, MetricSpace, PointId};
use ctf_core::search::{build_by_insert, nn_search, TraceCounters};
use ctf_core::tree::verify_invariants;

fn line_space(coords: &[u64]) -> FiniteMetric<Dyadic> {
    let c: Vec<Dyadic> = coords.iter().map(|&v| Dyadic::from_u64(v)).collect();
    FiniteMetric::from_line(&c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expansion_constant_is_scale_invariant(
        coords in proptest::collection::btree_set(0u64..100_000, 2..24)
    ) {
        let coords: Vec<u64> = coords.into_iter().collect();
        let base = line_space(&coords);
        let ids: Vec<PointId> = (0..coords.len()).collect();
        let doubled = FiniteMetric::from_fn(coords.len(), |i, j| base.distance(i, j).double());
        prop_assert_eq!(
            expansion_constant(&base, &ids).unwrap(),
            expansion_constant(&doubled, &ids).unwrap()
        );
    }

    #[test]
    fn knn_prefix_consistency(
        coords in proptest::collection::btree_set(0u64..10_000, 3..20),
        k in 1usize..5
    ) {
        let coords: Vec<u64> = coords.into_iter().collect();
        let space = line_space(&coords);
        let ids: Vec<PointId> = (0..coords.len()).collect();
        let k = k.min(ids.len() - 1);
        let longer = brute_force_knn(&space, 0, &ids, k + 1, false).unwrap();
        let shorter = brute_force_knn(&space, 0, &ids, k, false).unwrap();
        prop_assert_eq!(&shorter.neighbors[..], &longer.neighbors[..k]);
    }

    #[test]
    fn built_trees_are_valid_and_answer_like_the_oracle(
        raw in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 4..40),
        query_xy in (0.0f64..1.0, 0.0f64..1.0)
    ) {
        let mut points: Vec<Vec<f64>> = raw.iter().map(|&(x, y)| vec![x, y]).collect();
        points.push(vec![query_xy.0, query_xy.1]);
        let n = points.len();
        let space = EuclideanSpace::new(points);
        let tree_ids: Vec<PointId> = (0..n - 1).collect();
        let mut counters = TraceCounters::new();
        let tree = build_by_insert(&space, &tree_ids, &mut counters).unwrap().unwrap();
        prop_assert!(verify_invariants(&tree, &space).is_empty());
        let query = n - 1;
        let mut qc = TraceCounters::new();
        let fast = nn_search(&tree, &space, query, &mut qc);
        let slow = brute_force_knn(&space, query, &tree_ids, 1, false).unwrap();
        prop_assert_eq!(fast.neighbors[0].1, slow.neighbors[0].1);
    }
}
