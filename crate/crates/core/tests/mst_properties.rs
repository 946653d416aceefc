mod common;

use mstphase::{kruskal_mst, prim_mst, DistanceMatrix};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn prim_and_kruskal_agree_bitwise() {
    let mut rng = common::rng(11);
    for _ in 0..300 {
        let n = rng.gen_range(2..=40);
        let d = common::random_distances(n, &mut rng);
        let p = prim_mst(&d);
        let k = kruskal_mst(&d);
        assert_eq!(p, k);
        assert_eq!(p.total_weight().to_bits(), k.total_weight().to_bits());
    }
}

#[test]
fn exhaustive_enumeration_small() {
    let mut rng = common::rng(12);
    for n in 2..=7 {
        for _ in 0..4 {
            let d = common::random_distances(n, &mut rng);
            let brute = common::brute_force_mst(&d);
            assert_eq!(prim_mst(&d).edge_labels(), brute.edge_labels(), "n={n}");
        }
    }
}

#[test]
fn cayley_count_for_six_vertices() {
    let trees = common::all_trees(6);
    assert_eq!(trees.len(), 1296);
    let mut keys: Vec<Vec<(usize, usize)>> = trees
        .into_iter()
        .map(|mut t| {
            for e in t.iter_mut() {
                *e = (e.0.min(e.1), e.0.max(e.1));
            }
            t.sort();
            t
        })
        .collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 1296);
}

#[test]
fn all_equal_weights_resolve_by_labels() {
    let n = 6;
    let d = DistanceMatrix::from_fn(common::labels(n), |i, j| if i == j { 0.0 } else { 1.0 }).unwrap();
    let p = prim_mst(&d);
    assert_eq!(p, kruskal_mst(&d));
    // the lexicographically first edges form a star at the first label
    assert!(p.edges().iter().all(|e| e.a == 0));
}

fn matrix(n: usize, raw: &[f64]) -> DistanceMatrix {
    let mut v = vec![0.0; n * n];
    let mut it = raw.iter();
    for i in 0..n {
        for j in i + 1..n {
            let d = *it.next().unwrap();
            v[i * n + j] = d;
            v[j * n + i] = d;
        }
    }
    DistanceMatrix::new(common::labels(n), v).unwrap()
}

proptest! {
    #[test]
    fn monotone_transform_keeps_topology(
        (n, raw) in (3usize..20).prop_flat_map(|n| (Just(n), prop::collection::vec(0.01f64..2.0, n * (n - 1) / 2)))
    ) {
        let d = matrix(n, &raw);
        let squared = DistanceMatrix::from_fn(common::labels(n), |i, j| d.get(i, j).powi(2)).unwrap();
        prop_assert_eq!(prim_mst(&d).edge_labels(), prim_mst(&squared).edge_labels());
    }

    #[test]
    fn correlation_order_matches_distance_order(
        (n, raw) in (3usize..20).prop_flat_map(|n| (Just(n), prop::collection::vec(-0.99f64..0.99, n * (n - 1) / 2)))
    ) {
        // a maximum spanning tree on C is the minimum tree on -C
        let neg = matrix(n, &raw.iter().map(|c| 1.0 - c).collect::<Vec<_>>());
        let dist = matrix(n, &raw.iter().map(|&c| mstphase::correlation::distance(c)).collect::<Vec<_>>());
        prop_assert_eq!(kruskal_mst(&neg).edge_labels(), kruskal_mst(&dist).edge_labels());
    }

    #[test]
    fn tree_has_n_minus_one_edges_and_min_weight(
        (n, raw) in (2usize..30).prop_flat_map(|n| (Just(n), prop::collection::vec(0.0f64..2.0, n * (n - 1) / 2)))
    ) {
        let d = matrix(n, &raw);
        let t = prim_mst(&d);
        prop_assert_eq!(t.edges().len(), n - 1);
        // cut property: every tree edge is the lightest across the cut it defines
        let adj = t.neighbours();
        for e in t.edges() {
            let mut side = vec![false; n];
            let mut stack = vec![e.a];
            side[e.a] = true;
            while let Some(u) = stack.pop() {
                for &(v, _) in &adj[u] {
                    if !side[v] && !(u == e.a && v == e.b) {
                        side[v] = true;
                        stack.push(v);
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if side[i] && !side[j] {
                        prop_assert!(d.get(i, j) >= e.weight);
                    }
                }
            }
        }
    }
}
