mod common;

use mstphase::*;
use proptest::prelude::*;

fn tree_from_seed(n: usize, seed: u64) -> Tree {
    common::random_tree(n, &mut common::rng(seed))
}

proptest! {
    #[test]
    fn levels_match_breadth_first_search(n in 2usize..60, seed in 0u64..1000, root in 0usize..60) {
        let t = tree_from_seed(n, seed);
        let r = root % n;
        prop_assert_eq!(levels(&t, &t.tickers()[r]).unwrap(), common::bfs_levels(&t, r));
    }

    #[test]
    fn handshake_identity(n in 2usize..80, seed in 0u64..1000) {
        let t = tree_from_seed(n, seed);
        prop_assert_eq!(degrees(&t).iter().sum::<usize>(), 2 * (n - 1));
        let dist = degree_distribution(&degrees(&t));
        prop_assert_eq!(dist.counts.iter().sum::<usize>(), n);
        prop_assert!((dist.f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropies_are_bounded(n in 2usize..80, seed in 0u64..1000) {
        let t = tree_from_seed(n, seed);
        let ln_n = (n as f64).ln();
        let s_deg = degree_entropy(&degree_distribution(&degrees(&t)));
        let s_eff = efficient_entropy(&t).unwrap();
        prop_assert!(s_deg >= 0.0 && s_deg <= ln_n + 1e-12);
        prop_assert!(s_eff >= 0.0 && s_eff <= ln_n + 1e-12);
    }

    #[test]
    fn rescaling_weights(n in 2usize..50, seed in 0u64..1000, scale in 0.1f64..10.0) {
        let t = tree_from_seed(n, seed);
        let s = t.map_weights(|w| w * scale);
        prop_assert!((efficient_entropy(&s).unwrap() - efficient_entropy(&t).unwrap()).abs() < 1e-9);
        let ratio = mean_tree_length(&s).unwrap() / mean_tree_length(&t).unwrap();
        prop_assert!((ratio - scale).abs() < 1e-9 * scale);
        prop_assert_eq!(central_vertex(&s), central_vertex(&t));
    }

    #[test]
    fn unit_mol_means_star(n in 3usize..40, seed in 0u64..1000) {
        let t = tree_from_seed(n, seed);
        let c = central_vertex(&t);
        let mol = mean_occupation_layer(&t, &c).unwrap();
        let is_star = degrees(&t).contains(&(n - 1));
        prop_assert!(mol >= 1.0);
        prop_assert_eq!(mol == 1.0, is_star);
    }

    #[test]
    fn dynamic_center_has_smallest_mol_among_hubs(n in 3usize..60, seed in 0u64..1000) {
        let t = tree_from_seed(n, seed);
        let k = degrees(&t);
        let kmax = *k.iter().max().unwrap();
        let best = mean_occupation_layer(&t, &central_vertex(&t)).unwrap();
        for (i, &d) in k.iter().enumerate() {
            if d == kmax {
                prop_assert!(best <= mean_occupation_layer(&t, &t.tickers()[i]).unwrap());
            }
        }
    }

    #[test]
    fn degree_gaps_are_ordered_differences(n in 3usize..60, seed in 0u64..1000) {
        let t = tree_from_seed(n, seed);
        let mut k = degrees(&t);
        let (g12, g23) = degree_gaps(&k).unwrap();
        k.sort_unstable_by(|a, b| b.cmp(a));
        prop_assert_eq!(g12, k[0] - k[1]);
        prop_assert_eq!(g23, k[1] - k[2]);
    }
}

#[test]
fn entropy_maximum_and_minimum() {
    // a path of equal edges spreads mass as evenly as a tree can
    let n = 6;
    let path = Tree::new(
        common::labels(n),
        (0..n - 1).map(|i| Edge { a: i, b: i + 1, weight: 1.0 }).collect(),
    )
    .unwrap();
    let s = efficient_entropy(&path).unwrap();
    assert!(s < (n as f64).ln());
    assert!(s > efficient_entropy(&common::star(n, 1.0)).unwrap());
}

#[test]
fn fitted_exponent_of_exact_laws() {
    for gamma in [1.5, 2.0, 2.5, 3.0, 3.5] {
        let support: Vec<usize> = (1..=20).collect();
        let f: Vec<f64> = support.iter().map(|&k| 0.6 * (k as f64).powf(-gamma)).collect();
        let dist = DegreeDistribution {
            n_vertices: 500,
            counts: vec![1; support.len()],
            support,
            f,
        };
        let fit = fit_power_law(&dist, FitRange::new(3, 15).unwrap()).unwrap();
        assert!((fit.gamma - gamma).abs() < 1e-10);
        assert!((fit.intercept - 0.6f64.ln()).abs() < 1e-10);
        assert!(fit.stderr < 1e-10);
        assert_eq!(fit.n_points, 13);
    }
}
