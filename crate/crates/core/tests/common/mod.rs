//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use mstphase::synth::tree_with_degrees;
use mstphase::{DistanceMatrix, Edge, Tree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("t{i:03}")).collect()
}

/// Symmetric matrix with zero diagonal and off-diagonal entries uniform on
/// `[0, 2)`.
pub fn random_distances(n: usize, rng: &mut ChaCha8Rng) -> DistanceMatrix {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = rng.gen_range(0.0..2.0);
            v[i * n + j] = d;
            v[j * n + i] = d;
        }
    }
    DistanceMatrix::new(labels(n), v).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Edges of the labelled tree encoded by a Prüfer sequence over `0..n`.
pub fn prufer_edges(code: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut deg = vec![1usize; n];
    for &v in code {
        deg[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &v in code {
        let leaf = (0..n).find(|&u| deg[u] == 1).unwrap();
        edges.push((leaf, v));
        deg[leaf] -= 1;
        deg[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| deg[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Every labelled tree on `n >= 2` vertices, by enumerating all `n^(n-2)`
/// Prüfer sequences.
pub fn all_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n == 2 {
        return vec![vec![(0, 1)]];
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    let mut out = Vec::with_capacity(total);
    let mut code = vec![0usize; len];
    for mut x in 0..total {
        for c in code.iter_mut() {
            *c = x % n;
            x /= n;
        }
        out.push(prufer_edges(&code, n));
    }
    out
}

pub fn weighted_tree(d: &DistanceMatrix, edges: &[(usize, usize)]) -> Tree {
    Tree::new(
        d.tickers().to_vec(),
        edges
            .iter()
            .map(|&(a, b)| Edge { a, b, weight: d.get(a, b) })
            .collect(),
    )
    .unwrap()
}

/// Minimum spanning tree by brute force over all labelled trees.
pub fn brute_force_mst(d: &DistanceMatrix) -> Tree {
    all_trees(d.len())
        .iter()
        .map(|e| weighted_tree(d, e))
        .min_by(|x, y| x.total_weight().total_cmp(&y.total_weight()))
        .unwrap()
}

/// Hop distances from `root` by breadth-first search.
pub fn bfs_levels(t: &Tree, root: usize) -> Vec<usize> {
    let n = t.len();
    let mut adj = vec![Vec::new(); n];
    for e in t.edges() {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    let mut lev = vec![usize::MAX; n];
    lev[root] = 0;
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if lev[v] == usize::MAX {
                lev[v] = lev[u] + 1;
                q.push_back(v);
            }
        }
    }
    lev
}

pub fn star(n: usize, weight: f64) -> Tree {
    Tree::new(
        labels(n),
        (1..n).map(|b| Edge { a: 0, b, weight }).collect(),
    )
    .unwrap()
}

/// Random labelled tree from a uniform Prüfer code, with weights uniform on
/// `(0.05, 2)`.
pub fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Tree {
    let code: Vec<usize> = (0..n.saturating_sub(2)).map(|_| rng.gen_range(0..n)).collect();
    let edges = if n == 2 { vec![(0, 1)] } else { prufer_edges(&code, n) };
    Tree::new(
        labels(n),
        edges
            .into_iter()
            .map(|(a, b)| Edge { a, b, weight: rng.gen_range(0.05..2.0) })
            .collect(),
    )
    .unwrap()
}

/// A 479-vertex tree whose non-hub degrees follow `f(k) ~ k^-2.86` on
/// `k = 2..10` and which carries one vertex of degree 90.
pub fn crash_profile_tree() -> Tree {
    let n = 479usize;
    let hub = 90usize;
    let gamma = 2.86f64;
    // non-hub vertices must supply sum (k - 1) = 2(n - 1) - hub - (n - 1)
    let excess = 2 * (n - 1) - hub - (n - 1);
    let scale: f64 = (2..=10).map(|k| (k - 1) as f64 * (k as f64).powf(-gamma)).sum();
    let a = excess as f64 / scale;
    let mut m: Vec<usize> = (0..=10)
        .map(|k| if k >= 2 { (a * (k as f64).powf(-gamma)).round() as usize } else { 0 })
        .collect();
    let used: usize = (2..=10).map(|k| (k - 1) * m[k]).sum();
    m[2] = (m[2] as isize + excess as isize - used as isize) as usize;
    let mut degs = vec![hub];
    for (k, &c) in m.iter().enumerate().skip(2) {
        degs.extend(std::iter::repeat_n(k, c));
    }
    degs.resize(n, 1);
    tree_with_degrees(&degs).unwrap()
}
