//! Minimal spanning trees of complete distance graphs.
//!
//! Both constructions order edges by weight and break ties by the
//! lexicographically smaller `(min ticker, max ticker)` pair. That order is
//! strict, so the minimal tree is unique and Prim and Kruskal agree on the
//! edge set, not just the total weight.

use std::cmp::Ordering;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::correlation::DistanceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// A spanning tree over labelled vertices.
///
/// Edges are stored canonically: `tickers[a] < tickers[b]` inside each edge
/// and edges sorted by that label pair. The total weight is summed in the
/// same order, so trees with equal edge sets have bitwise-equal totals.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    tickers: Vec<String>,
    edges: Vec<Edge>,
}

impl Tree {
    pub fn new(tickers: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let n = tickers.len();
        if n == 0 {
            return Err(Error::InvalidTree("no vertices".into()));
        }
        let mut sorted = tickers.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidTree("duplicate vertex label".into()));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree(format!(
                "{n} vertices need {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        let mut dsu = DisjointSets::new(n);
        for e in &edges {
            if e.a >= n || e.b >= n || e.a == e.b {
                return Err(Error::InvalidTree(format!("bad edge {}-{}", e.a, e.b)));
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(Error::InvalidTree(format!("bad weight {}", e.weight)));
            }
            if !dsu.union(e.a, e.b) {
                return Err(Error::InvalidTree("edges contain a cycle".into()));
            }
        }
        Ok(Self::canonical(tickers, edges))
    }

    fn canonical(tickers: Vec<String>, mut edges: Vec<Edge>) -> Self {
        for e in edges.iter_mut() {
            if tickers[e.a] > tickers[e.b] {
                std::mem::swap(&mut e.a, &mut e.b);
            }
        }
        edges.sort_by(|x, y| {
            (&tickers[x.a], &tickers[x.b]).cmp(&(&tickers[y.a], &tickers[y.b]))
        });
        Self { tickers, edges }
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.tickers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tickers.is_empty()
    }

    pub fn index_of(&self, ticker: &str) -> Option<usize> {
        self.tickers.iter().position(|t| t == ticker)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Adjacency lists of `(neighbour, weight)`.
    pub fn neighbours(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.len()];
        for e in &self.edges {
            adj[e.a].push((e.b, e.weight));
            adj[e.b].push((e.a, e.weight));
        }
        adj
    }

    /// Same topology with every weight mapped through `f`.
    pub fn map_weights(&self, f: impl Fn(f64) -> f64) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                weight: f(e.weight),
                ..*e
            })
            .collect();
        Self {
            tickers: self.tickers.clone(),
            edges,
        }
    }

    /// Unordered label pairs of the edges, for set comparisons.
    pub fn edge_labels(&self) -> Vec<(String, String)> {
        self.edges
            .iter()
            .map(|e| (self.tickers[e.a].clone(), self.tickers[e.b].clone()))
            .collect()
    }
}

/// Strict edge order: weight, then lexicographic label pair.
struct EdgeOrder {
    rank: Vec<usize>,
}

impl EdgeOrder {
    fn new(tickers: &[String]) -> Self {
        let mut order: Vec<usize> = (0..tickers.len()).collect();
        order.sort_by(|&i, &j| tickers[i].cmp(&tickers[j]));
        let mut rank = vec![0; tickers.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        Self { rank }
    }

    fn key(&self, i: usize, j: usize) -> (usize, usize) {
        let (a, b) = (self.rank[i], self.rank[j]);
        (a.min(b), a.max(b))
    }

    fn cmp(&self, w1: f64, e1: (usize, usize), w2: f64, e2: (usize, usize)) -> Ordering {
        w1.total_cmp(&w2)
            .then_with(|| self.key(e1.0, e1.1).cmp(&self.key(e2.0, e2.1)))
    }

    fn first_vertex(&self) -> usize {
        self.rank.iter().position(|&r| r == 0).unwrap_or(0)
    }
}

/// Dense Prim: `O(N^2)` over the complete graph, grown from the
/// lexicographically first ticker.
pub fn prim_mst(d: &DistanceMatrix) -> Tree {
    let n = d.len();
    let tickers = d.tickers().to_vec();
    if n == 0 {
        return Tree { tickers, edges: Vec::new() };
    }
    let order = EdgeOrder::new(&tickers);
    let root = order.first_vertex();
    let mut in_tree = vec![false; n];
    // best[v] = (weight, tree endpoint) of the cheapest edge from v into the tree
    let mut best: Vec<Option<(f64, usize)>> = vec![None; n];
    let mut edges = Vec::with_capacity(n - 1);

    in_tree[root] = true;
    let mut last = root;
    for _ in 1..n {
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let w = d.get(last, v);
            let better = match best[v] {
                None => true,
                Some((bw, bu)) => order.cmp(w, (last, v), bw, (bu, v)) == Ordering::Less,
            };
            if better {
                best[v] = Some((w, last));
            }
        }
        let mut pick: Option<(usize, f64, usize)> = None;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let (w, u) = best[v].expect("every outside vertex has a candidate");
            let take = match pick {
                None => true,
                Some((pv, pw, pu)) => order.cmp(w, (u, v), pw, (pu, pv)) == Ordering::Less,
            };
            if take {
                pick = Some((v, w, u));
            }
        }
        let (v, w, u) = pick.expect("graph is complete");
        in_tree[v] = true;
        edges.push(Edge { a: u, b: v, weight: w });
        last = v;
    }
    Tree::canonical(tickers, edges)
}

/// Kruskal over all `N(N-1)/2` edges with a union-find. Kept as an
/// independent check on [`prim_mst`].
pub fn kruskal_mst(d: &DistanceMatrix) -> Tree {
    let n = d.len();
    let tickers = d.tickers().to_vec();
    let order = EdgeOrder::new(&tickers);
    let mut all: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    all.sort_by(|&x, &y| order.cmp(d.get(x.0, x.1), x, d.get(y.0, y.1), y));

    let mut dsu = DisjointSets::new(n);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for (i, j) in all {
        if dsu.union(i, j) {
            edges.push(Edge { a: i, b: j, weight: d.get(i, j) });
            if edges.len() + 1 == n {
                break;
            }
        }
    }
    Tree::canonical(tickers, edges)
}

pub fn degrees(t: &Tree) -> Vec<usize> {
    let mut k = vec![0; t.len()];
    for e in t.edges() {
        k[e.a] += 1;
        k[e.b] += 1;
    }
    k
}

/// Hop count from `root` to every vertex.
pub fn levels(t: &Tree, root: &str) -> Result<Vec<usize>> {
    let r = t
        .index_of(root)
        .ok_or_else(|| Error::VertexNotInTree(root.to_string()))?;
    Ok(levels_from(t, r))
}

pub(crate) fn levels_from(t: &Tree, root: usize) -> Vec<usize> {
    let adj = t.neighbours();
    let mut lev = vec![usize::MAX; t.len()];
    lev[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &(v, _) in &adj[u] {
            if lev[v] == usize::MAX {
                lev[v] = lev[u] + 1;
                queue.push_back(v);
            }
        }
    }
    lev
}

struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
    }

    fn triangle() -> DistanceMatrix {
        // AB:1, AC:2, BC:3
        DistanceMatrix::from_fn(labels(3), |i, j| match (i, j) {
            (0, 1) => 1.0,
            (0, 2) => 2.0,
            _ => 3.0,
        })
        .unwrap()
    }

    fn path3() -> Tree {
        Tree::new(
            labels(3),
            vec![Edge { a: 0, b: 1, weight: 1.0 }, Edge { a: 1, b: 2, weight: 1.0 }],
        )
        .unwrap()
    }

    fn star(n: usize) -> Tree {
        Tree::new(
            labels(n),
            (1..n).map(|b| Edge { a: 0, b, weight: 0.5 }).collect(),
        )
        .unwrap()
    }

    #[test]
    fn triangle_example() {
        for t in [prim_mst(&triangle()), kruskal_mst(&triangle())] {
            assert_eq!(
                t.edge_labels(),
                vec![("A".into(), "B".into()), ("A".into(), "C".into())]
            );
            assert_eq!(t.total_weight(), 3.0);
            assert_eq!(degrees(&t), vec![2, 1, 1]);
        }
    }

    #[test]
    fn equal_distances_give_star_at_first_ticker() {
        let names: Vec<String> = ["m", "c", "x", "a", "q"].iter().map(|s| s.to_string()).collect();
        let d = DistanceMatrix::from_fn(names, |_, _| 0.7).unwrap();
        for t in [prim_mst(&d), kruskal_mst(&d)] {
            assert!(t.edge_labels().iter().all(|(a, _)| a == "a"));
            assert_eq!(t.total_weight(), 4.0 * 0.7);
        }
    }

    #[test]
    fn single_vertex() {
        let d = DistanceMatrix::from_fn(vec!["A".into()], |_, _| 0.0).unwrap();
        let t = prim_mst(&d);
        assert_eq!(t.len(), 1);
        assert!(t.edges().is_empty());
        assert!(kruskal_mst(&d).edges().is_empty());
        assert_eq!(degrees(&t), vec![0]);
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degrees(&path3()), vec![1, 2, 1]);
        assert_eq!(degrees(&star(5)), vec![4, 1, 1, 1, 1]);
    }

    #[test]
    fn level_examples() {
        assert_eq!(levels(&star(5), "A").unwrap(), vec![0, 1, 1, 1, 1]);
        assert_eq!(levels(&path3(), "A").unwrap(), vec![0, 1, 2]);
        assert_eq!(levels(&path3(), "B").unwrap(), vec![1, 0, 1]);
        assert!(matches!(levels(&path3(), "Z"), Err(Error::VertexNotInTree(_))));
    }

    #[test]
    fn tree_validation() {
        let cyc = vec![
            Edge { a: 0, b: 1, weight: 1.0 },
            Edge { a: 1, b: 0, weight: 1.0 },
        ];
        assert!(Tree::new(labels(3), cyc).is_err());
        assert!(Tree::new(labels(3), vec![Edge { a: 0, b: 1, weight: 1.0 }]).is_err());
        assert!(Tree::new(vec!["A".into(), "A".into()], vec![Edge { a: 0, b: 1, weight: 1.0 }]).is_err());
    }

    #[test]
    fn canonical_edge_order() {
        let t = Tree::new(
            labels(3),
            vec![Edge { a: 2, b: 1, weight: 1.0 }, Edge { a: 1, b: 0, weight: 2.0 }],
        )
        .unwrap();
        assert_eq!(
            t.edge_labels(),
            vec![("A".into(), "B".into()), ("B".into(), "C".into())]
        );
    }
}
