use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::DistanceMatrix;
use crate::error::{Error, Result};

/// Tree edge with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub rho: f64,
}

impl Edge {
    fn new(u: usize, v: usize, weight: f64, rho: f64) -> Self {
        Self {
            a: u.min(v),
            b: u.max(v),
            weight,
            rho,
        }
    }
}

/// Edge order used everywhere: weight, then `(min label, max label)`.
fn edge_order(w1: f64, a1: usize, b1: usize, w2: f64, a2: usize, b2: usize) -> Ordering {
    w1.total_cmp(&w2).then(a1.cmp(&a2)).then(b1.cmp(&b2))
}

/// Spanning tree over labelled nodes; edges sorted by `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    labels: Vec<String>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl SpanningTree {
    /// Validates that `edges` form a spanning tree of `labels.len()` nodes.
    pub fn from_edges(labels: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidTree("no nodes"));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree("edge count must be N - 1"));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut edges: Vec<Edge> = edges
            .into_iter()
            .map(|e| Edge::new(e.a, e.b, e.weight, e.rho))
            .collect();
        for e in &edges {
            if e.b >= n || e.a == e.b {
                return Err(Error::InvalidTree("edge endpoint out of range or self-loop"));
            }
            adjacency[e.a].push(e.b);
            adjacency[e.b].push(e.a);
        }
        // N - 1 edges and connected implies acyclic
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &v in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        if reached != n {
            return Err(Error::InvalidTree("not connected"));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        edges.sort_by(|x, y| x.a.cmp(&y.a).then(x.b.cmp(&y.b)));
        Ok(Self {
            labels,
            edges,
            adjacency,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Sum of edge weights, added in `(a, b)` order.
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Node with the highest degree (lowest index on ties) and its degree.
    pub fn hub(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (i, adj) in self.adjacency.iter().enumerate() {
            if adj.len() > best.1 {
                best = (i, adj.len());
            }
        }
        best
    }
}

/// Prim's algorithm on the complete graph of `d`.
///
/// Edges are totally ordered by weight and then by `(min label, max label)`,
/// so the tree is unique and does not depend on the start node.
pub fn minimum_spanning_tree(d: &DistanceMatrix) -> Result<SpanningTree> {
    let n = d.dim();
    if n < 2 {
        return Err(Error::TooFewSeries { need: 2, got: n });
    }
    for i in 0..n {
        for j in 0..n {
            if !d.get(i, j).is_finite() {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    let mut in_tree = vec![false; n];
    // best connection of each outside node into the tree: (weight, tree node)
    let mut best: Vec<(f64, usize)> = (0..n).map(|v| (d.get(0, v), 0)).collect();
    in_tree[0] = true;
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut pick: Option<usize> = None;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            pick = match pick {
                None => Some(v),
                Some(u) => {
                    let (wu, pu) = best[u];
                    let (wv, pv) = best[v];
                    let ord = edge_order(wv, pv.min(v), pv.max(v), wu, pu.min(u), pu.max(u));
                    Some(if ord == Ordering::Less { v } else { u })
                }
            };
        }
        let v = pick.expect("an outside node remains");
        let (w, parent) = best[v];
        in_tree[v] = true;
        edges.push(Edge::new(parent, v, w, d.rho(parent, v)));
        for u in 0..n {
            if in_tree[u] {
                continue;
            }
            let (wu, pu) = best[u];
            let wv = d.get(v, u);
            if edge_order(wv, v.min(u), v.max(u), wu, pu.min(u), pu.max(u)) == Ordering::Less {
                best[u] = (wv, v);
            }
        }
    }
    SpanningTree::from_edges(d.labels().to_vec(), edges)
}
