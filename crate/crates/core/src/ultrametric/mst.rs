use serde::{Deserialize, Serialize};

use crate::metric::Distances;

/// Tree edge between point positions `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MstEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Spanning tree edges in the order Kruskal accepted them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MstEdgeList {
    pub n: usize,
    pub edges: Vec<MstEdge>,
}

impl MstEdgeList {
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Adjacency lists holding `(neighbor, edge index)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, k));
            adj[e.v].push((e.u, k));
        }
        adj
    }
}

#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns the new root, or `None` if already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return None;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        Some(a)
    }
}

/// Kruskal's algorithm on the complete graph of `space`. Equal weights are
/// broken by `(min endpoint, max endpoint)` so the tree is deterministic.
pub fn minimum_spanning_tree<D: Distances + ?Sized>(space: &D) -> MstEdgeList {
    let n = space.len();
    let mut candidates = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            candidates.push(MstEdge {
                u,
                v,
                weight: space.get(u, v),
            });
        }
    }
    candidates.sort_by(|a, b| {
        a.weight
            .total_cmp(&b.weight)
            .then(a.u.cmp(&b.u))
            .then(a.v.cmp(&b.v))
    });
    let mut uf = UnionFind::new(n);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for e in candidates {
        if uf.union(e.u, e.v).is_some() {
            edges.push(e);
            if edges.len() + 1 == n {
                break;
            }
        }
    }
    MstEdgeList { n, edges }
}
