//! Fitting ultrametrics to metric spaces.
//!
//! Two fitters are provided. The subdominant ultrametric (single linkage)
//! never exceeds the input distances and is stable under perturbation. The
//! cut-weight fitter of Farach-Colton, Kannan and Warnow attains the optimal
//! L∞ error, exactly half that of the subdominant fit, at the price of that
//! stability.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mst::{minimum_spanning_tree, MstEdge, UnionFind};
use super::PseudoUltrametric;
use crate::metric::{Distances, TOL};

/// Which ultrametric fitter to run on each level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitScheme {
    Subdominant,
    Fkw,
}

impl FitScheme {
    pub fn fit<D: Distances + ?Sized>(self, space: &D) -> PseudoUltrametric {
        match self {
            FitScheme::Subdominant => subdominant_ultrametric(space),
            FitScheme::Fkw => fkw_nearest_ultrametric(space),
        }
    }
}

impl fmt::Display for FitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitScheme::Subdominant => "subdominant",
            FitScheme::Fkw => "fkw",
        })
    }
}

impl FromStr for FitScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "subdominant" => Ok(FitScheme::Subdominant),
            "fkw" => Ok(FitScheme::Fkw),
            other => Err(format!("unknown fitting scheme `{other}`")),
        }
    }
}

/// Groups of points that merge, with the height they merge at, replayed
/// against a union-find with explicit member lists.
struct Merger {
    uf: UnionFind,
    members: Vec<Vec<usize>>,
    mu: Vec<f64>,
    n: usize,
}

impl Merger {
    fn new(n: usize) -> Self {
        Self {
            uf: UnionFind::new(n),
            members: (0..n).map(|i| vec![i]).collect(),
            mu: vec![0.0; n * n],
            n,
        }
    }

    /// Joins the components of `a` and `b`, assigning `height` to every new
    /// cross pair. Returns the number of pairs assigned.
    fn join(&mut self, a: usize, b: usize, height: f64) -> usize {
        let (ra, rb) = (self.uf.find(a), self.uf.find(b));
        let Some(root) = self.uf.union(ra, rb) else {
            return 0;
        };
        let other = if root == ra { rb } else { ra };
        let moved = std::mem::take(&mut self.members[other]);
        let n = self.n;
        for &x in &moved {
            for &y in &self.members[root] {
                self.mu[x * n + y] = height;
                self.mu[y * n + x] = height;
            }
        }
        let count = moved.len() * self.members[root].len();
        self.members[root].extend(moved);
        count
    }
}

/// The largest ultrametric lying entrywise below `space`: the height of a
/// pair is the heaviest edge on its minimum spanning tree path.
pub fn subdominant_ultrametric<D: Distances + ?Sized>(space: &D) -> PseudoUltrametric {
    let tree = minimum_spanning_tree(space);
    let mut merger = Merger::new(space.len());
    for e in &tree.edges {
        merger.join(e.u, e.v, e.weight);
    }
    PseudoUltrametric::from_parts(space.points().clone(), merger.mu)
}

/// Everything the cut-weight fitter computed along the way.
#[derive(Debug, Clone)]
pub struct FkwFit {
    pub ultrametric: PseudoUltrametric,
    /// Minimum spanning tree edges with their cut priorities.
    pub priorities: Vec<(MstEdge, f64)>,
    /// Half of the L∞ gap between the space and its subdominant ultrametric,
    /// subtracted from every priority.
    pub shift: f64,
    /// Pairs whose assigned height was negative and clamped to zero.
    pub clamped: usize,
}

/// The L∞-nearest ultrametric to `space`.
pub fn fkw_nearest_ultrametric<D: Distances + ?Sized>(space: &D) -> PseudoUltrametric {
    fkw_fit(space).ultrametric
}

/// Runs the cut-weight procedure:
///
/// 1. take a minimum spanning tree `T` and the subdominant ultrametric `μ`;
/// 2. give each tree edge `e` the priority `max d(x, y)` over the pairs whose
///    tree path runs through `e` and whose bottleneck `μ(x, y)` equals the
///    weight of `e`;
/// 3. cut edges by descending priority; pairs first separated by the cut at
///    `e` get height `p(e) - ½·L∞(space, μ)`, clamped at zero.
///
/// Equal priorities are cut in `(u, v)` order. When several edges on a path
/// share the bottleneck weight, the pair counts toward each of them.
pub fn fkw_fit<D: Distances + ?Sized>(space: &D) -> FkwFit {
    let n = space.len();
    let tree = minimum_spanning_tree(space);
    let sub = subdominant_ultrametric(space);
    let mut gap = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            gap = gap.max(space.get(i, j) - sub.get(i, j));
        }
    }
    let shift = gap / 2.0;

    let mut priority: Vec<f64> = tree.edges.iter().map(|e| e.weight).collect();
    let adj = tree.adjacency();
    // Walk the tree from every root, carrying the edges on the current path.
    let mut path: Vec<usize> = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize, usize)> = Vec::with_capacity(n);
    for root in 0..n {
        path.clear();
        stack.clear();
        stack.push((root, usize::MAX, 0));
        while let Some(&mut (node, parent, ref mut next)) = stack.last_mut() {
            if *next == 0 && node != root && node > root {
                let bottleneck = sub.get(root, node);
                let d = space.get(root, node);
                for &k in &path {
                    if tree.edges[k].weight >= bottleneck - TOL && d > priority[k] {
                        priority[k] = d;
                    }
                }
            }
            if let Some(&(child, k)) = adj[node].get(*next) {
                *next += 1;
                if child != parent {
                    path.push(k);
                    stack.push((child, node, 0));
                }
            } else {
                stack.pop();
                if !stack.is_empty() {
                    path.pop();
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..tree.edges.len()).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (&tree.edges[a], &tree.edges[b]);
        priority[b]
            .total_cmp(&priority[a])
            .then(ea.u.cmp(&eb.u))
            .then(ea.v.cmp(&eb.v))
    });
    // Cutting in `order` is replayed backwards as joins: the pairs joined by an
    // edge are exactly those its cut separates first.
    let mut merger = Merger::new(n);
    let mut clamped = 0;
    for &k in order.iter().rev() {
        let e = &tree.edges[k];
        let height = priority[k] - shift;
        let assigned = merger.join(e.u, e.v, height.max(0.0));
        if height < 0.0 {
            clamped += assigned;
        }
    }
    if clamped > 0 {
        log::debug!("cut-weight fit clamped {clamped} negative heights to zero");
    }

    FkwFit {
        ultrametric: PseudoUltrametric::from_parts(space.points().clone(), merger.mu),
        priorities: tree
            .edges
            .iter()
            .copied()
            .zip(priority)
            .collect(),
        shift,
        clamped,
    }
}
