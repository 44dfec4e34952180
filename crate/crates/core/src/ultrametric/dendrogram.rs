use serde::{Deserialize, Serialize};

use super::mst::{minimum_spanning_tree, UnionFind};
use super::{validate_ultrametric, PseudoUltrametric, UltrametricCheck};
use crate::error::{Error, Result};
use crate::metric::{Distances, Points, FORMAT_VERSION, TOL};

/// Blocks of point identifiers. Blocks are ordered by their first point and
/// each block lists its points in the order of the source space.
pub type Partition = Vec<Vec<String>>;

/// A merge operand: a leaf identifier or the index of an earlier merge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Merge(usize),
    Leaf(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, Node, Node)", into = "(f64, Node, Node)")]
pub struct Merge {
    pub height: f64,
    pub left: Node,
    pub right: Node,
}

impl From<(f64, Node, Node)> for Merge {
    fn from((height, left, right): (f64, Node, Node)) -> Self {
        Self {
            height,
            left,
            right,
        }
    }
}

impl From<Merge> for (f64, Node, Node) {
    fn from(m: Merge) -> Self {
        (m.height, m.left, m.right)
    }
}

/// Binary merge tree over a set of leaves with non-decreasing merge heights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    format_version: u32,
    leaves: Vec<String>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn new(leaves: Vec<String>, merges: Vec<Merge>) -> Result<Self> {
        let d = Self {
            format_version: FORMAT_VERSION,
            leaves,
            merges,
        };
        d.leaf_sets()?;
        Ok(d)
    }

    pub fn leaves(&self) -> &[String] {
        &self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Checks structure and returns the leaf positions under every merge.
    fn leaf_sets(&self) -> Result<Vec<Vec<usize>>> {
        let points = Points::new(self.leaves.clone())?;
        let n = points.len();
        if n > 0 && self.merges.len() != n - 1 {
            return Err(Error::Dendrogram(format!(
                "{} leaves need {} merges, found {}",
                n,
                n - 1,
                self.merges.len()
            )));
        }
        let mut leaf_used = vec![false; n];
        let mut merge_used = vec![false; self.merges.len()];
        let mut sets: Vec<Vec<usize>> = Vec::with_capacity(self.merges.len());
        let mut prev = f64::NEG_INFINITY;
        for (k, m) in self.merges.iter().enumerate() {
            if !m.height.is_finite() || m.height < 0.0 {
                return Err(Error::Dendrogram(format!("merge {k} has invalid height {}", m.height)));
            }
            if m.height + TOL < prev {
                return Err(Error::Dendrogram(format!("merge {k} is lower than merge {}", k - 1)));
            }
            prev = prev.max(m.height);
            let mut set = Vec::new();
            for node in [&m.left, &m.right] {
                match node {
                    Node::Leaf(id) => {
                        let i = points.require(id)?;
                        if std::mem::replace(&mut leaf_used[i], true) {
                            return Err(Error::Dendrogram(format!("leaf `{id}` merged twice")));
                        }
                        set.push(i);
                    }
                    Node::Merge(j) => {
                        if *j >= k {
                            return Err(Error::Dendrogram(format!(
                                "merge {k} refers to merge {j}, which is not earlier"
                            )));
                        }
                        if std::mem::replace(&mut merge_used[*j], true) {
                            return Err(Error::Dendrogram(format!("merge {j} used twice")));
                        }
                        set.extend_from_slice(&sets[*j]);
                    }
                }
            }
            sets.push(set);
        }
        Ok(sets)
    }

    /// Heights of lowest common ancestors as a pseudo-ultrametric.
    pub fn to_ultrametric(&self) -> Result<PseudoUltrametric> {
        let points = Points::new(self.leaves.clone())?;
        let n = points.len();
        let mut mu = vec![0.0; n * n];
        let mut sets: Vec<Vec<usize>> = Vec::with_capacity(self.merges.len());
        for m in &self.merges {
            let side = |node: &Node| -> Vec<usize> {
                match node {
                    Node::Leaf(id) => vec![points.position(id).expect("checked at construction")],
                    Node::Merge(j) => sets[*j].clone(),
                }
            };
            let (left, right) = (side(&m.left), side(&m.right));
            for &x in &left {
                for &y in &right {
                    mu[x * n + y] = m.height;
                    mu[y * n + x] = m.height;
                }
            }
            sets.push(left.into_iter().chain(right).collect());
        }
        Ok(PseudoUltrametric::from_parts(points, mu))
    }

    /// Blocks under all merges no higher than `r`.
    pub fn cut(&self, r: f64) -> Partition {
        let points = Points::new(self.leaves.clone()).expect("checked at construction");
        let mut uf = UnionFind::new(points.len());
        let mut rep: Vec<usize> = Vec::with_capacity(self.merges.len());
        for m in &self.merges {
            let leaf = |node: &Node| match node {
                Node::Leaf(id) => points.position(id).expect("checked at construction"),
                Node::Merge(j) => rep[*j],
            };
            let (a, b) = (leaf(&m.left), leaf(&m.right));
            if m.height <= r + TOL {
                uf.union(a, b);
            }
            rep.push(a);
        }
        blocks(&points, &mut uf)
    }
}

impl<'de> Deserialize<'de> for Dendrogram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Repr {
            #[serde(default = "crate::metric::default_version")]
            format_version: u32,
            leaves: Vec<String>,
            merges: Vec<Merge>,
        }
        let repr = Repr::deserialize(d)?;
        crate::metric::check_version(repr.format_version).map_err(D::Error::custom)?;
        Dendrogram::new(repr.leaves, repr.merges).map_err(D::Error::custom)
    }
}

fn blocks(points: &Points, uf: &mut UnionFind) -> Partition {
    let n = points.len();
    let mut slot = vec![usize::MAX; n];
    let mut out: Partition = Vec::new();
    for i in 0..n {
        let r = uf.find(i);
        if slot[r] == usize::MAX {
            slot[r] = out.len();
            out.push(Vec::new());
        }
        out[slot[r]].push(points.name(i).to_string());
    }
    out
}

/// Canonical dendrogram of `u`. Clusters that merge at one height are joined
/// by successive binary merges, ordered by their smallest leaf identifier.
pub fn to_dendrogram(u: &PseudoUltrametric) -> Result<Dendrogram> {
    if let UltrametricCheck::Violation { a, b, c } = validate_ultrametric(u)? {
        return Err(Error::NotUltrametric { a, b, c });
    }
    let points = u.points();
    let n = points.len();
    let tree = minimum_spanning_tree(u);

    // cluster root -> (node, smallest leaf id)
    let mut uf = UnionFind::new(n);
    let mut node: Vec<Node> = points.ids().iter().cloned().map(Node::Leaf).collect();
    let mut min_id: Vec<String> = points.ids().to_vec();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    let edges = &tree.edges;
    let mut start = 0;
    while start < edges.len() {
        let height = edges[start].weight;
        let mut end = start;
        while end < edges.len() && edges[end].weight <= height + TOL {
            end += 1;
        }
        // Group the current clusters touched by this height.
        let mut level = uf.clone();
        for e in &edges[start..end] {
            level.union(e.u, e.v);
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut seen = vec![false; n];
        for e in &edges[start..end] {
            for x in [e.u, e.v] {
                let r = uf.find(x);
                if !seen[r] {
                    seen[r] = true;
                    let g = level.find(x);
                    match groups.iter_mut().find(|(k, _)| *k == g) {
                        Some((_, v)) => v.push(r),
                        None => groups.push((g, vec![r])),
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = groups.into_iter().map(|(_, v)| v).collect();
        for g in &mut groups {
            g.sort_by(|&a, &b| min_id[a].cmp(&min_id[b]));
        }
        groups.sort_by(|a, b| min_id[a[0]].cmp(&min_id[b[0]]));

        for g in groups {
            let mut acc = g[0];
            for &next in &g[1..] {
                merges.push(Merge {
                    height,
                    left: node[acc].clone(),
                    right: node[next].clone(),
                });
                let smallest = std::cmp::min(&min_id[acc], &min_id[next]).clone();
                let root = uf.union(acc, next).expect("distinct clusters");
                node[root] = Node::Merge(merges.len() - 1);
                min_id[root] = smallest;
                acc = root;
            }
        }
        start = end;
    }
    Dendrogram::new(points.ids().to_vec(), merges)
}

/// Equivalence classes of `mu(x, y) <= r`.
pub fn cut_at_height(u: &PseudoUltrametric, r: f64) -> Partition {
    let n = u.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if u.get(i, j) <= r + TOL {
                uf.union(i, j);
            }
        }
    }
    blocks(u.points(), &mut uf)
}
