//! The reduction from graph 3-coloring to two-level temporal clustering
//! without an ambient space.
//!
//! The first level is three points `r`, `g`, `b` at pairwise distance 2.
//! The second level is the vertex set, with adjacent vertices at distance 2
//! and other distinct vertices at distance 1. A proper coloring that uses
//! all three colors yields a witness with fit error 1 and distortion 0;
//! conversely any witness with fit error below 2 and distortion 0 encodes a
//! proper coloring.
//!
//! All distances and heights here are small integers, so comparisons are
//! exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{self, linf_distance, Distances, MetricSpace, Points};
use crate::temporal::{distortion, Correspondence};
use crate::ultrametric::PseudoUltrametric;

/// Largest graph the exhaustive coloring search accepts.
pub const BRUTE_FORCE_CAP: usize = 20;

/// Largest graph the exhaustive witness search accepts.
pub const WITNESS_SEARCH_CAP: usize = 10;

/// A simple undirected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Points,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new<S: AsRef<str>>(vertices: Vec<String>, edges: &[(S, S)]) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Graph("graph has no vertices".into()));
        }
        let vertices = Points::new(vertices)?;
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            if a == b {
                return Err(Error::Graph(format!("self-loop at `{a}`")));
            }
            let i = vertices.require(a)?;
            let j = vertices.require(b)?;
            set.insert((i.min(j), i.max(j)));
        }
        Ok(Self {
            vertices,
            edges: set,
        })
    }

    /// Graph on vertices `0..n` with the given index pairs.
    pub fn from_indices(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let named: Vec<(String, String)> = edges
            .iter()
            .map(|&(a, b)| (a.to_string(), b.to_string()))
            .collect();
        Self::new(names, &named)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        Self::from_indices(n, &edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_indices(n, &edges).expect("cycle is simple for n >= 3")
    }

    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        Self::from_indices(10, &edges).expect("Petersen graph is simple")
    }

    /// Parses DIMACS edge format: `c` comment lines, one `p edge N M` header,
    /// and `e U V` lines with 1-based vertex numbers.
    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let at = |msg: &str| Error::Graph(format!("line {}: {msg}", lineno + 1));
            let mut words = line.split_whitespace();
            match words.next() {
                None | Some("c") => {}
                Some("p") => {
                    if n.is_some() {
                        return Err(at("second problem line"));
                    }
                    let _format = words.next().ok_or_else(|| at("missing format"))?;
                    let count: usize = words
                        .next()
                        .and_then(|w| w.parse().ok())
                        .ok_or_else(|| at("bad vertex count"))?;
                    n = Some(count);
                }
                Some("e") => {
                    let count = n.ok_or_else(|| at("edge before problem line"))?;
                    let mut end = || -> Result<usize> {
                        let v: usize = words
                            .next()
                            .and_then(|w| w.parse().ok())
                            .ok_or_else(|| at("bad endpoint"))?;
                        if v == 0 || v > count {
                            return Err(at(&format!("vertex {v} outside 1..={count}")));
                        }
                        Ok(v)
                    };
                    let (a, b) = (end()?, end()?);
                    if a == b {
                        return Err(at(&format!("self-loop at vertex {a}")));
                    }
                    edges.push((a.to_string(), b.to_string()));
                }
                Some(other) => return Err(at(&format!("unknown line type `{other}`"))),
            }
        }
        let n = n.ok_or_else(|| Error::Graph("missing problem line".into()))?;
        Self::new((1..=n).map(|i| i.to_string()).collect(), &edges)
    }

    pub fn vertices(&self) -> &[String] {
        self.vertices.ids()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(i, j)| (self.vertices.name(i), self.vertices.name(j)))
    }
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRepr {
            vertices: self.vertices().to_vec(),
            edges: self.edges().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = GraphRepr::deserialize(d)?;
        Graph::new(repr.vertices, &repr.edges).map_err(D::Error::custom)
    }
}

/// The three first-level points, doubling as colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    R,
    G,
    B,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::R, Color::G, Color::B];

    pub fn name(self) -> &'static str {
        match self {
            Color::R => "r",
            Color::G => "g",
            Color::B => "b",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Vertex identifier to color.
pub type Coloring = BTreeMap<String, Color>;

/// The two-level instance built from a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThcInstance {
    #[serde(default = "metric::default_version")]
    pub format_version: u32,
    /// `r`, `g`, `b` at pairwise distance 2.
    pub level1: MetricSpace,
    /// Vertices: 2 if adjacent, 1 if distinct and not adjacent.
    pub level2: MetricSpace,
}

/// Two pseudo-ultrametrics and a correspondence between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(default = "metric::default_version")]
    pub format_version: u32,
    pub u_p: PseudoUltrametric,
    pub u_v: PseudoUltrametric,
    pub correspondence: Correspondence,
}

pub fn reduce_from_graph(g: &Graph) -> ThcInstance {
    let names: Vec<String> = Color::ALL.iter().map(|c| c.name().to_string()).collect();
    let two = (0..3)
        .map(|i| (0..3).map(|j| if i == j { 0.0 } else { 2.0 }).collect())
        .collect();
    let level1 = MetricSpace::from_matrix(names, two, false).expect("uniform space is a metric");
    let n = g.len();
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i == j, g.adjacent(i, j)) {
                    (true, _) => 0.0,
                    (false, true) => 2.0,
                    (false, false) => 1.0,
                })
                .collect()
        })
        .collect();
    let level2 = MetricSpace::from_matrix(g.vertices().to_vec(), rows, false)
        .expect("distances in {1, 2} form a metric");
    ThcInstance {
        format_version: metric::FORMAT_VERSION,
        level1,
        level2,
    }
}

fn check_total(g: &Graph, coloring: &Coloring) -> Result<()> {
    if let Some(v) = g.vertices().iter().find(|v| !coloring.contains_key(*v)) {
        return Err(Error::Coloring(format!("vertex `{v}` has no color")));
    }
    if let Some(v) = coloring.keys().find(|v| g.vertices.position(v).is_none()) {
        return Err(Error::Coloring(format!("`{v}` is not a vertex")));
    }
    Ok(())
}

/// First monochromatic edge, if any.
pub fn monochromatic_edge<'g>(g: &'g Graph, coloring: &Coloring) -> Option<(&'g str, &'g str)> {
    g.edges().find(|(a, b)| coloring.get(*a) == coloring.get(*b))
}

/// The witness whose heights and correspondence follow the color classes of
/// `coloring`, proper or not: `U_P` uniform 1, `U_V` 1 across classes and 0
/// within, and each vertex related to its color.
pub fn color_class_witness(inst: &ThcInstance, coloring: &Coloring) -> Result<Witness> {
    let vertices = inst.level2.ids();
    let colors: Vec<Color> = vertices
        .iter()
        .map(|v| {
            coloring
                .get(v)
                .copied()
                .ok_or_else(|| Error::Coloring(format!("vertex `{v}` has no color")))
        })
        .collect::<Result<_>>()?;
    let u_p = PseudoUltrametric::uniform(inst.level1.ids(), 1.0)?;
    let rows = colors
        .iter()
        .map(|a| colors.iter().map(|b| if a == b { 0.0 } else { 1.0 }).collect())
        .collect();
    let u_v = PseudoUltrametric::from_matrix(vertices.to_vec(), rows)?;
    let correspondence = Correspondence::new(
        vertices
            .iter()
            .zip(&colors)
            .map(|(v, c)| (c.name().to_string(), v.clone()))
            .collect(),
    );
    Ok(Witness {
        format_version: metric::FORMAT_VERSION,
        u_p,
        u_v,
        correspondence,
    })
}

/// Witness for a proper coloring that uses all three colors.
pub fn witness_from_coloring(g: &Graph, coloring: &Coloring) -> Result<Witness> {
    check_total(g, coloring)?;
    if let Some((a, b)) = monochromatic_edge(g, coloring) {
        return Err(Error::Coloring(format!("edge ({a}, {b}) is monochromatic")));
    }
    let used: BTreeSet<Color> = coloring.values().copied().collect();
    if used.len() < 3 {
        return Err(Error::Coloring(format!(
            "coloring uses {} colors; a witness needs all three",
            used.len()
        )));
    }
    color_class_witness(&reduce_from_graph(g), coloring)
}

/// Splits color classes of a proper coloring until all three colors appear,
/// moving the last vertex of the largest class onto an unused color. Returns
/// `None` when the graph has fewer than three vertices.
pub fn pad_coloring(g: &Graph, coloring: &Coloring) -> Result<Option<Coloring>> {
    check_total(g, coloring)?;
    if g.len() < 3 {
        return Ok(None);
    }
    let mut out = coloring.clone();
    loop {
        let mut classes: BTreeMap<Color, Vec<String>> = BTreeMap::new();
        for (v, c) in &out {
            classes.entry(*c).or_default().push(v.clone());
        }
        let Some(free) = Color::ALL.into_iter().find(|c| !classes.contains_key(c)) else {
            return Ok(Some(out));
        };
        let (_, largest) = classes
            .iter()
            .max_by_key(|(c, vs)| (vs.len(), std::cmp::Reverse(**c)))
            .expect("at least one class");
        let moved = largest.last().expect("non-empty class").clone();
        out.insert(moved, free);
    }
}

/// Fit errors and distortion of a witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub fit_first: f64,
    pub fit_second: f64,
    /// Distortion, when the relation is a correspondence.
    pub distortion: Option<f64>,
    pub is_correspondence: bool,
    pub accepted: bool,
}

impl WitnessReport {
    pub fn chi(&self) -> f64 {
        self.fit_first.max(self.fit_second)
    }
}

/// Checks both fit errors against `chi_bound`, the distortion against
/// `rho_bound`, and that the relation is a correspondence. Point sets that
/// do not match the instance are an error.
pub fn verify_witness(
    inst: &ThcInstance,
    w: &Witness,
    chi_bound: f64,
    rho_bound: f64,
) -> Result<WitnessReport> {
    let shape = |e: Error| Error::Witness(e.to_string());
    let fit_first = linf_distance(&inst.level1, &w.u_p).map_err(shape)?;
    let fit_second = linf_distance(&inst.level2, &w.u_v).map_err(shape)?;
    let distortion = match distortion(&w.u_p, &w.u_v, &w.correspondence) {
        Ok(d) => Some(d),
        Err(Error::Correspondence(_)) => None,
        Err(e) => return Err(e),
    };
    let is_correspondence = distortion.is_some();
    let accepted = fit_first <= chi_bound
        && fit_second <= chi_bound
        && distortion.is_some_and(|d| d <= rho_bound);
    Ok(WitnessReport {
        fit_first,
        fit_second,
        distortion,
        is_correspondence,
        accepted,
    })
}

/// Reads a coloring off a witness with fit error below 2 and distortion 0:
/// each vertex takes the unique first-level point it corresponds to.
pub fn coloring_from_witness(inst: &ThcInstance, w: &Witness) -> Result<Coloring> {
    let report = verify_witness(inst, w, f64::INFINITY, f64::INFINITY)?;
    let Some(rho) = report.distortion else {
        return Err(Error::Witness("relation is not a correspondence".into()));
    };
    if report.chi() >= 2.0 {
        return Err(Error::Witness(format!("fit error {} is not below 2", report.chi())));
    }
    if rho > 0.0 {
        return Err(Error::Witness(format!("distortion {rho} is not 0")));
    }
    let mut coloring = Coloring::new();
    for (p, v) in w.correspondence.pairs() {
        let c = Color::from_name(p)
            .ok_or_else(|| Error::Witness(format!("`{p}` is not a first-level point")))?;
        if let Some(prev) = coloring.insert(v.clone(), c) {
            if prev != c {
                return Err(Error::Witness(format!("vertex `{v}` corresponds to two points")));
            }
        }
    }
    let n = inst.level2.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (inst.level2.ids()[i].as_str(), inst.level2.ids()[j].as_str());
            if inst.level2.get(i, j) == 2.0 && coloring[a] == coloring[b] {
                return Err(Error::Witness(format!(
                    "extracted coloring is improper on ({a}, {b})"
                )));
            }
        }
    }
    Ok(coloring)
}

/// Lexicographically first proper 3-coloring (vertex order, then `r < g < b`)
/// by exhaustive backtracking.
pub fn brute_force_3color(g: &Graph) -> Result<Option<Coloring>> {
    let n = g.len();
    if n > BRUTE_FORCE_CAP {
        return Err(Error::TooLarge {
            size: n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let mut assign: Vec<usize> = Vec::with_capacity(n);
    let mut next = 0usize;
    loop {
        let v = assign.len();
        if v == n {
            break;
        }
        let found = (next..3).find(|&c| (0..v).all(|u| assign[u] != c || !g.adjacent(u, v)));
        match found {
            Some(c) => {
                assign.push(c);
                next = 0;
            }
            None => match assign.pop() {
                Some(c) => next = c + 1,
                None => return Ok(None),
            },
        }
    }
    Ok(Some(
        g.vertices()
            .iter()
            .cloned()
            .zip(assign.into_iter().map(|c| Color::ALL[c]))
            .collect(),
    ))
}

/// Searches every map from vertices to colors, in lexicographic order, for a
/// color-class witness accepted at `(chi_bound, rho_bound)`. Candidates are
/// scored on index arrays; the accepted one is rebuilt and re-verified in
/// full.
pub fn search_color_class_witness(
    g: &Graph,
    chi_bound: f64,
    rho_bound: f64,
) -> Result<Option<(Coloring, Witness)>> {
    let n = g.len();
    if n > WITNESS_SEARCH_CAP {
        return Err(Error::TooLarge {
            size: n,
            cap: WITNESS_SEARCH_CAP,
        });
    }
    let inst = reduce_from_graph(g);
    let m_p = inst.level1.to_rows();
    let m_v = inst.level2.to_rows();
    let first_fit = (0..3)
        .flat_map(|a| (0..3).map(move |b| (a, b)))
        .map(|(a, b)| (m_p[a][b] - if a == b { 0.0 } else { 1.0 }).abs())
        .fold(0.0f64, f64::max);
    if first_fit > chi_bound {
        return Ok(None);
    }
    let height = |a: usize, b: usize| if a == b { 0.0 } else { 1.0 };
    let mut digits = vec![0usize; n];
    for code in 0..3usize.pow(n as u32) {
        let mut rest = code;
        for d in digits.iter_mut().rev() {
            *d = rest % 3;
            rest /= 3;
        }
        if (0..3).any(|c| !digits.contains(&c)) {
            continue;
        }
        let mut fit = 0.0f64;
        let mut rho = 0.0f64;
        for v in 0..n {
            for w in 0..n {
                let u_v = height(digits[v], digits[w]);
                fit = fit.max((m_v[v][w] - u_v).abs());
                rho = rho.max((height(digits[v], digits[w]) - u_v).abs());
            }
        }
        if fit > chi_bound || rho > rho_bound {
            continue;
        }
        let coloring: Coloring = g
            .vertices()
            .iter()
            .cloned()
            .zip(digits.iter().map(|&c| Color::ALL[c]))
            .collect();
        let w = color_class_witness(&inst, &coloring)?;
        if !verify_witness(&inst, &w, chi_bound, rho_bound)?.accepted {
            return Err(Error::Witness("index scoring disagrees with full verification".into()));
        }
        return Ok(Some((coloring, w)));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::new(
            vec!["a".into(), "b".into(), "c".into()],
            &[("a", "b"), ("b", "c")],
        )
        .unwrap()
    }

    fn colors(pairs: &[(&str, Color)]) -> Coloring {
        pairs.iter().map(|(v, c)| (v.to_string(), *c)).collect()
    }

    #[test]
    fn reduction_distances() {
        let k3 = reduce_from_graph(&Graph::complete(3));
        assert!(k3.level2.to_rows().iter().flatten().all(|&d| d == 0.0 || d == 2.0));
        assert_eq!(k3.level1.diameter(), 2.0);

        let empty = reduce_from_graph(&Graph::from_indices(3, &[]).unwrap());
        assert!(empty.level2.to_rows().iter().flatten().all(|&d| d == 0.0 || d == 1.0));

        let p = reduce_from_graph(&path3());
        assert_eq!(p.level2.distance("a", "b").unwrap(), 2.0);
        assert_eq!(p.level2.distance("b", "c").unwrap(), 2.0);
        assert_eq!(p.level2.distance("a", "c").unwrap(), 1.0);
    }

    #[test]
    fn rejects_self_loops() {
        let err = Graph::new(vec!["a".into()], &[("a", "a")]);
        assert!(matches!(err, Err(Error::Graph(_))));
        assert!(Graph::from_dimacs("p edge 2 1\ne 1 1\n").is_err());
    }

    #[test]
    fn triangle_witness() {
        let g = Graph::complete(3);
        let c = colors(&[("0", Color::R), ("1", Color::G), ("2", Color::B)]);
        let w = witness_from_coloring(&g, &c).unwrap();
        let inst = reduce_from_graph(&g);
        let report = verify_witness(&inst, &w, 1.0, 0.0).unwrap();
        assert!(report.accepted);
        assert_eq!(report.fit_first, 1.0);
        assert_eq!(report.distortion, Some(0.0));
        assert!(!verify_witness(&inst, &w, 0.5, 0.0).unwrap().accepted);

        let back = coloring_from_witness(&inst, &w).unwrap();
        assert!(monochromatic_edge(&g, &back).is_none());
    }

    #[test]
    fn improper_and_two_color_colorings_rejected() {
        let g = Graph::complete(3);
        let two = colors(&[("0", Color::R), ("1", Color::G), ("2", Color::R)]);
        assert!(matches!(witness_from_coloring(&g, &two), Err(Error::Coloring(_))));
        let p = path3();
        let bip = colors(&[("a", Color::R), ("b", Color::G), ("c", Color::R)]);
        assert!(matches!(witness_from_coloring(&p, &bip), Err(Error::Coloring(_))));
        let padded = pad_coloring(&p, &bip).unwrap().unwrap();
        assert!(monochromatic_edge(&p, &padded).is_none());
        let w = witness_from_coloring(&p, &padded).unwrap();
        assert!(verify_witness(&reduce_from_graph(&p), &w, 1.0, 0.0).unwrap().accepted);
    }

    #[test]
    fn five_cycle_and_petersen_round_trip() {
        for g in [Graph::cycle(5), Graph::petersen()] {
            let c = brute_force_3color(&g).unwrap().unwrap();
            let c = pad_coloring(&g, &c).unwrap().unwrap();
            let w = witness_from_coloring(&g, &c).unwrap();
            let inst = reduce_from_graph(&g);
            assert!(verify_witness(&inst, &w, 1.0, 0.0).unwrap().accepted);
            let back = coloring_from_witness(&inst, &w).unwrap();
            assert!(monochromatic_edge(&g, &back).is_none());
        }
    }

    #[test]
    fn collapsed_first_level_is_rejected() {
        let g = Graph::complete(3);
        let c = colors(&[("0", Color::R), ("1", Color::G), ("2", Color::B)]);
        let mut w = witness_from_coloring(&g, &c).unwrap();
        w.u_p = PseudoUltrametric::from_matrix(
            vec!["r".into(), "g".into(), "b".into()],
            vec![vec![0., 0., 1.], vec![0., 0., 1.], vec![1., 1., 0.]],
        )
        .unwrap();
        let inst = reduce_from_graph(&g);
        assert!(matches!(coloring_from_witness(&inst, &w), Err(Error::Witness(_))));
    }

    #[test]
    fn single_vertex_cannot_cover_three_points() {
        let g = Graph::from_indices(1, &[]).unwrap();
        let inst = reduce_from_graph(&g);
        let w = color_class_witness(&inst, &colors(&[("0", Color::G)])).unwrap();
        let report = verify_witness(&inst, &w, 1.0, 0.0).unwrap();
        assert!(!report.is_correspondence);
        assert!(!report.accepted);
    }

    #[test]
    fn brute_force_examples() {
        assert!(brute_force_3color(&Graph::complete(3)).unwrap().is_some());
        assert!(brute_force_3color(&Graph::complete(4)).unwrap().is_none());
        let c5 = brute_force_3color(&Graph::cycle(5)).unwrap().unwrap();
        assert!(monochromatic_edge(&Graph::cycle(5), &c5).is_none());
        assert!(matches!(
            brute_force_3color(&Graph::from_indices(21, &[]).unwrap()),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn dimacs_parsing() {
        let g = Graph::from_dimacs("c triangle\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.edge_count(), 3);
        let err = Graph::from_dimacs("p edge 2 1\ne 1 5\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn witness_search_matches_brute_force_on_small_graphs() {
        let k4 = Graph::complete(4);
        assert!(search_color_class_witness(&k4, 1.0, 0.0).unwrap().is_none());
        let (c, _) = search_color_class_witness(&Graph::cycle(5), 1.0, 0.0).unwrap().unwrap();
        assert!(monochromatic_edge(&Graph::cycle(5), &c).is_none());
    }

    #[test]
    fn fast_search_agrees_with_full_verification() {
        for n in 1..=4usize {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
            for mask in 0u32..(1 << pairs.len()) {
                let edges: Vec<_> =
                    (0..pairs.len()).filter(|b| mask >> b & 1 == 1).map(|b| pairs[b]).collect();
                let g = Graph::from_indices(n, &edges).unwrap();
                let inst = reduce_from_graph(&g);
                let slow = (0..3usize.pow(n as u32)).find_map(|code| {
                    let coloring: Coloring = (0..n)
                        .map(|v| (v.to_string(), Color::ALL[code / 3usize.pow((n - 1 - v) as u32) % 3]))
                        .collect();
                    let w = color_class_witness(&inst, &coloring).unwrap();
                    verify_witness(&inst, &w, 1.0, 0.0).unwrap().accepted.then_some(coloring)
                });
                let fast = search_color_class_witness(&g, 1.0, 0.0).unwrap().map(|(c, _)| c);
                assert_eq!(fast, slow, "{n} vertices, mask {mask}");
            }
        }
    }

    #[test]
    fn json_formats() {
        let g: Graph = serde_json::from_str(r#"{"vertices":["a","b"],"edges":[["a","b"]]}"#).unwrap();
        assert_eq!(g.edge_count(), 1);
        let c = colors(&[("a", Color::R)]);
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"a":"r"}"#);
    }
}
