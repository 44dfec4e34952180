//! Finite metric spaces, temporal samplings, and the distances between them.
//!
//! Every space stores a full row-major distance matrix. Points are identified
//! by opaque strings that are unique within a space; two spaces are compared
//! by identifier, never by position.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack used for every comparison against a bound.
pub const TOL: f64 = 1e-9;

/// Version stamped into every serialized artifact.
pub const FORMAT_VERSION: u32 = 1;

/// Ordered set of point identifiers with a reverse index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Points {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Points {
    pub fn new(ids: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicatePoint(id.clone()));
            }
        }
        Ok(Self { ids, index })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize> {
        self.position(id)
            .ok_or_else(|| Error::UnknownPoint(id.to_string()))
    }

    pub fn name(&self, i: usize) -> &str {
        &self.ids[i]
    }
}

/// Read access shared by metric spaces and ultrametrics.
pub trait Distances {
    fn points(&self) -> &Points;

    /// Distance between the points at positions `i` and `j`.
    fn get(&self, i: usize, j: usize) -> f64;

    fn len(&self) -> usize {
        self.points().len()
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn ids(&self) -> &[String] {
        self.points().ids()
    }

    fn distance(&self, a: &str, b: &str) -> Result<f64> {
        let i = self.points().require(a)?;
        let j = self.points().require(b)?;
        Ok(self.get(i, j))
    }

    /// Largest pairwise distance, 0 for spaces with fewer than two points.
    fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                best = best.max(self.get(i, j));
            }
        }
        best
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }
}

/// A finite (pseudo)metric space, optionally backed by ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    points: Points,
    dist: Vec<f64>,
    coords: Option<Vec<Vec<f64>>>,
    pseudo: bool,
}

impl Distances for MetricSpace {
    fn points(&self) -> &Points {
        &self.points
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.points.len() + j]
    }
}

impl MetricSpace {
    /// Builds a space from a full distance matrix and validates every metric
    /// axiom. Zero distances between distinct points require `pseudo`.
    pub fn from_matrix(ids: Vec<String>, rows: Vec<Vec<f64>>, pseudo: bool) -> Result<Self> {
        let points = Points::new(ids)?;
        let dist = flatten(&points, rows)?;
        let space = Self {
            points,
            dist,
            coords: None,
            pseudo,
        };
        space.validate()?;
        Ok(space)
    }

    /// Builds the Euclidean space on the given coordinates. Coincident
    /// coordinates mark the space as pseudometric.
    pub fn from_coords(ids: Vec<String>, coords: Vec<Vec<f64>>) -> Result<Self> {
        let points = Points::new(ids)?;
        if coords.len() != points.len() {
            return Err(Error::Shape {
                rows: coords.len(),
                cols: coords.first().map_or(0, Vec::len),
                n: points.len(),
            });
        }
        let dim = coords.first().map_or(0, Vec::len);
        for (i, c) in coords.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::Dimension {
                    point: points.name(i).to_string(),
                    expected: dim,
                    got: c.len(),
                });
            }
            if let Some(v) = c.iter().find(|v| !v.is_finite()) {
                return Err(Error::Negative {
                    a: points.name(i).to_string(),
                    b: points.name(i).to_string(),
                    value: *v,
                });
            }
        }
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        let mut pseudo = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = euclidean(&coords[i], &coords[j]);
                pseudo |= d == 0.0;
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(Self {
            points,
            dist,
            coords: Some(coords),
            pseudo,
        })
    }

    /// Points on the real line at the given positions.
    pub fn on_line<S: AsRef<str>>(ids: &[S], xs: &[f64]) -> Result<Self> {
        Self::from_coords(
            ids.iter().map(|s| s.as_ref().to_string()).collect(),
            xs.iter().map(|&x| vec![x]).collect(),
        )
    }

    /// Assembles a space from trusted parts without re-checking the axioms.
    pub(crate) fn from_parts(points: Points, dist: Vec<f64>, pseudo: bool) -> Self {
        debug_assert_eq!(dist.len(), points.len() * points.len());
        Self {
            points,
            dist,
            coords: None,
            pseudo,
        }
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn is_pseudo(&self) -> bool {
        self.pseudo
    }

    /// Checks symmetry, the zero diagonal, nonnegativity, the triangle
    /// inequality and, when present, agreement with the coordinates.
    pub fn validate(&self) -> Result<()> {
        check_basic(&self.points, &self.dist, self.pseudo)?;
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let dij = self.get(i, j);
                for k in 0..n {
                    if self.get(i, k) > dij + self.get(j, k) + TOL {
                        return Err(Error::Triangle {
                            a: self.points.name(i).to_string(),
                            b: self.points.name(j).to_string(),
                            c: self.points.name(k).to_string(),
                        });
                    }
                }
            }
        }
        if let Some(coords) = &self.coords {
            for i in 0..n {
                for j in (i + 1)..n {
                    if (euclidean(&coords[i], &coords[j]) - self.get(i, j)).abs() > TOL {
                        return Err(Error::CoordsMismatch {
                            a: self.points.name(i).to_string(),
                            b: self.points.name(j).to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn flatten(points: &Points, rows: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let n = points.len();
    if rows.len() != n {
        return Err(Error::Shape {
            rows: rows.len(),
            cols: rows.first().map_or(0, Vec::len),
            n,
        });
    }
    let mut dist = Vec::with_capacity(n * n);
    for row in rows {
        if row.len() != n {
            return Err(Error::Shape {
                rows: n,
                cols: row.len(),
                n,
            });
        }
        dist.extend(row);
    }
    Ok(dist)
}

/// Symmetry, diagonal and sign checks shared with ultrametric validation.
pub(crate) fn check_basic(points: &Points, dist: &[f64], pseudo: bool) -> Result<()> {
    let n = points.len();
    for i in 0..n {
        if dist[i * n + i].abs() > TOL {
            return Err(Error::Diagonal(points.name(i).to_string()));
        }
        for j in 0..n {
            let v = dist[i * n + j];
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Negative {
                    a: points.name(i).to_string(),
                    b: points.name(j).to_string(),
                    value: v,
                });
            }
            let w = dist[j * n + i];
            if (v - w).abs() > TOL {
                return Err(Error::Asymmetric {
                    a: points.name(i).to_string(),
                    b: points.name(j).to_string(),
                    ab: v,
                    ba: w,
                });
            }
            if !pseudo && i != j && v == 0.0 {
                return Err(Error::ZeroDistance {
                    a: points.name(i).to_string(),
                    b: points.name(j).to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Maps every point of `a` to its position in `b`, failing on the first
/// point that only one of the two spaces contains.
pub(crate) fn align(a: &Points, b: &Points) -> Result<Vec<usize>> {
    let map = a
        .ids()
        .iter()
        .map(|id| {
            b.position(id)
                .ok_or_else(|| Error::PointSetMismatch(id.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    if b.len() != a.len() {
        if let Some(extra) = b.ids().iter().find(|id| a.position(id).is_none()) {
            return Err(Error::PointSetMismatch(extra.clone()));
        }
    }
    Ok(map)
}

/// Largest absolute difference between corresponding distances of two spaces
/// over the same point set.
pub fn linf_distance<A, B>(a: &A, b: &B) -> Result<f64>
where
    A: Distances + ?Sized,
    B: Distances + ?Sized,
{
    let map = align(a.points(), b.points())?;
    let n = a.len();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            best = best.max((a.get(i, j) - b.get(map[i], map[j])).abs());
        }
    }
    Ok(best)
}

pub(crate) fn resolve<S: AsRef<str>>(space: &MetricSpace, ids: &[S]) -> Result<Vec<usize>> {
    ids.iter()
        .map(|s| space.points.require(s.as_ref()))
        .collect()
}

/// Hausdorff distance between two point subsets of `ambient`.
pub fn hausdorff_distance<S: AsRef<str>>(p: &[S], q: &[S], ambient: &MetricSpace) -> Result<f64> {
    let p = resolve(ambient, p)?;
    let q = resolve(ambient, q)?;
    hausdorff_indices(&p, &q, ambient)
}

pub(crate) fn hausdorff_indices(p: &[usize], q: &[usize], ambient: &MetricSpace) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::Empty);
    }
    let directed = |from: &[usize], to: &[usize]| {
        from.iter()
            .map(|&x| {
                to.iter()
                    .map(|&y| ambient.get(x, y))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    Ok(directed(p, q).max(directed(q, p)))
}

/// The subspace on `subset`, in the order given, with inherited distances.
pub fn restrict<S: AsRef<str>>(space: &MetricSpace, subset: &[S]) -> Result<MetricSpace> {
    let idx = resolve(space, subset)?;
    restrict_indices(space, &idx)
}

pub(crate) fn restrict_indices(space: &MetricSpace, idx: &[usize]) -> Result<MetricSpace> {
    let points = Points::new(idx.iter().map(|&i| space.points.name(i).to_string()).collect())?;
    let m = idx.len();
    let mut dist = vec![0.0; m * m];
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            dist[a * m + b] = space.get(i, j);
        }
    }
    let coords = space
        .coords
        .as_ref()
        .map(|c| idx.iter().map(|&i| c[i].clone()).collect());
    Ok(MetricSpace {
        points,
        dist,
        coords,
        pseudo: space.pseudo,
    })
}

/// Random perturbation of `space` within L∞ distance `eps`.
///
/// Each unordered pair receives an independent offset drawn uniformly from
/// `[-eps, eps]`; entries are clamped at zero and closed under shortest
/// paths so the result is again a pseudometric. If the closure pulled some
/// entry further than `eps` from the original, all offsets are scaled back
/// uniformly, which keeps the result a convex combination of two metrics.
///
/// # Panics
///
/// Panics if `eps` is negative or not finite.
pub fn perturb(space: &MetricSpace, eps: f64, seed: u64) -> MetricSpace {
    assert!(eps.is_finite() && eps >= 0.0, "perturbation size must be >= 0");
    if eps == 0.0 {
        return space.clone();
    }
    let n = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dist = space.dist.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (space.get(i, j) + rng.gen_range(-eps..=eps)).max(0.0);
            dist[i * n + j] = v;
            dist[j * n + i] = v;
        }
    }
    shortest_path_closure(&mut dist, n);

    let worst = space
        .dist
        .iter()
        .zip(&dist)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if worst > eps {
        let scale = eps / worst;
        for (d, &orig) in dist.iter_mut().zip(&space.dist) {
            *d = (orig + scale * (*d - orig)).max(0.0);
        }
    }
    let pseudo = space.pseudo || (0..n).any(|i| (0..n).any(|j| i != j && dist[i * n + j] == 0.0));
    MetricSpace::from_parts(space.points.clone(), dist, pseudo)
}

/// Floyd-Warshall relaxation in place.
pub(crate) fn shortest_path_closure(dist: &mut [f64], n: usize) {
    for k in 0..n {
        for i in 0..n {
            let dik = dist[i * n + k];
            for j in 0..n {
                let via = dik + dist[k * n + j];
                if via < dist[i * n + j] {
                    dist[i * n + j] = via;
                }
            }
        }
    }
}

/// An ordered sequence of non-empty point subsets of one ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalSampling {
    ambient: MetricSpace,
    levels: Vec<Vec<usize>>,
}

impl TemporalSampling {
    pub fn new<S: AsRef<str>>(ambient: MetricSpace, levels: &[Vec<S>]) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Empty);
        }
        let mut resolved = Vec::with_capacity(levels.len());
        for level in levels {
            if level.is_empty() {
                return Err(Error::Empty);
            }
            let idx = resolve(&ambient, level)?;
            let mut seen = idx.clone();
            seen.sort_unstable();
            if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicatePoint(ambient.points.name(w[0]).to_string()));
            }
            resolved.push(idx);
        }
        Ok(Self {
            ambient,
            levels: resolved,
        })
    }

    pub fn ambient(&self) -> &MetricSpace {
        &self.ambient
    }

    /// Number of levels.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Total number of points summed over all levels.
    pub fn size(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Ambient positions of the points of level `i`.
    pub fn level(&self, i: usize) -> &[usize] {
        &self.levels[i]
    }

    pub fn level_ids(&self, i: usize) -> Vec<&str> {
        self.levels[i]
            .iter()
            .map(|&p| self.ambient.points.name(p))
            .collect()
    }

    /// The restriction of the ambient space to level `i`.
    pub fn level_space(&self, i: usize) -> MetricSpace {
        restrict_indices(&self.ambient, &self.levels[i])
            .expect("level identifiers are unique by construction")
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct SpaceRepr {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub points: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub pseudo: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ultrametric: bool,
}

pub(crate) fn default_version() -> u32 {
    FORMAT_VERSION
}

pub(crate) fn check_version(v: u32) -> Result<()> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(Error::FormatVersion(v))
    }
}

impl Serialize for MetricSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = SpaceRepr {
            format_version: FORMAT_VERSION,
            points: self.points.ids.clone(),
            coords: self.coords.clone(),
            matrix: self.coords.is_none().then(|| self.to_rows()),
            pseudo: self.pseudo,
            ultrametric: false,
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MetricSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SpaceRepr::deserialize(d)?;
        MetricSpace::try_from(repr).map_err(D::Error::custom)
    }
}

impl TryFrom<SpaceRepr> for MetricSpace {
    type Error = Error;

    fn try_from(repr: SpaceRepr) -> Result<Self> {
        check_version(repr.format_version)?;
        match (repr.coords, repr.matrix) {
            (Some(coords), None) => {
                let space = MetricSpace::from_coords(repr.points, coords)?;
                if space.pseudo && !repr.pseudo {
                    check_basic(&space.points, &space.dist, false)?;
                }
                Ok(space)
            }
            (None, Some(matrix)) => MetricSpace::from_matrix(repr.points, matrix, repr.pseudo),
            (Some(coords), Some(matrix)) => {
                let points = Points::new(repr.points.clone())?;
                let dist = flatten(&points, matrix)?;
                let space = MetricSpace {
                    points,
                    dist,
                    coords: Some(coords),
                    pseudo: repr.pseudo,
                };
                space.validate()?;
                Ok(space)
            }
            (None, None) => Err(Error::Config(
                "metric space needs either `coords` or `matrix`".into(),
            )),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SamplingRepr {
    #[serde(default = "default_version")]
    format_version: u32,
    ambient: MetricSpace,
    levels: Vec<Vec<String>>,
}

impl Serialize for TemporalSampling {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SamplingRepr {
            format_version: FORMAT_VERSION,
            ambient: self.ambient.clone(),
            levels: (0..self.len())
                .map(|i| self.level_ids(i).into_iter().map(String::from).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TemporalSampling {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SamplingRepr::deserialize(d)?;
        check_version(repr.format_version).map_err(D::Error::custom)?;
        TemporalSampling::new(repr.ambient, &repr.levels).map_err(D::Error::custom)
    }
}
