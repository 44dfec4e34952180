//! Pseudo-ultrametrics, their fitting to metric spaces, and dendrograms.

mod dendrogram;
mod fit;
mod instability;
mod mst;

pub use dendrogram::{cut_at_height, to_dendrogram, Dendrogram, Merge, Node, Partition};
pub use fit::{fkw_fit, fkw_nearest_ultrametric, subdominant_ultrametric, FkwFit, FitScheme};
pub use instability::{instability_pair, InstabilityPair};
pub use mst::{minimum_spanning_tree, MstEdge, MstEdgeList};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{self, check_basic, Distances, MetricSpace, Points, SpaceRepr, TOL};

/// A symmetric matrix of merge heights obeying the strong triangle inequality.
/// Distinct points may sit at height 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoUltrametric {
    points: Points,
    mu: Vec<f64>,
}

impl Distances for PseudoUltrametric {
    fn points(&self) -> &Points {
        &self.points
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.mu[i * self.points.len() + j]
    }
}

impl PseudoUltrametric {
    pub fn from_matrix(ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let points = Points::new(ids)?;
        let mu = metric::flatten(&points, rows)?;
        if let Some((a, b, c)) = find_violation(&points, &mu)? {
            return Err(Error::NotUltrametric {
                a: points.name(a).to_string(),
                b: points.name(b).to_string(),
                c: points.name(c).to_string(),
            });
        }
        Ok(Self { points, mu })
    }

    /// Every distinct pair at the same height `h`.
    pub fn uniform<S: AsRef<str>>(ids: &[S], h: f64) -> Result<Self> {
        let points = Points::new(ids.iter().map(|s| s.as_ref().to_string()).collect())?;
        let n = points.len();
        let mut mu = vec![h; n * n];
        for i in 0..n {
            mu[i * n + i] = 0.0;
        }
        check_basic(&points, &mu, true)?;
        Ok(Self { points, mu })
    }

    pub(crate) fn from_parts(points: Points, mu: Vec<f64>) -> Self {
        debug_assert_eq!(mu.len(), points.len() * points.len());
        Self { points, mu }
    }

    /// Views the heights as a pseudometric space.
    pub fn to_metric(&self) -> MetricSpace {
        MetricSpace::from_parts(self.points.clone(), self.mu.clone(), true)
    }
}

/// Outcome of checking a matrix for the strong triangle inequality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UltrametricCheck {
    Valid,
    /// `mu(a, c) > max(mu(a, b), mu(b, c))`.
    Violation { a: String, b: String, c: String },
}

impl UltrametricCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, UltrametricCheck::Valid)
    }
}

/// Checks the strong triangle inequality with [`TOL`] slack and reports the
/// first violating triple in lexicographic order. Asymmetric, negative or
/// nonzero-diagonal input is an error rather than a violation.
pub fn validate_ultrametric<D: Distances + ?Sized>(space: &D) -> Result<UltrametricCheck> {
    let n = space.len();
    let mut mu = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            mu.push(space.get(i, j));
        }
    }
    let points = space.points();
    Ok(match find_violation(points, &mu)? {
        None => UltrametricCheck::Valid,
        Some((a, b, c)) => UltrametricCheck::Violation {
            a: points.name(a).to_string(),
            b: points.name(b).to_string(),
            c: points.name(c).to_string(),
        },
    })
}

fn find_violation(points: &Points, mu: &[f64]) -> Result<Option<(usize, usize, usize)>> {
    check_basic(points, mu, true)?;
    let n = points.len();
    for a in 0..n {
        for b in 0..n {
            let ab = mu[a * n + b];
            for c in 0..n {
                if mu[a * n + c] > ab.max(mu[b * n + c]) + TOL {
                    return Ok(Some((a, b, c)));
                }
            }
        }
    }
    Ok(None)
}

impl Serialize for PseudoUltrametric {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpaceRepr {
            format_version: metric::FORMAT_VERSION,
            points: self.points.ids().to_vec(),
            coords: None,
            matrix: Some(self.to_rows()),
            pseudo: true,
            ultrametric: true,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PseudoUltrametric {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SpaceRepr::deserialize(d)?;
        metric::check_version(repr.format_version).map_err(D::Error::custom)?;
        let matrix = repr
            .matrix
            .ok_or_else(|| D::Error::custom("ultrametric needs a `matrix`"))?;
        PseudoUltrametric::from_matrix(repr.points, matrix).map_err(D::Error::custom)
    }
}
