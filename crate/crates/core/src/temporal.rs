//! Correspondences between consecutive levels and the local solver.
//!
//! The local solver fits every level independently and links consecutive
//! levels by all pairs within their Hausdorff distance, which is the
//! smallest locality any correspondence can achieve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{self, linf_distance, Distances, MetricSpace, Points, TemporalSampling, TOL};
use crate::ultrametric::{validate_ultrametric, FitScheme, PseudoUltrametric, UltrametricCheck};

/// A relation between two point sets whose projections cover both sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Correspondence {
    pairs: Vec<(String, String)>,
}

impl Correspondence {
    pub fn new(pairs: Vec<(String, String)>) -> Self {
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The same relation read in the opposite direction.
    pub fn transposed(&self) -> Self {
        Self {
            pairs: self.pairs.iter().map(|(u, v)| (v.clone(), u.clone())).collect(),
        }
    }

    /// Resolves the pairs against both sides and checks surjectivity.
    pub fn resolve(&self, left: &Points, right: &Points) -> Result<Vec<(usize, usize)>> {
        let mut hit_left = vec![false; left.len()];
        let mut hit_right = vec![false; right.len()];
        let mut out = Vec::with_capacity(self.pairs.len());
        for (u, v) in &self.pairs {
            let i = left.position(u).ok_or_else(|| {
                Error::Correspondence(format!("`{u}` is not a point of the first set"))
            })?;
            let j = right.position(v).ok_or_else(|| {
                Error::Correspondence(format!("`{v}` is not a point of the second set"))
            })?;
            hit_left[i] = true;
            hit_right[j] = true;
            out.push((i, j));
        }
        if let Some(i) = hit_left.iter().position(|h| !h) {
            return Err(Error::Correspondence(format!(
                "`{}` of the first set has no partner",
                left.name(i)
            )));
        }
        if let Some(j) = hit_right.iter().position(|h| !h) {
            return Err(Error::Correspondence(format!(
                "`{}` of the second set has no partner",
                right.name(j)
            )));
        }
        Ok(out)
    }
}

/// All pairs of `p × q` within the Hausdorff distance of the two sets
/// (with [`TOL`] slack), which always covers both sides.
pub fn build_hausdorff_correspondence<S: AsRef<str>>(
    p: &[S],
    q: &[S],
    ambient: &MetricSpace,
) -> Result<Correspondence> {
    let p = metric::resolve(ambient, p)?;
    let q = metric::resolve(ambient, q)?;
    hausdorff_pairs(&p, &q, ambient).map(|pairs| to_named(&pairs, ambient))
}

fn hausdorff_pairs(p: &[usize], q: &[usize], ambient: &MetricSpace) -> Result<Vec<(usize, usize)>> {
    let radius = metric::hausdorff_indices(p, q, ambient)?;
    let mut pairs = Vec::new();
    for &x in p {
        for &y in q {
            if ambient.get(x, y) <= radius + TOL {
                pairs.push((x, y));
            }
        }
    }
    Ok(pairs)
}

fn to_named(pairs: &[(usize, usize)], ambient: &MetricSpace) -> Correspondence {
    let p = ambient.points();
    Correspondence::new(
        pairs
            .iter()
            .map(|&(x, y)| (p.name(x).to_string(), p.name(y).to_string()))
            .collect(),
    )
}

/// Largest ambient distance between related points.
pub fn locality(c: &Correspondence, ambient: &MetricSpace) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::Correspondence("empty relation".into()));
    }
    let mut best = 0.0f64;
    for (u, v) in c.pairs() {
        best = best.max(ambient.distance(u, v)?);
    }
    Ok(best)
}

/// Merge distortion of `c`: the largest `|h1(u, u') - h2(v, v')|` over all
/// ordered pairs of related pairs `(u, v), (u', v')`.
pub fn distortion<A, B>(h1: &A, h2: &B, c: &Correspondence) -> Result<f64>
where
    A: Distances + ?Sized,
    B: Distances + ?Sized,
{
    let pairs = c.resolve(h1.points(), h2.points())?;
    Ok(resolved_distortion(h1, h2, &pairs))
}

fn resolved_distortion<A, B>(h1: &A, h2: &B, pairs: &[(usize, usize)]) -> f64
where
    A: Distances + ?Sized,
    B: Distances + ?Sized,
{
    let mut best = 0.0f64;
    for (k, &(u, v)) in pairs.iter().enumerate() {
        for &(u2, v2) in &pairs[k + 1..] {
            best = best.max((h1.get(u, u2) - h2.get(v, v2)).abs());
        }
    }
    best
}

/// Output of the local solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSolution {
    #[serde(default = "metric::default_version")]
    pub format_version: u32,
    pub scheme: FitScheme,
    pub ultrametrics: Vec<PseudoUltrametric>,
    pub correspondences: Vec<Correspondence>,
    /// Largest per-level fit error.
    pub chi: f64,
    /// Largest locality; 0 for a single level.
    pub delta: f64,
    /// Largest distortion; 0 for a single level.
    pub rho: f64,
    /// True when there are no consecutive levels, so `delta` and `rho` are
    /// vacuous.
    #[serde(default)]
    pub vacuous: bool,
}

/// Fits every level with `scheme` and links consecutive levels by their
/// Hausdorff correspondences.
pub fn solve_local(sampling: &TemporalSampling, scheme: FitScheme) -> LocalSolution {
    solve_local_with_workers(sampling, scheme, 1)
}

/// As [`solve_local`], spreading per-level work over `workers` threads. The
/// result does not depend on the worker count.
pub fn solve_local_with_workers(
    sampling: &TemporalSampling,
    scheme: FitScheme,
    workers: usize,
) -> LocalSolution {
    let t = sampling.len();
    let ambient = sampling.ambient();
    let fit_level = |i: usize| {
        let space = sampling.level_space(i);
        let u = scheme.fit(&space);
        let chi = linf_distance(&space, &u).expect("fit shares the level's points");
        (u, chi)
    };
    let link = |i: usize| {
        let raw = hausdorff_pairs(sampling.level(i), sampling.level(i + 1), ambient)
            .expect("levels are non-empty");
        let delta = raw
            .iter()
            .map(|&(x, y)| ambient.get(x, y))
            .fold(0.0f64, f64::max);
        (raw, delta)
    };

    let (fits, links): (Vec<_>, Vec<_>) = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| {
            (
                (0..t).into_par_iter().map(fit_level).collect(),
                (0..t.saturating_sub(1)).into_par_iter().map(link).collect(),
            )
        })
    } else {
        (
            (0..t).map(fit_level).collect(),
            (0..t.saturating_sub(1)).map(link).collect(),
        )
    };

    let mut rho = 0.0f64;
    let mut delta = 0.0f64;
    let mut correspondences = Vec::with_capacity(links.len());
    for (i, (raw, d)) in links.iter().enumerate() {
        delta = delta.max(*d);
        let local: Vec<(usize, usize)> = {
            let pos = |lvl: usize, x: usize| {
                sampling
                    .level(lvl)
                    .iter()
                    .position(|&p| p == x)
                    .expect("pair drawn from the level")
            };
            raw.iter().map(|&(x, y)| (pos(i, x), pos(i + 1, y))).collect()
        };
        rho = rho.max(resolved_distortion(&fits[i].0, &fits[i + 1].0, &local));
        correspondences.push(to_named(raw, ambient));
    }
    let chi = fits.iter().map(|f| f.1).fold(0.0f64, f64::max);
    LocalSolution {
        format_version: metric::FORMAT_VERSION,
        scheme,
        ultrametrics: fits.into_iter().map(|f| f.0).collect(),
        correspondences,
        chi,
        delta,
        rho,
        vacuous: t < 2,
    }
}

/// Metrics of one level (fit) or one level pair (locality, distortion).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMetrics {
    pub chi: f64,
    /// Locality and distortion of the link to the next level, when any.
    pub delta: Option<f64>,
    pub rho: Option<f64>,
}

/// Independently recomputed quality of a local solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub scheme: FitScheme,
    pub chi: f64,
    pub delta: f64,
    pub rho: f64,
    /// `2χ + 2δ` for the optimal fitter, `χ + 2δ` for the one-sided
    /// subdominant fitter.
    pub rho_bound: f64,
    pub levels: Vec<LevelMetrics>,
}

/// Recomputes `χ`, `δ` and `ρ` of `sol` from the sampling and checks the
/// distortion bound implied by its fitting scheme. A failure names the first
/// offending level.
pub fn evaluate_general(sampling: &TemporalSampling, sol: &LocalSolution) -> Result<Certification> {
    let t = sampling.len();
    if sol.ultrametrics.len() != t {
        return Err(Error::Certification {
            level: sol.ultrametrics.len().min(t),
            reason: format!("{} ultrametrics for {} levels", sol.ultrametrics.len(), t),
        });
    }
    if sol.correspondences.len() != t - 1 {
        return Err(Error::Certification {
            level: 0,
            reason: format!(
                "{} correspondences for {} levels",
                sol.correspondences.len(),
                t
            ),
        });
    }
    let ambient = sampling.ambient();
    let mut levels = Vec::with_capacity(t);
    for (i, u) in sol.ultrametrics.iter().enumerate() {
        let fail = |reason: String| Error::Certification { level: i, reason };
        if let UltrametricCheck::Violation { a, b, c } =
            validate_ultrametric(u).map_err(|e| fail(e.to_string()))?
        {
            return Err(fail(format!("not an ultrametric on ({a}, {b}, {c})")));
        }
        let space = sampling.level_space(i);
        let chi = linf_distance(&space, u).map_err(|e| fail(e.to_string()))?;
        levels.push(LevelMetrics {
            chi,
            delta: None,
            rho: None,
        });
    }
    for (i, c) in sol.correspondences.iter().enumerate() {
        let fail = |e: Error| Error::Certification {
            level: i,
            reason: e.to_string(),
        };
        let pairs = c
            .resolve(sol.ultrametrics[i].points(), sol.ultrametrics[i + 1].points())
            .map_err(fail)?;
        levels[i].delta = Some(locality(c, ambient).map_err(fail)?);
        levels[i].rho = Some(resolved_distortion(
            &sol.ultrametrics[i],
            &sol.ultrametrics[i + 1],
            &pairs,
        ));
    }
    let chi = levels.iter().map(|l| l.chi).fold(0.0f64, f64::max);
    let delta = levels.iter().filter_map(|l| l.delta).fold(0.0f64, f64::max);
    let rho = levels.iter().filter_map(|l| l.rho).fold(0.0f64, f64::max);
    let rho_bound = match sol.scheme {
        FitScheme::Fkw => 2.0 * chi + 2.0 * delta,
        FitScheme::Subdominant => chi + 2.0 * delta,
    };
    for (i, l) in levels.iter().enumerate() {
        if let Some(r) = l.rho {
            if r > rho_bound + TOL {
                return Err(Error::Certification {
                    level: i,
                    reason: format!("distortion {r} exceeds the bound {rho_bound}"),
                });
            }
        }
    }
    for (name, reported, actual) in [
        ("chi", sol.chi, chi),
        ("delta", sol.delta, delta),
        ("rho", sol.rho, rho),
    ] {
        if (reported - actual).abs() > TOL {
            return Err(Error::Certification {
                level: 0,
                reason: format!("reported {name} = {reported} but recomputed {actual}"),
            });
        }
    }
    Ok(Certification {
        scheme: sol.scheme,
        chi,
        delta,
        rho,
        rho_bound,
        levels,
    })
}
