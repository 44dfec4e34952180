//! From local correspondences to contiguous multi-labelings.
//!
//! A minimum feasible flow through the layered correspondence network is
//! split into unit paths from the first level to the last; path `j` hands
//! label `j` to every point it visits. Each label therefore appears once per
//! level and only moves along correspondence edges, so consecutive labelings
//! are contiguous at the correspondences' locality.

mod flow;

pub use flow::{
    build_flow_instance, greedy_feasible_flow, min_feasible_flow, FlowNetwork, IntegralFlow,
    Vertex,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{self, Distances, MetricSpace, TemporalSampling, TOL};
use crate::temporal::{solve_local_with_workers, LocalSolution};
use crate::ultrametric::FitScheme;

/// One point per level, first to last, by position within each level.
pub type Path = Vec<usize>;

/// Splits `flow` into unit paths. Each step follows the positive-flow edge
/// whose target has the smallest identifier.
pub fn decompose_paths(net: &FlowNetwork, flow: &IntegralFlow) -> Result<Vec<Path>> {
    flow.check_feasible(net)?;
    let mut rest = flow.flow.clone();
    let mut paths = Vec::with_capacity(flow.value as usize);
    let take = |rest: &mut Vec<u64>, from: Vertex| -> Result<Vertex> {
        let k = net
            .outgoing(from)
            .iter()
            .copied()
            .find(|&k| rest[k] > 0)
            .ok_or_else(|| Error::Flow("flow ran dry before reaching the sink".into()))?;
        rest[k] -= 1;
        Ok(net.edges()[k].1)
    };
    for _ in 0..flow.value {
        let mut v = take(&mut rest, Vertex::Source)?;
        let mut path = Vec::with_capacity(net.levels().len());
        while let Vertex::Point { index, .. } = v {
            path.push(index);
            v = take(&mut rest, v)?;
        }
        paths.push(path);
    }
    if rest.iter().any(|&r| r > 0) {
        return Err(Error::Flow("flow left over after extracting all paths".into()));
    }
    Ok(paths)
}

/// Labels of one point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub point: String,
    /// Sorted, 1-based.
    pub labels: Vec<u32>,
}

/// A `k`-labeling of every level: each level's label sets partition `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeling {
    #[serde(default = "metric::default_version")]
    pub format_version: u32,
    pub k: u32,
    pub levels: Vec<Vec<LabeledPoint>>,
}

impl Labeling {
    /// Checks that every level's label sets are non-empty and partition `1..=k`.
    pub fn validate(&self) -> Result<()> {
        for (i, level) in self.levels.iter().enumerate() {
            check_partition(level, self.k).map_err(|e| Error::Labeling(format!("level {i}: {e}")))?;
        }
        Ok(())
    }

    /// Smallest label of a set of points' labels, the representative label
    /// of a cluster.
    pub fn cluster_label<S: AsRef<str>>(&self, level: usize, points: &[S]) -> Option<u32> {
        self.levels.get(level)?.iter()
            .filter(|lp| points.iter().any(|p| p.as_ref() == lp.point))
            .flat_map(|lp| lp.labels.iter().copied())
            .min()
    }
}

fn check_partition(level: &[LabeledPoint], k: u32) -> std::result::Result<(), String> {
    let mut seen = vec![false; k as usize + 1];
    for lp in level {
        if lp.labels.is_empty() {
            return Err(format!("`{}` has no label", lp.point));
        }
        for &j in &lp.labels {
            if j == 0 || j > k {
                return Err(format!("label {j} outside 1..={k}"));
            }
            if std::mem::replace(&mut seen[j as usize], true) {
                return Err(format!("label {j} used twice"));
            }
        }
    }
    if let Some(j) = (1..=k).find(|&j| !seen[j as usize]) {
        return Err(format!("label {j} unused"));
    }
    Ok(())
}

/// Numbers the paths `1..=k` in lexicographic order of their point
/// identifiers and gives every point the labels of the paths through it.
pub fn paths_to_labelings(net: &FlowNetwork, paths: &[Path]) -> Result<Labeling> {
    let levels = net.levels();
    for p in paths {
        if p.len() != levels.len() || p.iter().zip(levels).any(|(&i, l)| i >= l.len()) {
            return Err(Error::Labeling("path does not visit one point per level".into()));
        }
    }
    let mut order: Vec<&Path> = paths.iter().collect();
    order.sort_by(|a, b| {
        let ka = a.iter().enumerate().map(|(l, &i)| &levels[l][i]);
        let kb = b.iter().enumerate().map(|(l, &i)| &levels[l][i]);
        ka.cmp(kb)
    });
    let mut sets: Vec<Vec<Vec<u32>>> = levels.iter().map(|l| vec![Vec::new(); l.len()]).collect();
    for (j, path) in order.iter().enumerate() {
        for (l, &i) in path.iter().enumerate() {
            sets[l][i].push(j as u32 + 1);
        }
    }
    let labeling = Labeling {
        format_version: metric::FORMAT_VERSION,
        k: paths.len() as u32,
        levels: levels
            .iter()
            .zip(sets)
            .map(|(ids, s)| {
                ids.iter()
                    .cloned()
                    .zip(s)
                    .map(|(point, labels)| LabeledPoint { point, labels })
                    .collect()
            })
            .collect(),
    };
    labeling.validate()?;
    Ok(labeling)
}

/// Result of checking two consecutive labelings.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Contiguity {
    Holds,
    /// `condition` 1: a label of `point` in the first level is missing from
    /// its δ-ball in the second; `condition` 2 is the mirror image.
    Violated {
        condition: u8,
        point: String,
        label: u32,
    },
}

impl Contiguity {
    pub fn holds(&self) -> bool {
        matches!(self, Contiguity::Holds)
    }
}

/// Checks both containment conditions of δ-contiguity with closed balls.
pub fn check_contiguity(
    first: &[LabeledPoint],
    second: &[LabeledPoint],
    delta: f64,
    ambient: &MetricSpace,
) -> Result<Contiguity> {
    let resolve = |level: &[LabeledPoint]| -> Result<Vec<usize>> {
        level.iter().map(|lp| ambient.points().require(&lp.point)).collect()
    };
    let (a, b) = (resolve(first)?, resolve(second)?);
    let one_way = |from: &[LabeledPoint], fi: &[usize], to: &[LabeledPoint], ti: &[usize]| {
        for (lp, &x) in from.iter().zip(fi) {
            for &label in &lp.labels {
                let found = to
                    .iter()
                    .zip(ti)
                    .any(|(q, &y)| ambient.get(x, y) <= delta + TOL && q.labels.contains(&label));
                if !found {
                    return Some((lp.point.clone(), label));
                }
            }
        }
        None
    };
    if let Some((point, label)) = one_way(first, &a, second, &b) {
        return Ok(Contiguity::Violated {
            condition: 1,
            point,
            label,
        });
    }
    if let Some((point, label)) = one_way(second, &b, first, &a) {
        return Ok(Contiguity::Violated {
            condition: 2,
            point,
            label,
        });
    }
    Ok(Contiguity::Holds)
}

/// Output of the labeled pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledSolution {
    pub local: LocalSolution,
    pub labeling: Labeling,
    pub flow_value: u64,
}

/// Local solve, flow construction, minimum flow, path decomposition and
/// labeling, in that order.
pub fn solve_labeled(sampling: &TemporalSampling, scheme: FitScheme) -> Result<LabeledSolution> {
    solve_labeled_with_workers(sampling, scheme, 1)
}

pub fn solve_labeled_with_workers(
    sampling: &TemporalSampling,
    scheme: FitScheme,
    workers: usize,
) -> Result<LabeledSolution> {
    let local = solve_local_with_workers(sampling, scheme, workers);
    let net = build_flow_instance(sampling, &local.correspondences)?;
    let flow = min_feasible_flow(&net)?;
    let paths = decompose_paths(&net, &flow)?;
    let labeling = paths_to_labelings(&net, &paths)?;
    Ok(LabeledSolution {
        local,
        labeling,
        flow_value: flow.value,
    })
}
