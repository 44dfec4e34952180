//! Independent reference implementations and random instance generators
//! shared by the integration tests. Nothing here calls into the library's
//! algorithms; only its data types are used.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thc::{Distances, MetricSpace, TemporalSampling};

pub type Matrix = Vec<Vec<f64>>;

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn rows<D: Distances>(d: &D) -> Matrix {
    let n = d.len();
    (0..n).map(|i| (0..n).map(|j| d.get(i, j)).collect()).collect()
}

/// Random metric on `n` points: planar Euclidean, a random weighted graph's
/// shortest paths, or a metric with many tied distances.
pub fn random_metric(rng: &mut ChaCha8Rng, n: usize) -> MetricSpace {
    let ids = names("p", n);
    match rng.gen_range(0..3) {
        0 => {
            let coords = (0..n)
                .map(|_| vec![rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)])
                .collect();
            MetricSpace::from_coords(ids, coords).unwrap()
        }
        1 => {
            let mut d = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let w = rng.gen_range(0.5..10.0);
                    d[i][j] = w;
                    d[j][i] = w;
                }
            }
            floyd(&mut d);
            MetricSpace::from_matrix(ids, d, false).unwrap()
        }
        _ => {
            let mut d = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let w = rng.gen_range(1..=4) as f64;
                    d[i][j] = w;
                    d[j][i] = w;
                }
            }
            floyd(&mut d);
            MetricSpace::from_matrix(ids, d, false).unwrap()
        }
    }
}

pub fn floyd(d: &mut Matrix) {
    let n = d.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
}

/// Random sampling in the plane: `levels` levels of 1..=`max_size` points,
/// occasionally repeating points of the previous level.
pub fn random_sampling(rng: &mut ChaCha8Rng, levels: usize, max_size: usize) -> TemporalSampling {
    let mut ids = Vec::new();
    let mut coords = Vec::new();
    let mut lv: Vec<Vec<String>> = Vec::new();
    for l in 0..levels {
        let size = rng.gen_range(1..=max_size);
        let mut level = Vec::new();
        if l > 0 && rng.gen_bool(0.2) {
            let prev = lv[l - 1].clone();
            level.extend(prev.into_iter().take(size));
        }
        while level.len() < size {
            let id = format!("x{}", ids.len());
            ids.push(id.clone());
            coords.push(vec![rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)]);
            level.push(id);
        }
        lv.push(level);
    }
    TemporalSampling::new(MetricSpace::from_coords(ids, coords).unwrap(), &lv).unwrap()
}

/// Largest ultrametric below `d`: minimax path lengths.
pub fn minimax(d: &Matrix) -> Matrix {
    let n = d.len();
    let mut u = d.clone();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = u[i][k].max(u[k][j]);
                if via < u[i][j] {
                    u[i][j] = via;
                }
            }
        }
    }
    u
}

pub fn linf(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn is_ultrametric(u: &Matrix, tol: f64) -> bool {
    let n = u.len();
    (0..n).all(|i| {
        (0..n).all(|j| {
            u[i][j] >= 0.0
                && (u[i][j] - u[j][i]).abs() <= tol
                && (0..n).all(|k| u[i][k] <= u[i][j].max(u[j][k]) + tol)
        })
    })
}

pub fn hausdorff(p: &[usize], q: &[usize], d: &Matrix) -> f64 {
    let side = |a: &[usize], b: &[usize]| {
        a.iter()
            .map(|&x| b.iter().map(|&y| d[x][y]).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    side(p, q).max(side(q, p))
}

/// Smallest locality of any correspondence between `p` and `q`, found by
/// enumerating every relation when there are at most `full_cap` candidate
/// pairs, and otherwise every threshold relation `{d <= t}`. A covering
/// relation lies inside the threshold relation at its own locality, so both
/// enumerations reach the same minimum.
pub fn min_locality(p: &[usize], q: &[usize], d: &Matrix, full_cap: usize) -> f64 {
    let pairs: Vec<(usize, usize)> = (0..p.len())
        .flat_map(|i| (0..q.len()).map(move |j| (i, j)))
        .collect();
    let covers = |rel: &[(usize, usize)]| {
        (0..p.len()).all(|i| rel.iter().any(|r| r.0 == i))
            && (0..q.len()).all(|j| rel.iter().any(|r| r.1 == j))
    };
    let loc = |rel: &[(usize, usize)]| {
        rel.iter().map(|&(i, j)| d[p[i]][q[j]]).fold(0.0, f64::max)
    };
    let mut best = f64::INFINITY;
    if pairs.len() <= full_cap {
        for mask in 1u64..(1u64 << pairs.len()) {
            let rel: Vec<_> = (0..pairs.len())
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| pairs[b])
                .collect();
            if covers(&rel) {
                best = best.min(loc(&rel));
            }
        }
    } else {
        for &(i, j) in &pairs {
            let t = d[p[i]][q[j]];
            let rel: Vec<_> = pairs
                .iter()
                .copied()
                .filter(|&(a, b)| d[p[a]][q[b]] <= t)
                .collect();
            if covers(&rel) {
                best = best.min(t.max(loc(&rel)));
            }
        }
    }
    best
}

/// Total weight of a minimum spanning tree, by enumerating every labelled
/// tree through its Prüfer sequence.
pub fn brute_mst_weight(d: &Matrix) -> f64 {
    let n = d.len();
    if n <= 1 {
        return 0.0;
    }
    if n == 2 {
        return d[0][1];
    }
    let mut best = f64::INFINITY;
    let mut seq = vec![0usize; n - 2];
    loop {
        let mut degree = vec![1usize; n];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut total = 0.0;
        for &s in &seq {
            let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
            total += d[leaf][s];
            degree[leaf] = 0;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        total += d[rest[0]][rest[1]];
        best = best.min(total);
        let mut k = 0;
        loop {
            if k == seq.len() {
                return best;
            }
            seq[k] += 1;
            if seq[k] < n {
                break;
            }
            seq[k] = 0;
            k += 1;
        }
    }
}

/// Blocks of the graph joining points at distance at most `r`, as sorted
/// identifier sets.
pub fn threshold_components(ids: &[String], d: &Matrix, r: f64) -> BTreeSet<BTreeSet<String>> {
    let n = ids.len();
    let mut comp: Vec<usize> = (0..n).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            for j in 0..n {
                if d[i][j] <= r && comp[j] < comp[i] {
                    comp[i] = comp[j];
                    changed = true;
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for c in 0..n {
        let block: BTreeSet<String> = (0..n).filter(|&i| comp[i] == c).map(|i| ids[i].clone()).collect();
        if !block.is_empty() {
            out.insert(block);
        }
    }
    out
}

/// Smallest number of first-to-last paths through consecutive levels, each
/// step along an allowed pair, that visit every point. `links[i]` holds the
/// allowed `(a, b)` into levels `i` and `i + 1`.
pub fn brute_min_path_cover(sizes: &[usize], links: &[Vec<(usize, usize)>]) -> Option<usize> {
    let mut paths: Vec<Vec<usize>> = (0..sizes[0]).map(|a| vec![a]).collect();
    for link in links {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                let last = *p.last().unwrap();
                link.iter()
                    .filter(move |&&(a, _)| a == last)
                    .map(move |&(_, b)| {
                        let mut q = p.clone();
                        q.push(b);
                        q
                    })
            })
            .collect();
    }
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let masks: Vec<u64> = paths
        .iter()
        .map(|p| p.iter().enumerate().fold(0u64, |m, (l, &x)| m | 1 << (offsets[l] + x)))
        .collect();
    let full = (1u64 << sizes.iter().sum::<usize>()) - 1;
    fn pick(masks: &[u64], from: usize, left: usize, have: u64, full: u64) -> bool {
        if have == full {
            return true;
        }
        left > 0 && (from..masks.len()).any(|i| pick(masks, i + 1, left - 1, have | masks[i], full))
    }
    (1..=masks.len()).find(|&k| pick(&masks, 0, k, 0, full))
}

/// Distortion of a relation given as index pairs into two matrices.
pub fn distortion(h1: &Matrix, h2: &Matrix, pairs: &[(usize, usize)]) -> f64 {
    let mut worst = 0.0f64;
    for &(x, y) in pairs {
        for &(a, b) in pairs {
            worst = worst.max((h1[x][a] - h2[y][b]).abs());
        }
    }
    worst
}
