//! A family of metric pairs on which the optimal L∞ fitter is unstable.
//!
//! Both spaces are shortest-path metrics of small graphs over a base path
//! `b0 - b1 - ... - b{n-2}` of unit edges and one extra point `u` hanging off
//! the middle base point `v = b{a}`. In the first space `u` is joined to `v`
//! by a unit edge and to `b{a+1}` by an edge of length `1 + eps`; in the
//! second, the base edge `b{a} - b{a+1}` is stretched to `1 + eps` and `u`
//! joins both `b{a}` and `b{a+1}` by unit edges. The two metrics differ by
//! exactly `eps`, yet the spanning tree of the second one is a single path
//! whose ends realize the diameter, which lifts every cut priority to the
//! diameter.

use crate::error::{Error, Result};
use crate::metric::{shortest_path_closure, MetricSpace, Points};

#[derive(Debug, Clone)]
pub struct InstabilityPair {
    pub original: MetricSpace,
    pub perturbed: MetricSpace,
    /// The pendant point.
    pub u: String,
    /// The base point `u` hangs from.
    pub v: String,
}

/// Builds the `n`-point pair with base length `n - 2`.
pub fn instability_pair(n: usize, eps: f64) -> Result<InstabilityPair> {
    if n < 5 {
        return Err(Error::Config(format!("instability family needs n >= 5, got {n}")));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Config(format!("eps must lie in [0, 1), got {eps}")));
    }
    let base = n - 2;
    let a = base.div_ceil(2);
    let mut ids: Vec<String> = (0..=base).map(|i| format!("b{i}")).collect();
    ids.push("u".to_string());
    let u = base + 1;

    let build = |edges: &[(usize, usize, f64)]| -> MetricSpace {
        let mut dist = vec![f64::INFINITY; n * n];
        for i in 0..n {
            dist[i * n + i] = 0.0;
        }
        for &(x, y, w) in edges {
            dist[x * n + y] = w;
            dist[y * n + x] = w;
        }
        shortest_path_closure(&mut dist, n);
        let points = Points::new(ids.clone()).expect("generated identifiers are unique");
        MetricSpace::from_parts(points, dist, false)
    };

    let mut first: Vec<(usize, usize, f64)> = (0..base).map(|i| (i, i + 1, 1.0)).collect();
    first.push((u, a, 1.0));
    first.push((u, a + 1, 1.0 + eps));

    let mut second: Vec<(usize, usize, f64)> = (0..base)
        .map(|i| (i, i + 1, if i == a { 1.0 + eps } else { 1.0 }))
        .collect();
    second.push((u, a, 1.0));
    second.push((u, a + 1, 1.0));

    Ok(InstabilityPair {
        original: build(&first),
        perturbed: build(&second),
        u: "u".to_string(),
        v: format!("b{a}"),
    })
}
