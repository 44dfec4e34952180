//! Layered flow network built from a chain of correspondences, and its
//! minimum feasible flow under unit lower bounds on point in-flow.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{Points, TemporalSampling};
use crate::temporal::Correspondence;

/// A vertex of the layered network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Vertex {
    Source,
    Sink,
    /// Point `index` of level `level`, both zero-based.
    Point { level: usize, index: usize },
}

/// Source to every first-level point, correspondence edges between
/// consecutive levels, and every last-level point to the sink. Every point
/// must receive at least one unit of flow.
#[derive(Debug, Clone, Serialize)]
pub struct FlowNetwork {
    levels: Vec<Vec<String>>,
    edges: Vec<(Vertex, Vertex)>,
    /// Outgoing edge indices per vertex, sorted by target point identifier.
    #[serde(skip)]
    out: Vec<Vec<usize>>,
    #[serde(skip)]
    offsets: Vec<usize>,
}

impl FlowNetwork {
    pub fn levels(&self) -> &[Vec<String>] {
        &self.levels
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn point_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Edges between consecutive levels.
    pub fn middle_edges(&self) -> impl Iterator<Item = (usize, (Vertex, Vertex))> + '_ {
        self.edges
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, (a, b))| matches!((a, b), (Vertex::Point { .. }, Vertex::Point { .. })))
    }

    /// Dense numbering: source 0, sink 1, then points level by level.
    pub(crate) fn id(&self, v: Vertex) -> usize {
        match v {
            Vertex::Source => 0,
            Vertex::Sink => 1,
            Vertex::Point { level, index } => 2 + self.offsets[level] + index,
        }
    }

    pub(crate) fn vertex_count(&self) -> usize {
        2 + self.point_count()
    }

    pub(crate) fn outgoing(&self, v: Vertex) -> &[usize] {
        &self.out[self.id(v)]
    }

    pub fn point_name(&self, v: Vertex) -> Option<&str> {
        match v {
            Vertex::Point { level, index } => Some(&self.levels[level][index]),
            _ => None,
        }
    }
}

/// Builds the network for `sampling` linked by `correspondences`, one per
/// consecutive level pair.
pub fn build_flow_instance(
    sampling: &TemporalSampling,
    correspondences: &[Correspondence],
) -> Result<FlowNetwork> {
    let t = sampling.len();
    if correspondences.len() + 1 != t {
        return Err(Error::Correspondence(format!(
            "{} correspondences for {} levels",
            correspondences.len(),
            t
        )));
    }
    let levels: Vec<Vec<String>> = (0..t)
        .map(|i| sampling.level_ids(i).into_iter().map(String::from).collect())
        .collect();
    let points: Vec<Points> = levels
        .iter()
        .map(|l| Points::new(l.clone()))
        .collect::<Result<_>>()?;

    let mut edges = Vec::new();
    for index in 0..levels[0].len() {
        edges.push((Vertex::Source, Vertex::Point { level: 0, index }));
    }
    for (i, c) in correspondences.iter().enumerate() {
        let mut pairs = c.resolve(&points[i], &points[i + 1])?;
        pairs.sort_unstable();
        pairs.dedup();
        for (a, b) in pairs {
            edges.push((
                Vertex::Point { level: i, index: a },
                Vertex::Point { level: i + 1, index: b },
            ));
        }
    }
    for index in 0..levels[t - 1].len() {
        edges.push((Vertex::Point { level: t - 1, index }, Vertex::Sink));
    }

    let mut offsets = Vec::with_capacity(t);
    let mut acc = 0;
    for l in &levels {
        offsets.push(acc);
        acc += l.len();
    }
    let mut net = FlowNetwork {
        levels,
        edges,
        out: Vec::new(),
        offsets,
    };
    let mut out = vec![Vec::new(); net.vertex_count()];
    for (k, &(a, _)) in net.edges.iter().enumerate() {
        out[net.id(a)].push(k);
    }
    for list in &mut out {
        list.sort_by(|&x, &y| {
            let tx = net.edges[x].1;
            let ty = net.edges[y].1;
            net.point_name(tx).cmp(&net.point_name(ty)).then(tx.cmp(&ty))
        });
    }
    net.out = out;
    Ok(net)
}

/// Integral flow on the edges of a [`FlowNetwork`], indexed like
/// [`FlowNetwork::edges`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntegralFlow {
    pub flow: Vec<u64>,
    pub value: u64,
}

impl IntegralFlow {
    /// In-flow of every point, level by level.
    pub fn point_inflow(&self, net: &FlowNetwork) -> Vec<Vec<u64>> {
        let mut inflow: Vec<Vec<u64>> = net.levels.iter().map(|l| vec![0; l.len()]).collect();
        for (k, &(_, b)) in net.edges.iter().enumerate() {
            if let Vertex::Point { level, index } = b {
                inflow[level][index] += self.flow[k];
            }
        }
        inflow
    }

    /// Verifies conservation, the unit lower bounds and the reported value.
    pub fn check_feasible(&self, net: &FlowNetwork) -> Result<()> {
        if self.flow.len() != net.edges.len() {
            return Err(Error::Flow("flow does not match the network".into()));
        }
        let mut balance = vec![0i64; net.vertex_count()];
        let mut inflow = vec![0u64; net.vertex_count()];
        for (k, &(a, b)) in net.edges.iter().enumerate() {
            let f = self.flow[k] as i64;
            balance[net.id(a)] -= f;
            balance[net.id(b)] += f;
            inflow[net.id(b)] += self.flow[k];
        }
        if -balance[0] != self.value as i64 || balance[1] != self.value as i64 {
            return Err(Error::Flow("value disagrees with terminal balances".into()));
        }
        for v in 2..net.vertex_count() {
            if balance[v] != 0 {
                return Err(Error::Flow(format!("conservation fails at vertex {v}")));
            }
            if inflow[v] == 0 {
                return Err(Error::Flow(format!("vertex {v} receives no flow")));
            }
        }
        Ok(())
    }
}

const INF: i64 = 1 << 40;

/// Dinic's algorithm on an adjacency-list residual graph.
struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Self {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    /// Adds `a -> b` with capacity `c`; returns the arc index. The paired
    /// reverse arc is at `index ^ 1`.
    fn add(&mut self, a: usize, b: usize, c: i64) -> usize {
        let k = self.to.len();
        self.head[a].push(k);
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(k + 1);
        self.to.push(a);
        self.cap.push(0);
        k
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = std::collections::VecDeque::new();
        self.level[s] = 0;
        queue.push_back(s);
        while let Some(x) = queue.pop_front() {
            for &k in &self.head[x] {
                let y = self.to[k];
                if self.cap[k] > 0 && self.level[y] < 0 {
                    self.level[y] = self.level[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, x: usize, t: usize, limit: i64) -> i64 {
        if x == t {
            return limit;
        }
        while self.iter[x] < self.head[x].len() {
            let k = self.head[x][self.iter[x]];
            let y = self.to[k];
            if self.cap[k] > 0 && self.level[y] == self.level[x] + 1 {
                let pushed = self.dfs(y, t, limit.min(self.cap[k]));
                if pushed > 0 {
                    self.cap[k] -= pushed;
                    self.cap[k ^ 1] += pushed;
                    return pushed;
                }
            }
            self.iter[x] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, INF);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

/// A feasible flow built by routing one unit through every point that has
/// none yet, extending it backward and forward along the correspondences.
/// Its value is at most the number of points.
pub fn greedy_feasible_flow(net: &FlowNetwork) -> Result<IntegralFlow> {
    let t = net.levels.len();
    // incoming middle edge per point: first in edge order
    let mut incoming: Vec<Vec<Option<usize>>> = net.levels.iter().map(|l| vec![None; l.len()]).collect();
    let mut into_sink = vec![usize::MAX; net.levels[t - 1].len()];
    let mut from_source = vec![usize::MAX; net.levels[0].len()];
    for (k, &(a, b)) in net.edges.iter().enumerate() {
        match (a, b) {
            (Vertex::Source, Vertex::Point { index, .. }) => from_source[index] = k,
            (Vertex::Point { index, .. }, Vertex::Sink) => into_sink[index] = k,
            (Vertex::Point { .. }, Vertex::Point { level, index }) => {
                incoming[level][index].get_or_insert(k);
            }
            _ => return Err(Error::Flow("unexpected edge".into())),
        }
    }
    let mut flow = vec![0u64; net.edges.len()];
    let mut covered: Vec<Vec<bool>> = net.levels.iter().map(|l| vec![false; l.len()]).collect();
    let mut value = 0;
    for level in 0..t {
        for index in 0..net.levels[level].len() {
            if covered[level][index] {
                continue;
            }
            covered[level][index] = true;
            // backward to the first level
            let mut v = Vertex::Point { level, index };
            while let Vertex::Point { level: l, index: i } = v {
                if l == 0 {
                    flow[from_source[i]] += 1;
                    break;
                }
                let k = incoming[l][i].ok_or_else(|| Error::Flow("point without predecessor".into()))?;
                flow[k] += 1;
                v = net.edges[k].0;
                if let Vertex::Point { level: l, index: i } = v {
                    covered[l][i] = true;
                }
            }
            // forward to the last level
            let mut v = Vertex::Point { level, index };
            while let Vertex::Point { level: l, index: i } = v {
                if l + 1 == t {
                    flow[into_sink[i]] += 1;
                    break;
                }
                let k = *net
                    .outgoing(v)
                    .first()
                    .ok_or_else(|| Error::Flow("point without successor".into()))?;
                flow[k] += 1;
                v = net.edges[k].1;
                if let Vertex::Point { level: l, index: i } = v {
                    covered[l][i] = true;
                }
            }
            value += 1;
        }
    }
    Ok(IntegralFlow { flow, value })
}

/// Minimum-value integral flow meeting every unit lower bound.
///
/// Points are split into an in and an out copy joined by an arc with lower
/// bound one. Starting from the greedy feasible flow, a maximum flow from
/// sink to source in the residual network (forward arcs unbounded, backward
/// arcs limited to the flow above the lower bound) cancels as much flow as
/// possible.
pub fn min_feasible_flow(net: &FlowNetwork) -> Result<IntegralFlow> {
    let start = greedy_feasible_flow(net)?;
    start.check_feasible(net)?;
    let points = net.point_count();
    // vertex ids: 0 source, 1 sink, 2 + p => in copy, 2 + points + p => out copy
    let split_in = |v: Vertex| match v {
        Vertex::Point { .. } => net.id(v),
        other => net.id(other),
    };
    let split_out = |v: Vertex| match v {
        Vertex::Point { .. } => net.id(v) + points,
        other => net.id(other),
    };
    let mut g = Dinic::new(2 + 2 * points);
    let inflow = start.point_inflow(net);
    let mut point_arcs = Vec::with_capacity(points);
    for (level, row) in inflow.iter().enumerate() {
        for (index, &f) in row.iter().enumerate() {
            let v = Vertex::Point { level, index };
            let grow = g.add(split_in(v), split_out(v), INF);
            let shrink = g.add(split_out(v), split_in(v), f as i64 - 1);
            point_arcs.push((grow, shrink));
        }
    }
    let mut edge_arcs = Vec::with_capacity(net.edges.len());
    for (k, &(a, b)) in net.edges.iter().enumerate() {
        let grow = g.add(split_out(a), split_in(b), INF);
        let shrink = g.add(split_in(b), split_out(a), start.flow[k] as i64);
        edge_arcs.push((grow, shrink));
    }
    let cancelled = g.max_flow(1, 0);

    let used = |arc: usize, initial: i64| initial - g.cap[arc];
    let mut flow = Vec::with_capacity(net.edges.len());
    for (k, &(grow, shrink)) in edge_arcs.iter().enumerate() {
        let f = start.flow[k] as i64 + used(grow, INF) - used(shrink, start.flow[k] as i64);
        if f < 0 {
            return Err(Error::Flow(format!("negative flow on edge {k}")));
        }
        flow.push(f as u64);
    }
    let result = IntegralFlow {
        flow,
        value: start.value - cancelled as u64,
    };
    result.check_feasible(net)?;
    Ok(result)
}
