//! A seeded flocking simulation producing temporal samplings whose
//! population changes over time.
//!
//! Actors of four types move in a square arena with repulsive walls. Each
//! tick accumulates three steering forces (clumping toward nearby actors of
//! the same type, avoidance of any actor that is too close, schooling toward
//! the mean velocity of the same type), clamps the speed, moves, reflects off
//! the walls and then resolves close encounters: two actors of the same type
//! may produce a new actor of random type at their midpoint, and two of
//! different types may lose the one with the larger identifier.
//!
//! Randomness comes from ChaCha8 seeded with `seed`, split into three
//! streams: stream 0 draws the initial state, stream 1 decides encounters,
//! stream 2 draws the types and nothing else of spawned actors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{self, MetricSpace, TemporalSampling};

pub const TYPE_COUNT: u8 = 4;

const INIT_STREAM: u64 = 0;
const INTERACT_STREAM: u64 = 1;
const SPAWN_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Actor {
    pub id: u64,
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub kind: u8,
}

/// Simulation parameters. Every value is an invented default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub actor_count: usize,
    pub arena_side: f64,
    pub wall_force: f64,
    /// Distance from a wall at which its push starts.
    pub wall_margin: f64,
    pub clump_weight: f64,
    pub avoid_weight: f64,
    pub school_weight: f64,
    pub clump_radius: f64,
    pub avoid_radius: f64,
    pub interact_radius: f64,
    pub interact_prob: f64,
    pub spawn_prob: f64,
    pub delete_prob: f64,
    /// Spawning stops while the population is at this size.
    pub max_actors: usize,
    pub dt: f64,
    pub max_speed: f64,
    pub snapshot_interval: usize,
    pub total_ticks: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            actor_count: 40,
            arena_side: 100.0,
            wall_force: 20.0,
            wall_margin: 5.0,
            clump_weight: 10.0,
            avoid_weight: 1.0,
            school_weight: 0.5,
            clump_radius: 15.0,
            avoid_radius: 3.0,
            interact_radius: 1.0,
            interact_prob: 0.02,
            spawn_prob: 0.5,
            delete_prob: 0.5,
            max_actors: 160,
            dt: 0.1,
            max_speed: 5.0,
            snapshot_interval: 50,
            total_ticks: 500,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.actor_count == 0 {
            return bad("actor_count must be positive".into());
        }
        if self.max_actors < self.actor_count {
            return bad("max_actors must be at least actor_count".into());
        }
        if !(self.arena_side.is_finite() && self.arena_side > 0.0) {
            return bad(format!("arena_side must be positive, got {}", self.arena_side));
        }
        let non_negative = [
            ("wall_force", self.wall_force),
            ("wall_margin", self.wall_margin),
            ("clump_weight", self.clump_weight),
            ("avoid_weight", self.avoid_weight),
            ("school_weight", self.school_weight),
            ("clump_radius", self.clump_radius),
            ("avoid_radius", self.avoid_radius),
            ("interact_radius", self.interact_radius),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if self.avoid_radius > self.clump_radius {
            return bad("avoid_radius must not exceed clump_radius".into());
        }
        if self.wall_margin * 2.0 > self.arena_side {
            return bad("wall_margin must not exceed half the arena".into());
        }
        for (name, p) in [
            ("interact_prob", self.interact_prob),
            ("spawn_prob", self.spawn_prob),
            ("delete_prob", self.delete_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.max_speed.is_finite() && self.max_speed > 0.0) {
            return bad(format!("max_speed must be positive, got {}", self.max_speed));
        }
        if self.snapshot_interval == 0 {
            return bad("snapshot_interval must be positive".into());
        }
        Ok(())
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// A running simulation.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimConfig,
    actors: Vec<Actor>,
    next_id: u64,
    tick: usize,
    interact_rng: ChaCha8Rng,
    spawn_rng: ChaCha8Rng,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let mut init = stream(cfg.seed, INIT_STREAM);
        let side = cfg.arena_side;
        let actors = (0..cfg.actor_count as u64)
            .map(|id| {
                let position = [init.gen_range(0.0..=side), init.gen_range(0.0..=side)];
                let angle = init.gen_range(0.0..std::f64::consts::TAU);
                let speed = init.gen_range(0.0..=cfg.max_speed);
                Actor {
                    id,
                    position,
                    velocity: [speed * angle.cos(), speed * angle.sin()],
                    kind: init.gen_range(0..TYPE_COUNT),
                }
            })
            .collect();
        Ok(Self::with_actors(cfg, actors))
    }

    /// Starts from a given state. Identifiers must be distinct.
    pub fn from_actors(cfg: SimConfig, mut actors: Vec<Actor>) -> Result<Self> {
        cfg.validate()?;
        actors.sort_by_key(|a| a.id);
        if actors.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(Error::Config("actor identifiers must be distinct".into()));
        }
        if actors.iter().any(|a| a.kind >= TYPE_COUNT) {
            return Err(Error::Config(format!("actor types must be below {TYPE_COUNT}")));
        }
        Ok(Self::with_actors(cfg, actors))
    }

    fn with_actors(cfg: SimConfig, actors: Vec<Actor>) -> Self {
        let next_id = actors.iter().map(|a| a.id + 1).max().unwrap_or(0);
        Self {
            interact_rng: stream(cfg.seed, INTERACT_STREAM),
            spawn_rng: stream(cfg.seed, SPAWN_STREAM),
            cfg,
            actors,
            next_id,
            tick: 0,
        }
    }

    /// Actors sorted by identifier.
    pub fn actors(&self) -> &[Actor] {
        &self.actors
    }

    pub fn tick(&self) -> usize {
        self.tick
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Advances one tick.
    pub fn step(&mut self) {
        let cfg = &self.cfg;
        let accel = forces(&self.actors, cfg);
        let side = cfg.arena_side;
        for (actor, a) in self.actors.iter_mut().zip(accel) {
            let mut v = [
                actor.velocity[0] + a[0] * cfg.dt,
                actor.velocity[1] + a[1] * cfg.dt,
            ];
            let speed = v[0].hypot(v[1]);
            if speed > cfg.max_speed {
                let s = cfg.max_speed / speed;
                v = [v[0] * s, v[1] * s];
            }
            for (p, vk) in actor.position.iter_mut().zip(v.iter_mut()) {
                let mut x = *p + *vk * cfg.dt;
                if x < 0.0 {
                    x = -x;
                    *vk = -*vk;
                } else if x > side {
                    x = 2.0 * side - x;
                    *vk = -*vk;
                }
                *p = x.clamp(0.0, side);
            }
            actor.velocity = v;
        }
        self.interact();
        self.tick += 1;
        log::trace!("tick {} population {}", self.tick, self.actors.len());
    }

    fn interact(&mut self) {
        let cfg = &self.cfg;
        if cfg.interact_prob == 0.0 {
            return;
        }
        let n = self.actors.len();
        let mut busy = vec![false; n];
        let mut deleted = vec![false; n];
        let mut born = Vec::new();
        let r2 = cfg.interact_radius * cfg.interact_radius;
        for i in 0..n {
            for j in (i + 1)..n {
                if busy[i] || busy[j] {
                    continue;
                }
                let (a, b) = (&self.actors[i], &self.actors[j]);
                let dx = a.position[0] - b.position[0];
                let dy = a.position[1] - b.position[1];
                if dx * dx + dy * dy > r2 {
                    continue;
                }
                if !self.interact_rng.gen_bool(cfg.interact_prob) {
                    continue;
                }
                busy[i] = true;
                busy[j] = true;
                if a.kind == b.kind {
                    if self.interact_rng.gen_bool(cfg.spawn_prob)
                        && n + born.len() < cfg.max_actors
                    {
                        born.push(Actor {
                            id: self.next_id,
                            position: [
                                (a.position[0] + b.position[0]) / 2.0,
                                (a.position[1] + b.position[1]) / 2.0,
                            ],
                            velocity: [0.0, 0.0],
                            kind: self.spawn_rng.gen_range(0..TYPE_COUNT),
                        });
                        self.next_id += 1;
                    }
                } else if self.interact_rng.gen_bool(cfg.delete_prob) {
                    deleted[j] = true;
                }
            }
        }
        let mut idx = 0;
        self.actors.retain(|_| {
            idx += 1;
            !deleted[idx - 1]
        });
        self.actors.extend(born);
    }
}

fn forces(actors: &[Actor], cfg: &SimConfig) -> Vec<[f64; 2]> {
    let mut mean_velocity = [[0.0f64; 2]; TYPE_COUNT as usize];
    let mut counts = [0usize; TYPE_COUNT as usize];
    for a in actors {
        let k = a.kind as usize;
        mean_velocity[k][0] += a.velocity[0];
        mean_velocity[k][1] += a.velocity[1];
        counts[k] += 1;
    }
    for (m, &c) in mean_velocity.iter_mut().zip(&counts) {
        if c > 0 {
            m[0] /= c as f64;
            m[1] /= c as f64;
        }
    }
    let side = cfg.arena_side;
    actors
        .iter()
        .map(|a| {
            let mut f = [0.0; 2];
            let mut centroid = [0.0; 2];
            let mut near = 0usize;
            for b in actors {
                if b.id == a.id {
                    continue;
                }
                let d = [b.position[0] - a.position[0], b.position[1] - a.position[1]];
                let dist = d[0].hypot(d[1]);
                if b.kind == a.kind && dist <= cfg.clump_radius {
                    centroid[0] += b.position[0];
                    centroid[1] += b.position[1];
                    near += 1;
                }
                if dist < cfg.avoid_radius && dist > 0.0 {
                    let push = cfg.avoid_weight * (cfg.avoid_radius - dist) / cfg.avoid_radius;
                    f[0] -= push * d[0] / dist;
                    f[1] -= push * d[1] / dist;
                }
            }
            if near > 0 && cfg.clump_radius > 0.0 {
                for k in 0..2 {
                    let toward = centroid[k] / near as f64 - a.position[k];
                    f[k] += cfg.clump_weight * toward / cfg.clump_radius;
                }
            }
            let m = mean_velocity[a.kind as usize];
            for k in 0..2 {
                f[k] += cfg.school_weight * (m[k] - a.velocity[k]);
            }
            if cfg.wall_margin > 0.0 {
                for (fk, &x) in f.iter_mut().zip(&a.position) {
                    if x < cfg.wall_margin {
                        *fk += cfg.wall_force * (cfg.wall_margin - x) / cfg.wall_margin;
                    } else if x > side - cfg.wall_margin {
                        *fk -= cfg.wall_force * (x - (side - cfg.wall_margin)) / cfg.wall_margin;
                    }
                }
            }
            f
        })
        .collect()
}

/// A finished run: the sampling plus what produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRun {
    #[serde(default = "metric::default_version")]
    pub format_version: u32,
    pub config: SimConfig,
    /// Population at each snapshot.
    pub population: Vec<usize>,
    pub sampling: TemporalSampling,
}

/// Snapshots the initial state and then every `snapshot_interval` ticks up
/// to `total_ticks`. Point `t{L}/a{I}` is actor `I` at snapshot `L`.
pub fn run(cfg: &SimConfig) -> Result<SimRun> {
    let mut sim = Simulation::new(cfg.clone())?;
    let mut ids = Vec::new();
    let mut coords = Vec::new();
    let mut levels: Vec<Vec<String>> = Vec::new();
    let mut population = Vec::new();
    let mut snapshot = |sim: &Simulation| {
        let level = levels.len();
        let names: Vec<String> = sim
            .actors()
            .iter()
            .map(|a| format!("t{level}/a{}", a.id))
            .collect();
        ids.extend(names.iter().cloned());
        coords.extend(sim.actors().iter().map(|a| a.position.to_vec()));
        population.push(names.len());
        levels.push(names);
    };
    snapshot(&sim);
    for t in 1..=cfg.total_ticks {
        sim.step();
        if t % cfg.snapshot_interval == 0 {
            snapshot(&sim);
        }
    }
    let ambient = MetricSpace::from_coords(ids, coords)?;
    let sampling = TemporalSampling::new(ambient, &levels)?;
    Ok(SimRun {
        format_version: metric::FORMAT_VERSION,
        config: cfg.clone(),
        population,
        sampling,
    })
}
