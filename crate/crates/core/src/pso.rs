//! Particle swarm baseline over Steiner-point encodings.
//!
//! A particle holds `2|K| − 2` candidate Steiner points plus a scalar giving how
//! many of them are active. Decoding snaps the active points to the grid, grows
//! a shortest-path spanning tree over terminals and Steiner nodes, prunes
//! Steiner leaves, and reads each cable's route off the tree.

use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{NodeId, Point3};
use crate::model::{evaluate, Instance, Path, Routing};

/// Number of Steiner points a particle carries.
pub fn steiner_capacity(cables: usize) -> usize {
    (2 * cables).saturating_sub(2)
}

/// Length of the flat encoding: three coordinates per Steiner point plus the count.
pub fn encoding_len(cables: usize) -> usize {
    3 * steiner_capacity(cables) + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    /// Flat encoding: `[x0, y0, z0, x1, ..., n]`.
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl Particle {
    pub fn steiner_points(&self) -> impl Iterator<Item = Point3> + '_ {
        let m = (self.position.len() - 1) / 3;
        (0..m).map(move |i| [self.position[3 * i], self.position[3 * i + 1], self.position[3 * i + 2]])
    }

    /// Active point count: rounded half-up and clamped to the capacity.
    pub fn active_count(&self) -> usize {
        let m = (self.position.len() - 1) / 3;
        let n = *self.position.last().unwrap();
        ((n + 0.5).floor().max(0.0) as usize).min(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsoProfile {
    /// Constant inertia 0.729, acceleration 1.494.
    Constriction,
    /// Inertia decaying linearly 0.9 → 0.4, acceleration 2.0.
    LinearDecay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub iterations: usize,
    pub w_start: f64,
    pub w_end: f64,
    pub c1: f64,
    pub c2: f64,
    /// Maximum speed per axis as a fraction of the bounding-box extent.
    pub velocity_clamp: f64,
    pub rng_seed: u64,
}

impl PsoParams {
    pub fn profile(profile: PsoProfile, rng_seed: u64) -> Self {
        let (w_start, w_end, c) = match profile {
            PsoProfile::Constriction => (0.729, 0.729, 1.494),
            PsoProfile::LinearDecay => (0.9, 0.4, 2.0),
        };
        PsoParams {
            swarm_size: 30,
            iterations: 100,
            w_start,
            w_end,
            c1: c,
            c2: c,
            velocity_clamp: 0.2,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(Error::InvalidParameter("swarm_size must be positive".into()));
        }
        let coeffs = [self.w_start, self.w_end, self.c1, self.c2, self.velocity_clamp];
        if coeffs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidParameter("PSO coefficients must be finite and nonnegative".into()));
        }
        Ok(())
    }

    fn inertia(&self, iteration: usize) -> f64 {
        if self.iterations <= 1 {
            return self.w_start;
        }
        let t = iteration as f64 / (self.iterations - 1) as f64;
        self.w_start + (self.w_end - self.w_start) * t
    }
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams::profile(PsoProfile::Constriction, 0)
    }
}

/// Steiner nodes of a particle: active points snapped to the nearest lattice
/// point, dropped if that point was removed, deduplicated.
pub fn snapped_steiner_nodes(instance: &Instance, particle: &Particle) -> Vec<NodeId> {
    let graph = instance.graph();
    let spec = graph.spec();
    let mut out = Vec::new();
    for p in particle.steiner_points().take(particle.active_count()) {
        if let Some(n) = graph.node_at(spec.nearest_lattice(p)) {
            if !out.contains(&n) {
                out.push(n);
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

/// Tree adjacency from [`attachment_paths`].
pub fn spanning_tree(instance: &Instance, targets: &[NodeId]) -> Option<HashMap<NodeId, BTreeSet<NodeId>>> {
    let mut tree: HashMap<NodeId, BTreeSet<NodeId>> = HashMap::new();
    tree.entry(*targets.first()?).or_default();
    for path in attachment_paths(instance, targets)? {
        for w in path.windows(2) {
            tree.entry(w[0]).or_default().insert(w[1]);
            tree.entry(w[1]).or_default().insert(w[0]);
        }
    }
    Some(tree)
}

/// Grows a shortest-path spanning tree from `targets[0]` by repeatedly
/// attaching the nearest unconnected target. Returns the attaching paths in
/// order (target first, tree node last), or `None` when some target is
/// unreachable.
pub fn attachment_paths(instance: &Instance, targets: &[NodeId]) -> Option<Vec<Path>> {
    let graph = instance.graph();
    let n = graph.node_count();
    const NONE: u32 = u32::MAX;
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NONE; n];
    let mut in_tree = vec![false; n];
    let mut is_target = vec![false; n];
    for t in targets {
        is_target[t.index()] = true;
    }
    let mut attachments = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut remaining = targets.iter().collect::<BTreeSet<_>>().len();

    let add_to_tree = |v: NodeId, in_tree: &mut [bool], dist: &mut [f64], pred: &mut [u32], heap: &mut BinaryHeap<Entry>| {
        in_tree[v.index()] = true;
        dist[v.index()] = 0.0;
        pred[v.index()] = NONE;
        heap.push(Entry(0.0, v.0));
    };
    let root = *targets.first()?;
    add_to_tree(root, &mut in_tree, &mut dist, &mut pred, &mut heap);
    remaining -= 1;

    while remaining > 0 {
        // Dijkstra from the current tree; distances only ever decrease as the
        // tree grows, so labels from earlier rounds stay valid upper bounds.
        let mut attached = None;
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u as usize] {
                continue;
            }
            let un = NodeId(u);
            if is_target[un.index()] && !in_tree[un.index()] {
                attached = Some(un);
                heap.push(Entry(d, u));
                break;
            }
            for &(v, e) in graph.neighbors(un) {
                let nd = d + graph.edge_cost(e);
                if nd < dist[v.index()] {
                    dist[v.index()] = nd;
                    pred[v.index()] = u;
                    heap.push(Entry(nd, v.0));
                }
            }
        }
        let t = attached?;
        let mut path = vec![t];
        let mut cur = t;
        while !in_tree[cur.index()] {
            cur = NodeId(pred[cur.index()]);
            path.push(cur);
        }
        for &v in &path {
            if !in_tree[v.index()] {
                add_to_tree(v, &mut in_tree, &mut dist, &mut pred, &mut heap);
            }
        }
        attachments.push(path);
        remaining -= 1;
    }
    Some(attachments)
}

/// Removes non-terminal leaves until every leaf is a terminal.
fn prune_leaves(tree: &mut HashMap<NodeId, BTreeSet<NodeId>>, terminals: &BTreeSet<NodeId>) {
    let mut queue: VecDeque<NodeId> = tree
        .iter()
        .filter(|(v, adj)| adj.len() <= 1 && !terminals.contains(v))
        .map(|(v, _)| *v)
        .collect();
    while let Some(v) = queue.pop_front() {
        let Some(adj) = tree.remove(&v) else { continue };
        for u in adj {
            if let Some(a) = tree.get_mut(&u) {
                a.remove(&v);
                if a.len() <= 1 && !terminals.contains(&u) {
                    queue.push_back(u);
                }
            }
        }
    }
}

fn tree_path(tree: &HashMap<NodeId, BTreeSet<NodeId>>, s: NodeId, t: NodeId) -> Option<Path> {
    let mut parent: HashMap<NodeId, NodeId> = HashMap::new();
    let mut queue = VecDeque::from([s]);
    parent.insert(s, s);
    while let Some(u) = queue.pop_front() {
        if u == t {
            break;
        }
        for &v in tree.get(&u)? {
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(v) {
                e.insert(u);
                queue.push_back(v);
            }
        }
    }
    parent.get(&t)?;
    let mut path = vec![t];
    let mut cur = t;
    while cur != s {
        cur = parent[&cur];
        path.push(cur);
    }
    path.reverse();
    Some(path)
}

/// Decodes a particle into a routing; `None` when the tree cannot connect
/// every terminal.
pub fn decode(instance: &Instance, particle: &Particle) -> Option<Routing> {
    let terminals: BTreeSet<NodeId> = instance.cables().iter().flat_map(|c| [c.start, c.end]).collect();
    let steiner: Vec<NodeId> = snapped_steiner_nodes(instance, particle)
        .into_iter()
        .filter(|n| !terminals.contains(n))
        .collect();
    let mut targets = steiner.clone();
    targets.extend(terminals.iter().copied());
    let mut tree = spanning_tree(instance, &targets)?;
    prune_leaves(&mut tree, &terminals);
    let paths = instance
        .cables()
        .iter()
        .map(|c| tree_path(&tree, c.start, c.end))
        .collect::<Option<Vec<_>>>()?;
    Some(Routing::new(paths))
}

/// Objective of the decoded routing, `+∞` when decoding fails.
pub fn fitness(instance: &Instance, particle: &Particle) -> (f64, Option<Routing>) {
    match decode(instance, particle) {
        Some(r) => match evaluate(instance, &r) {
            Ok(o) => (o.f, Some(r)),
            Err(_) => (f64::INFINITY, None),
        },
        None => (f64::INFINITY, None),
    }
}

#[derive(Debug, Clone)]
pub struct PsoResult {
    pub best_routing: Option<Routing>,
    pub f_best: f64,
    /// Global-best fitness after the initial evaluation and after every iteration.
    pub history: Vec<f64>,
}

/// Bounds of the routing volume and the per-axis speed limit.
fn search_box(instance: &Instance, params: &PsoParams) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let b = instance.graph().spec().bounds();
    let vmax = [0, 1, 2].map(|a| params.velocity_clamp * (b.max[a] - b.min[a]));
    (b.min, b.max, vmax)
}

/// Global-best particle swarm over the Steiner-point encoding.
pub fn pso_solve(instance: &Instance, params: &PsoParams) -> Result<PsoResult> {
    params.validate()?;
    let m = steiner_capacity(instance.cable_count());
    let dim = encoding_len(instance.cable_count());
    let (lo, hi, vmax) = search_box(instance, params);
    let n_vmax = params.velocity_clamp * m as f64;
    let lower = |d: usize| if d + 1 == dim { 0.0 } else { lo[d % 3] };
    let upper = |d: usize| if d + 1 == dim { m as f64 } else { hi[d % 3] };
    let speed = |d: usize| if d + 1 == dim { n_vmax } else { vmax[d % 3] };

    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut swarm: Vec<Particle> = (0..params.swarm_size)
        .map(|_| {
            let position = (0..dim)
                .map(|d| {
                    let (a, b) = (lower(d), upper(d));
                    if b > a {
                        rng.gen_range(a..=b)
                    } else {
                        a
                    }
                })
                .collect();
            let velocity = (0..dim)
                .map(|d| {
                    let s = speed(d);
                    if s > 0.0 {
                        rng.gen_range(-s..=s)
                    } else {
                        0.0
                    }
                })
                .collect();
            Particle { position, velocity }
        })
        .collect();

    let evaluate_all = |swarm: &[Particle]| -> Vec<(f64, Option<Routing>)> {
        swarm.par_iter().map(|p| fitness(instance, p)).collect()
    };

    let first = evaluate_all(&swarm);
    let mut pbest: Vec<(Vec<f64>, f64)> = swarm
        .iter()
        .zip(&first)
        .map(|(p, (f, _))| (p.position.clone(), *f))
        .collect();
    let mut gbest_pos = pbest[0].0.clone();
    let mut gbest = (f64::INFINITY, None::<Routing>);
    for (i, (f, r)) in first.into_iter().enumerate() {
        if f < gbest.0 {
            gbest = (f, r);
            gbest_pos = pbest[i].0.clone();
        }
    }
    let mut history = vec![gbest.0];

    for it in 0..params.iterations {
        let w = params.inertia(it);
        for (i, p) in swarm.iter_mut().enumerate() {
            for d in 0..dim {
                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                let x = p.position[d];
                let mut v = w * p.velocity[d]
                    + params.c1 * r1 * (pbest[i].0[d] - x)
                    + params.c2 * r2 * (gbest_pos[d] - x);
                let s = speed(d);
                v = v.clamp(-s, s);
                p.velocity[d] = v;
                p.position[d] = (x + v).clamp(lower(d), upper(d));
            }
        }
        let fits = evaluate_all(&swarm);
        for (i, (f, r)) in fits.into_iter().enumerate() {
            if f < pbest[i].1 {
                pbest[i] = (swarm[i].position.clone(), f);
            }
            if f < gbest.0 {
                gbest = (f, r);
                gbest_pos = swarm[i].position.clone();
            }
        }
        history.push(gbest.0);
    }
    Ok(PsoResult {
        best_routing: gbest.1,
        f_best: gbest.0,
        history,
    })
}
