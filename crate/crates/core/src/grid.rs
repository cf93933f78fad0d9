//! Discretized routing environment.
//!
//! The environment is a Cartesian lattice of nodes. Two nodes are adjacent when
//! their lattice coordinates differ by at most one along every axis (26-connectivity
//! in 3D). Obstacle boxes remove every node inside them and every edge whose
//! segment touches them. Cost-multiplier boxes scale the cost of the nodes they
//! contain, and an edge costs its Euclidean length times the mean cost of its
//! endpoints.
//!
//! Node ids are dense and follow the linearized lattice order (x fastest, then y,
//! then z), restricted to surviving nodes. Edge ids are ordered by `(u, v)` with
//! `u < v`. All tie-breaking in the crate relies on these orders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

/// Lower bound applied to node costs so every edge cost stays strictly positive.
pub const MIN_NODE_COST: f64 = 1e-6;

const REMOVED: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// World position of lattice point (0, 0, 0), meters.
    pub origin: Point3,
    /// Cell size along each axis, meters.
    pub cell_size: Point3,
    /// Node counts along each axis.
    pub dims: [usize; 3],
}

impl GridSpec {
    pub fn new(origin: Point3, cell_size: Point3, dims: [usize; 3]) -> Result<Self> {
        let spec = GridSpec {
            origin,
            cell_size,
            dims,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit-cell grid anchored at the origin.
    pub fn unit(dims: [usize; 3]) -> Result<Self> {
        Self::new([0.0; 3], [1.0; 3], dims)
    }

    pub fn validate(&self) -> Result<()> {
        for axis in 0..3 {
            if self.dims[axis] < 1 {
                return Err(Error::InvalidGrid(format!(
                    "dims[{axis}] must be at least 1"
                )));
            }
            let c = self.cell_size[axis];
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "cell_size[{axis}] must be positive, got {c}"
                )));
            }
            if !self.origin[axis].is_finite() {
                return Err(Error::InvalidGrid(format!("origin[{axis}] is not finite")));
            }
        }
        let total = self.dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        match total {
            Some(n) if n < REMOVED as usize => Ok(()),
            _ => Err(Error::InvalidGrid("too many lattice points".into())),
        }
    }

    pub fn lattice_len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn linear_index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    #[inline]
    pub fn lattice_coords(&self, linear: usize) -> [usize; 3] {
        let x = linear % self.dims[0];
        let rest = linear / self.dims[0];
        [x, rest % self.dims[1], rest / self.dims[1]]
    }

    #[inline]
    pub fn position(&self, c: [usize; 3]) -> Point3 {
        [
            self.origin[0] + c[0] as f64 * self.cell_size[0],
            self.origin[1] + c[1] as f64 * self.cell_size[1],
            self.origin[2] + c[2] as f64 * self.cell_size[2],
        ]
    }

    /// Axis-aligned box spanned by the lattice.
    pub fn bounds(&self) -> Aabb {
        let max = self.position([self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1]);
        Aabb {
            min: self.origin,
            max,
        }
    }

    /// Nearest lattice point; exact ties resolve toward the smaller coordinate,
    /// which is also the smaller linearized index.
    pub fn nearest_lattice(&self, p: Point3) -> [usize; 3] {
        let mut out = [0usize; 3];
        for axis in 0..3 {
            let t = (p[axis] - self.origin[axis]) / self.cell_size[axis];
            let hi = (self.dims[axis] - 1) as f64;
            let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, hi) };
            let lo = t.floor();
            let up = (lo + 1.0).min(hi);
            let d_lo = (p[axis] - (self.origin[axis] + lo * self.cell_size[axis])).abs();
            let d_up = (p[axis] - (self.origin[axis] + up * self.cell_size[axis])).abs();
            out[axis] = if d_up < d_lo { up as usize } else { lo as usize };
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Result<Self> {
        if (0..3).any(|a| !(min[a] <= max[a])) {
            return Err(Error::InvalidZone(format!(
                "box min {min:?} exceeds max {max:?}"
            )));
        }
        Ok(Aabb { min, max })
    }

    pub fn contains(&self, p: Point3) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    /// Closed segment versus closed box (slab test).
    pub fn intersects_segment(&self, a: Point3, b: Point3) -> bool {
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for axis in 0..3 {
            let d = b[axis] - a[axis];
            if d == 0.0 {
                if a[axis] < self.min[axis] || a[axis] > self.max[axis] {
                    return false;
                }
                continue;
            }
            let mut lo = (self.min[axis] - a[axis]) / d;
            let mut hi = (self.max[axis] - a[axis]) / d;
            if lo > hi {
                std::mem::swap(&mut lo, &mut hi);
            }
            t0 = t0.max(lo);
            t1 = t1.min(hi);
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ZoneKind {
    Obstacle,
    CostMultiplier(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub shape: Aabb,
    pub kind: ZoneKind,
}

impl Zone {
    pub fn obstacle(min: Point3, max: Point3) -> Result<Self> {
        Ok(Zone {
            shape: Aabb::new(min, max)?,
            kind: ZoneKind::Obstacle,
        })
    }

    pub fn cost_multiplier(min: Point3, max: Point3, multiplier: f64) -> Result<Self> {
        let zone = Zone {
            shape: Aabb::new(min, max)?,
            kind: ZoneKind::CostMultiplier(multiplier),
        };
        zone.validate()?;
        Ok(zone)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self
            .shape
            .min
            .iter()
            .chain(self.shape.max.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidZone("box corners must be finite".into()));
        }
        Aabb::new(self.shape.min, self.shape.max)?;
        if let ZoneKind::CostMultiplier(m) = self.kind {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidZone(format!(
                    "multiplier must be positive, got {m}"
                )));
            }
        }
        Ok(())
    }
}

/// A cable end point snapped onto the graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terminal {
    pub world_point: Point3,
    pub node: NodeId,
    /// Outward connector direction, unit length.
    pub direction: Option<Point3>,
}

/// Immutable grid graph with node and edge costs.
#[derive(Debug, Clone)]
pub struct RoutingGraph {
    spec: GridSpec,
    lattice_to_node: Vec<u32>,
    node_lattice: Vec<u32>,
    positions: Vec<Point3>,
    node_costs: Vec<f64>,
    adj_offsets: Vec<u32>,
    adjacency: Vec<(NodeId, EdgeId)>,
    edges: Vec<(NodeId, NodeId)>,
    edge_lengths: Vec<f64>,
    edge_costs: Vec<f64>,
}

/// The 13 lattice offsets whose linearized delta is positive.
fn forward_offsets() -> Vec<[i64; 3]> {
    let mut out = Vec::with_capacity(13);
    for dz in -1i64..=1 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let positive = (dz, dy, dx) > (0, 0, 0);
                if positive {
                    out.push([dx, dy, dz]);
                }
            }
        }
    }
    out
}

/// Builds the routing graph, removing obstacles and applying cost zones.
pub fn build_graph(spec: &GridSpec, zones: &[Zone]) -> Result<RoutingGraph> {
    spec.validate()?;
    for z in zones {
        z.validate()?;
    }
    let obstacles: Vec<&Aabb> = zones
        .iter()
        .filter(|z| matches!(z.kind, ZoneKind::Obstacle))
        .map(|z| &z.shape)
        .collect();

    let n_lattice = spec.lattice_len();
    let mut lattice_to_node = vec![REMOVED; n_lattice];
    let mut node_lattice = Vec::new();
    let mut positions = Vec::new();
    let mut node_costs = Vec::new();
    for linear in 0..n_lattice {
        let p = spec.position(spec.lattice_coords(linear));
        if obstacles.iter().any(|b| b.contains(p)) {
            continue;
        }
        let mut cost = 1.0f64;
        for z in zones {
            if let ZoneKind::CostMultiplier(m) = z.kind {
                if z.shape.contains(p) {
                    cost *= m;
                }
            }
        }
        lattice_to_node[linear] = node_lattice.len() as u32;
        node_lattice.push(linear as u32);
        positions.push(p);
        node_costs.push(cost.max(MIN_NODE_COST));
    }
    if node_lattice.is_empty() {
        return Err(Error::EnvironmentBlocked);
    }

    let offsets = forward_offsets();
    let dims = spec.dims.map(|d| d as i64);
    let mut edges = Vec::new();
    let mut neighbours: Vec<u32> = Vec::with_capacity(13);
    for (u, &linear) in node_lattice.iter().enumerate() {
        let c = spec.lattice_coords(linear as usize);
        neighbours.clear();
        for off in &offsets {
            let q = [c[0] as i64 + off[0], c[1] as i64 + off[1], c[2] as i64 + off[2]];
            if (0..3).any(|a| q[a] < 0 || q[a] >= dims[a]) {
                continue;
            }
            let ql = spec.linear_index([q[0] as usize, q[1] as usize, q[2] as usize]);
            let v = lattice_to_node[ql];
            if v == REMOVED {
                continue;
            }
            let (pu, pv) = (positions[u], positions[v as usize]);
            if obstacles.iter().any(|b| b.intersects_segment(pu, pv)) {
                continue;
            }
            neighbours.push(v);
        }
        neighbours.sort_unstable();
        for &v in &neighbours {
            edges.push((NodeId(u as u32), NodeId(v)));
        }
    }

    let mut graph = RoutingGraph {
        spec: spec.clone(),
        lattice_to_node,
        node_lattice,
        positions,
        node_costs,
        adj_offsets: Vec::new(),
        adjacency: Vec::new(),
        edge_lengths: Vec::with_capacity(edges.len()),
        edge_costs: Vec::with_capacity(edges.len()),
        edges,
    };
    for i in 0..graph.edges.len() {
        let (u, v) = graph.edges[i];
        graph.edge_lengths.push(distance(graph.position(u), graph.position(v)));
        graph.edge_costs.push(edge_cost_formula(
            graph.position(u),
            graph.position(v),
            graph.node_cost(u),
            graph.node_cost(v),
        ));
    }
    graph.rebuild_adjacency();
    Ok(graph)
}

#[inline]
pub fn distance(a: Point3, b: Point3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

#[inline]
fn edge_cost_formula(pu: Point3, pv: Point3, cu: f64, cv: f64) -> f64 {
    distance(pu, pv) * ((cu + cv) / 2.0)
}

impl RoutingGraph {
    fn rebuild_adjacency(&mut self) {
        let n = self.node_count();
        let mut degree = vec![0u32; n + 1];
        for &(u, v) in &self.edges {
            degree[u.index()] += 1;
            degree[v.index()] += 1;
        }
        let mut offsets = vec![0u32; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(NodeId(0), EdgeId(0)); self.edges.len() * 2];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            adjacency[fill[u.index()] as usize] = (v, EdgeId(e as u32));
            fill[u.index()] += 1;
            adjacency[fill[v.index()] as usize] = (u, EdgeId(e as u32));
            fill[v.index()] += 1;
        }
        for i in 0..n {
            adjacency[offsets[i] as usize..offsets[i + 1] as usize].sort_unstable();
        }
        self.adj_offsets = offsets;
        self.adjacency = adjacency;
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn node_count(&self) -> usize {
        self.node_lattice.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count() as u32).map(NodeId)
    }

    #[inline]
    pub fn position(&self, n: NodeId) -> Point3 {
        self.positions[n.index()]
    }

    #[inline]
    pub fn node_cost(&self, n: NodeId) -> f64 {
        self.node_costs[n.index()]
    }

    pub fn lattice_coords(&self, n: NodeId) -> [usize; 3] {
        self.spec.lattice_coords(self.node_lattice[n.index()] as usize)
    }

    pub fn linear_index(&self, n: NodeId) -> usize {
        self.node_lattice[n.index()] as usize
    }

    /// Node at the given lattice coordinates, if it survived obstacle removal.
    pub fn node_at(&self, c: [usize; 3]) -> Option<NodeId> {
        if (0..3).any(|a| c[a] >= self.spec.dims[a]) {
            return None;
        }
        match self.lattice_to_node[self.spec.linear_index(c)] {
            REMOVED => None,
            v => Some(NodeId(v)),
        }
    }

    #[inline]
    pub fn neighbors(&self, n: NodeId) -> &[(NodeId, EdgeId)] {
        let i = n.index();
        &self.adjacency[self.adj_offsets[i] as usize..self.adj_offsets[i + 1] as usize]
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.neighbors(n).len()
    }

    pub fn edge_between(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        let adj = self.neighbors(u);
        adj.binary_search_by(|&(w, _)| w.cmp(&v))
            .ok()
            .map(|i| adj[i].1)
    }

    #[inline]
    pub fn endpoints(&self, e: EdgeId) -> (NodeId, NodeId) {
        self.edges[e.index()]
    }

    #[inline]
    pub fn edge_cost(&self, e: EdgeId) -> f64 {
        self.edge_costs[e.index()]
    }

    pub fn edge_costs(&self) -> &[f64] {
        &self.edge_costs
    }

    /// Euclidean length of an edge, meters.
    #[inline]
    pub fn edge_length(&self, e: EdgeId) -> f64 {
        self.edge_lengths[e.index()]
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, NodeId, NodeId)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| (EdgeId(i as u32), u, v))
    }

    /// Nearest surviving node by Euclidean distance; ties go to the smallest index.
    pub fn snap(&self, p: Point3) -> NodeId {
        if let Some(n) = self.node_at(self.spec.nearest_lattice(p)) {
            return n;
        }
        let mut best = NodeId(0);
        let mut best_d = f64::INFINITY;
        for (i, &q) in self.positions.iter().enumerate() {
            let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
            let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            if d2 < best_d {
                best_d = d2;
                best = NodeId(i as u32);
            }
        }
        best
    }
}

/// `‖p_u − p_v‖ · (cost_u + cost_v) / 2` for the edge's endpoints.
pub fn edge_cost(graph: &RoutingGraph, edge: EdgeId) -> f64 {
    let (u, v) = graph.endpoints(edge);
    edge_cost_formula(
        graph.position(u),
        graph.position(v),
        graph.node_cost(u),
        graph.node_cost(v),
    )
}

pub fn snap_terminal(graph: &RoutingGraph, point: Point3) -> NodeId {
    graph.snap(point)
}

/// Snaps a world point and validates an optional direction.
pub fn make_terminal(
    graph: &RoutingGraph,
    point: Point3,
    direction: Option<Point3>,
) -> Result<Terminal> {
    if let Some(d) = direction {
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Precondition("terminal direction must be non-zero".into()));
        }
    }
    Ok(Terminal {
        world_point: point,
        node: graph.snap(point),
        direction: direction.map(|d| {
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            [d[0] / n, d[1] / n, d[2] / n]
        }),
    })
}

/// Scales the cost of every edge touching a node behind the terminal.
///
/// A node `v` is behind when `dot(unit(p_v − p_t), direction) < −cos(half_angle)`.
/// The terminal's own node never counts as behind.
pub fn apply_terminal_direction_penalty(
    graph: &RoutingGraph,
    terminal: &Terminal,
    cone_half_angle_deg: f64,
    penalty: f64,
) -> Result<RoutingGraph> {
    let dir = terminal
        .direction
        .ok_or_else(|| Error::Precondition("terminal has no direction".into()))?;
    let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "terminal direction must be unit length, norm = {norm}"
        )));
    }
    if !(penalty >= 1.0 && penalty.is_finite()) {
        return Err(Error::Precondition(format!(
            "penalty must be >= 1, got {penalty}"
        )));
    }
    if terminal.node.index() >= graph.node_count() {
        return Err(Error::Precondition("terminal node not in graph".into()));
    }
    let mut out = graph.clone();
    if penalty == 1.0 {
        return Ok(out);
    }
    let threshold = -cone_half_angle_deg.to_radians().cos();
    let pt = graph.position(terminal.node);
    let behind = |v: NodeId| -> bool {
        if v == terminal.node {
            return false;
        }
        let p = graph.position(v);
        let d = [p[0] - pt[0], p[1] - pt[1], p[2] - pt[2]];
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if n == 0.0 {
            return false;
        }
        (d[0] * dir[0] + d[1] * dir[1] + d[2] * dir[2]) / n < threshold
    };
    for (e, &(u, v)) in graph.edges.iter().enumerate() {
        if behind(u) || behind(v) {
            out.edge_costs[e] *= penalty;
        }
    }
    Ok(out)
}
