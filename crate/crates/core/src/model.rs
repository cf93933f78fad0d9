//! Problem instances, routings and objective evaluation.
//!
//! A routing fixes one simple path per cable. The edge selection is derived from
//! it: an edge is selected when at least one cable traverses it. The weighted
//! objective is `w_L · f_L + w_B · f_B` where `f_L` sums every cable's path cost
//! and `f_B` sums the cost of the selected edges once.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{EdgeId, NodeId, RoutingGraph};
use crate::search;

pub type Path = Vec<NodeId>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cable {
    pub start: NodeId,
    pub end: NodeId,
}

impl Cable {
    pub fn new(start: NodeId, end: NodeId) -> Self {
        Cable { start, end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub w_l: f64,
    pub w_b: f64,
}

impl Weights {
    pub fn new(w_l: f64, w_b: f64) -> Result<Self> {
        let ok = w_l.is_finite()
            && w_b.is_finite()
            && w_l >= 0.0
            && w_b >= 0.0
            && (w_l + w_b - 1.0).abs() <= 1e-12;
        if ok {
            Ok(Weights { w_l, w_b })
        } else {
            Err(Error::InvalidWeights { w_l, w_b })
        }
    }

    /// Weights with the given bundle weight and `w_L = 1 − w_B`.
    pub fn from_bundle(w_b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w_b) {
            return Err(Error::InvalidWeights { w_l: 1.0 - w_b, w_b });
        }
        Self::new(1.0 - w_b, w_b)
    }
}

/// One routing problem: a graph, the cables to route and the objective weights.
#[derive(Debug, Clone)]
pub struct Instance {
    graph: Arc<RoutingGraph>,
    cables: Vec<Cable>,
    weights: Weights,
    end_fields: Arc<OnceLock<Vec<Vec<f64>>>>,
}

impl Instance {
    pub fn new(graph: Arc<RoutingGraph>, cables: Vec<Cable>, weights: Weights) -> Result<Self> {
        if cables.is_empty() {
            return Err(Error::InvalidInstance("at least one cable is required".into()));
        }
        let n = graph.node_count();
        for (k, c) in cables.iter().enumerate() {
            if c.start.index() >= n || c.end.index() >= n {
                return Err(Error::InvalidInstance(format!(
                    "cable {k} has a terminal outside the graph"
                )));
            }
            if c.start == c.end {
                log::warn!("cable {k} starts and ends at node {}", c.start.0);
            }
        }
        Weights::new(weights.w_l, weights.w_b)?;
        Ok(Instance {
            graph,
            cables,
            weights,
            end_fields: Arc::new(OnceLock::new()),
        })
    }

    /// Same graph and cables under different weights. Cached distance fields are shared.
    pub fn with_weights(&self, weights: Weights) -> Self {
        Instance {
            graph: Arc::clone(&self.graph),
            cables: self.cables.clone(),
            weights,
            end_fields: Arc::clone(&self.end_fields),
        }
    }

    pub fn graph(&self) -> &RoutingGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<RoutingGraph> {
        &self.graph
    }

    pub fn cables(&self) -> &[Cable] {
        &self.cables
    }

    pub fn cable_count(&self) -> usize {
        self.cables.len()
    }

    pub fn weights(&self) -> Weights {
        self.weights
    }

    /// Base-cost distances from every node to the end terminal of `cable`.
    ///
    /// Scaled by `w_L`, this is an admissible and consistent A* heuristic for any
    /// edge cost that is at least `w_L · c_e`.
    pub fn end_field(&self, cable: usize) -> &[f64] {
        let fields = self.end_fields.get_or_init(|| {
            use rayon::prelude::*;
            self.cables
                .par_iter()
                .map(|c| search::dijkstra(&self.graph, c.end, &search::BaseCosts).dist)
                .collect()
        });
        &fields[cable]
    }

    /// Base cost of the shortest path of every cable.
    pub fn shortest_costs(&self) -> Vec<f64> {
        (0..self.cables.len())
            .map(|k| self.end_field(k)[self.cables[k].start.index()])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Routing {
    pub paths: Vec<Path>,
}

impl Routing {
    pub fn new(paths: Vec<Path>) -> Self {
        Routing { paths }
    }
}

/// Edge ids along a node path; fails if two consecutive nodes are not adjacent.
pub fn path_edges(graph: &RoutingGraph, path: &[NodeId]) -> Result<Vec<EdgeId>> {
    path.windows(2)
        .map(|w| {
            graph.edge_between(w[0], w[1]).ok_or_else(|| {
                Error::RoutingInfeasible(format!("nodes {} and {} are not adjacent", w[0].0, w[1].0))
            })
        })
        .collect()
}

pub fn path_cost(graph: &RoutingGraph, path: &[NodeId]) -> Result<f64> {
    Ok(path_edges(graph, path)?.iter().map(|&e| graph.edge_cost(e)).sum())
}

/// Checks every routing invariant and returns the edges of each path.
pub fn validate_routing(instance: &Instance, routing: &Routing) -> Result<Vec<Vec<EdgeId>>> {
    if routing.paths.len() != instance.cable_count() {
        return Err(Error::RoutingInfeasible(format!(
            "expected {} paths, got {}",
            instance.cable_count(),
            routing.paths.len()
        )));
    }
    let n = instance.graph().node_count();
    let mut seen = HashSet::new();
    routing
        .paths
        .iter()
        .zip(instance.cables())
        .enumerate()
        .map(|(k, (path, cable))| {
            if path.first() != Some(&cable.start) || path.last() != Some(&cable.end) {
                return Err(Error::RoutingInfeasible(format!(
                    "path {k} does not connect its terminals"
                )));
            }
            seen.clear();
            for &v in path {
                if v.index() >= n {
                    return Err(Error::RoutingInfeasible(format!("path {k} leaves the graph")));
                }
                if !seen.insert(v) {
                    return Err(Error::RoutingInfeasible(format!(
                        "path {k} revisits node {}",
                        v.0
                    )));
                }
            }
            path_edges(instance.graph(), path)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    pub f: f64,
    pub f_l: f64,
    pub f_b: f64,
}

/// Objectives from per-cable edge lists (assumed valid).
pub fn objectives_from_edges(
    graph: &RoutingGraph,
    weights: Weights,
    edges: &[Vec<EdgeId>],
) -> Objectives {
    let f_l = sorted_sum(edges.iter().flatten().map(|&e| graph.edge_cost(e)).collect());
    let f_b = sorted_sum(union_edges(edges).iter().map(|&e| graph.edge_cost(e)).collect());
    Objectives {
        f: weights.w_l * f_l + weights.w_b * f_b,
        f_l,
        f_b,
    }
}

/// Sum in ascending order, so equal multisets of terms give equal totals.
fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

pub fn union_edges(edges: &[Vec<EdgeId>]) -> Vec<EdgeId> {
    let mut all: Vec<EdgeId> = edges.iter().flatten().copied().collect();
    all.sort_unstable();
    all.dedup();
    all
}

pub fn evaluate(instance: &Instance, routing: &Routing) -> Result<Objectives> {
    let edges = validate_routing(instance, routing)?;
    Ok(objectives_from_edges(instance.graph(), instance.weights(), &edges))
}

pub fn eval_fl(instance: &Instance, routing: &Routing) -> Result<f64> {
    evaluate(instance, routing).map(|o| o.f_l)
}

pub fn eval_fb(instance: &Instance, routing: &Routing) -> Result<f64> {
    evaluate(instance, routing).map(|o| o.f_b)
}

pub fn eval_f(instance: &Instance, routing: &Routing) -> Result<f64> {
    evaluate(instance, routing).map(|o| o.f)
}

/// Sorted selected-edge list; two routings with equal keys have the same topology.
pub fn selection_key(instance: &Instance, routing: &Routing) -> Result<Vec<EdgeId>> {
    Ok(union_edges(&validate_routing(instance, routing)?))
}

/// Relative duality gap `(f* − h*) / h*`.
pub fn duality_gap(f_star: f64, h_star: f64) -> Result<f64> {
    if !(h_star > 0.0) {
        return Err(Error::BoundNotPositive(h_star));
    }
    Ok((f_star - h_star) / h_star)
}

/// Shortcuts every revisit so the path becomes simple. Never increases cost.
pub fn remove_loops(path: &[NodeId]) -> Path {
    let mut out: Path = Vec::with_capacity(path.len());
    let mut pos: HashMap<NodeId, usize> = HashMap::with_capacity(path.len());
    for &v in path {
        if let Some(&i) = pos.get(&v) {
            for dropped in out.drain(i + 1..) {
                pos.remove(&dropped);
            }
        } else {
            pos.insert(v, out.len());
            out.push(v);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleSegment {
    /// Node path; `nodes[0] <= nodes[last]`.
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    pub multiplicity: u32,
}

impl BundleSegment {
    pub fn first(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn last(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    /// The endpoint opposite to `end`.
    pub fn other_end(&self, end: NodeId) -> NodeId {
        if self.first() == end {
            self.last()
        } else {
            self.first()
        }
    }

    pub fn cost(&self, graph: &RoutingGraph) -> f64 {
        self.edges.iter().map(|&e| graph.edge_cost(e)).sum()
    }

    /// Physical length in meters.
    pub fn length(&self, graph: &RoutingGraph) -> f64 {
        self.edges.iter().map(|&e| graph.edge_length(e)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentUse {
    pub segment: usize,
    /// True when the cable enters the segment at `nodes[0]`.
    pub forward: bool,
}

/// Harness topology derived from a routing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub selected_edges: Vec<EdgeId>,
    /// Cable count per entry of `selected_edges`.
    pub edge_multiplicity: Vec<u32>,
    pub branch_points: Vec<NodeId>,
    pub bundle_segments: Vec<BundleSegment>,
    /// Segments traversed by each cable, in travel order.
    pub cable_segments: Vec<Vec<SegmentUse>>,
    pub terminals: BTreeSet<NodeId>,
}

impl Topology {
    pub fn is_branch_point(&self, n: NodeId) -> bool {
        self.branch_points.binary_search(&n).is_ok()
    }

    pub fn is_terminal(&self, n: NodeId) -> bool {
        self.terminals.contains(&n)
    }

    /// Indices of segments with `n` as an endpoint (loops listed once).
    pub fn incident_segments(&self, n: NodeId) -> Vec<usize> {
        self.bundle_segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.first() == n || s.last() == n)
            .map(|(i, _)| i)
            .collect()
    }

    /// Rebuilds cable paths from replacement segment node lists.
    ///
    /// `segments[i]` replaces `bundle_segments[i]` and must keep its orientation
    /// (first node = relocated `nodes[0]`). Loops created by the replacement are
    /// shortcut.
    pub fn assemble(&self, cables: &[Cable], segments: &[Vec<NodeId>]) -> Result<Routing> {
        let mut paths = Vec::with_capacity(cables.len());
        for (k, uses) in self.cable_segments.iter().enumerate() {
            let mut path: Path = vec![cables[k].start];
            for u in uses {
                let seg = &segments[u.segment];
                let oriented: Box<dyn Iterator<Item = &NodeId>> = if u.forward {
                    Box::new(seg.iter())
                } else {
                    Box::new(seg.iter().rev())
                };
                let mut oriented = oriented.peekable();
                match oriented.peek() {
                    Some(&&first) if Some(&first) == path.last() => {
                        oriented.next();
                    }
                    _ => {
                        return Err(Error::RoutingInfeasible(format!(
                            "segment {} does not continue cable {k}",
                            u.segment
                        )))
                    }
                }
                path.extend(oriented);
            }
            if path.last() != Some(&cables[k].end) {
                return Err(Error::RoutingInfeasible(format!(
                    "assembled cable {k} does not reach its end terminal"
                )));
            }
            paths.push(remove_loops(&path));
        }
        Ok(Routing { paths })
    }
}

/// Decomposes the selected-edge subgraph into bundle segments and branch points.
pub fn derive_topology(instance: &Instance, routing: &Routing) -> Result<Topology> {
    let graph = instance.graph();
    let edges = validate_routing(instance, routing)?;

    let mut multiplicity: BTreeMap<EdgeId, u32> = BTreeMap::new();
    for p in &edges {
        for &e in p {
            *multiplicity.entry(e).or_insert(0) += 1;
        }
    }
    let mut adjacency: BTreeMap<NodeId, Vec<(NodeId, EdgeId)>> = BTreeMap::new();
    for &e in multiplicity.keys() {
        let (u, v) = graph.endpoints(e);
        adjacency.entry(u).or_default().push((v, e));
        adjacency.entry(v).or_default().push((u, e));
    }
    for adj in adjacency.values_mut() {
        adj.sort_unstable();
    }
    let terminals: BTreeSet<NodeId> = instance
        .cables()
        .iter()
        .flat_map(|c| [c.start, c.end])
        .collect();

    let mut key: BTreeSet<NodeId> = adjacency
        .iter()
        .filter(|(n, adj)| adj.len() != 2 || terminals.contains(n))
        .map(|(&n, _)| n)
        .collect();
    let branch_points: Vec<NodeId> = adjacency
        .iter()
        .filter(|(n, adj)| adj.len() >= 3 || (adj.len() >= 2 && terminals.contains(n)))
        .map(|(&n, _)| n)
        .collect();

    let mut visited: HashSet<EdgeId> = HashSet::new();
    let mut raw: Vec<(Vec<NodeId>, Vec<EdgeId>)> = Vec::new();
    let walk_from = |start: NodeId,
                         key: &BTreeSet<NodeId>,
                         visited: &mut HashSet<EdgeId>,
                         raw: &mut Vec<(Vec<NodeId>, Vec<EdgeId>)>| {
        for &(first, e0) in &adjacency[&start] {
            if visited.contains(&e0) {
                continue;
            }
            visited.insert(e0);
            let mut nodes = vec![start, first];
            let mut seg_edges = vec![e0];
            let mut prev_edge = e0;
            let mut cur = first;
            while !key.contains(&cur) {
                let next = adjacency[&cur]
                    .iter()
                    .find(|&&(_, e)| e != prev_edge)
                    .copied();
                match next {
                    Some((n, e)) if !visited.contains(&e) => {
                        visited.insert(e);
                        nodes.push(n);
                        seg_edges.push(e);
                        prev_edge = e;
                        cur = n;
                    }
                    _ => break,
                }
            }
            raw.push((nodes, seg_edges));
        }
    };
    for &k in key.clone().iter() {
        walk_from(k, &key, &mut visited, &mut raw);
    }
    // Components without a key node are pure cycles; anchor them at their smallest node.
    while visited.len() < multiplicity.len() {
        let anchor = multiplicity
            .keys()
            .find(|e| !visited.contains(e))
            .map(|&e| graph.endpoints(e).0)
            .unwrap();
        key.insert(anchor);
        walk_from(anchor, &key, &mut visited, &mut raw);
    }

    let mut segments: Vec<BundleSegment> = raw
        .into_iter()
        .map(|(mut nodes, mut seg_edges)| {
            if nodes.last().unwrap() < &nodes[0] {
                nodes.reverse();
                seg_edges.reverse();
            }
            let m = multiplicity[&seg_edges[0]];
            BundleSegment {
                nodes,
                edges: seg_edges,
                multiplicity: m,
            }
        })
        .collect();
    segments.sort_by(|a, b| {
        (a.first(), a.last())
            .cmp(&(b.first(), b.last()))
            .then_with(|| a.nodes.cmp(&b.nodes))
    });

    let mut segment_of: HashMap<EdgeId, usize> = HashMap::new();
    for (i, s) in segments.iter().enumerate() {
        for &e in &s.edges {
            segment_of.insert(e, i);
        }
    }
    let cable_segments = routing
        .paths
        .iter()
        .zip(&edges)
        .map(|(path, path_edges)| {
            let mut uses: Vec<SegmentUse> = Vec::new();
            for (i, e) in path_edges.iter().enumerate() {
                let seg = segment_of[e];
                if uses.last().map(|u| u.segment) != Some(seg) {
                    let s = &segments[seg];
                    let forward = if s.first() == s.last() {
                        s.edges[0] == *e
                    } else {
                        path[i] == s.first()
                    };
                    uses.push(SegmentUse {
                        segment: seg,
                        forward,
                    });
                }
            }
            uses
        })
        .collect();

    let (selected_edges, edge_multiplicity) = multiplicity.into_iter().unzip();
    Ok(Topology {
        selected_edges,
        edge_multiplicity,
        branch_points,
        bundle_segments: segments,
        cable_segments,
        terminals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_graph, GridSpec};

    fn grid(dims: [usize; 3]) -> Arc<RoutingGraph> {
        Arc::new(build_graph(&GridSpec::unit(dims).unwrap(), &[]).unwrap())
    }

    fn at(g: &RoutingGraph, x: usize, y: usize) -> NodeId {
        g.node_at([x, y, 0]).unwrap()
    }

    /// Three cables from a shared start through a 2-edge trunk, then one unit leg each.
    fn y_instance(w_b: f64) -> (Instance, Routing) {
        let g = grid([4, 3, 1]);
        let s = at(&g, 0, 1);
        let (a, b) = (at(&g, 1, 1), at(&g, 2, 1));
        let legs = [at(&g, 3, 1), at(&g, 2, 0), at(&g, 2, 2)];
        let cables = legs.iter().map(|&t| Cable::new(s, t)).collect();
        let inst = Instance::new(g, cables, Weights::from_bundle(w_b).unwrap()).unwrap();
        let routing = Routing::new(legs.iter().map(|&t| vec![s, a, b, t]).collect());
        (inst, routing)
    }

    #[test]
    fn length_and_bundle_objectives() {
        let g = grid([3, 2, 1]);
        let (n0, n1, n2) = (at(&g, 0, 0), at(&g, 1, 0), at(&g, 2, 0));
        let (m0, m1) = (at(&g, 0, 1), at(&g, 1, 1));
        let w = Weights::from_bundle(0.5).unwrap();

        let disjoint = Instance::new(
            Arc::clone(&g),
            vec![Cable::new(n0, n1), Cable::new(m0, m1)],
            w,
        )
        .unwrap();
        let r = Routing::new(vec![vec![n0, n1], vec![m0, m1]]);
        assert_eq!(eval_fl(&disjoint, &r).unwrap(), 2.0);
        assert_eq!(eval_fb(&disjoint, &r).unwrap(), 2.0);

        let shared = Instance::new(
            Arc::clone(&g),
            vec![Cable::new(n1, n2), Cable::new(n1, n2)],
            w,
        )
        .unwrap();
        let r = Routing::new(vec![vec![n1, n2], vec![n1, n2]]);
        assert_eq!(eval_fl(&shared, &r).unwrap(), 2.0);
        assert_eq!(eval_fb(&shared, &r).unwrap(), 1.0);
    }

    #[test]
    fn y_instance_objectives() {
        let (inst, r) = y_instance(0.5);
        assert_eq!(eval_fl(&inst, &r).unwrap(), 9.0);
        assert_eq!(eval_fb(&inst, &r).unwrap(), 5.0);
        assert_eq!(eval_f(&inst, &r).unwrap(), 7.0);

        let pure_length = inst.with_weights(Weights::from_bundle(0.0).unwrap());
        assert_eq!(eval_f(&pure_length, &r).unwrap(), 9.0);
        let steiner = inst.with_weights(Weights::from_bundle(1.0).unwrap());
        assert_eq!(eval_f(&steiner, &r).unwrap(), 5.0);
    }

    #[test]
    fn y_topology_has_one_branch_point() {
        let (inst, r) = y_instance(0.5);
        let topo = derive_topology(&inst, &r).unwrap();
        let g = inst.graph();
        assert_eq!(topo.branch_points, vec![at(g, 2, 1)]);
        assert_eq!(topo.bundle_segments.len(), 4);
        let trunk = topo
            .bundle_segments
            .iter()
            .find(|s| s.multiplicity == 3)
            .unwrap();
        assert_eq!(trunk.nodes, vec![at(g, 0, 1), at(g, 1, 1), at(g, 2, 1)]);
    }

    #[test]
    fn single_and_doubled_cable_topologies() {
        let g = grid([3, 1, 1]);
        let (a, b, c) = (NodeId(0), NodeId(1), NodeId(2));
        let w = Weights::from_bundle(0.3).unwrap();
        let single = Instance::new(Arc::clone(&g), vec![Cable::new(a, c)], w).unwrap();
        let topo = derive_topology(&single, &Routing::new(vec![vec![a, b, c]])).unwrap();
        assert!(topo.branch_points.is_empty());
        assert_eq!(topo.bundle_segments.len(), 1);
        assert_eq!(topo.bundle_segments[0].multiplicity, 1);

        let double =
            Instance::new(Arc::clone(&g), vec![Cable::new(a, c), Cable::new(a, c)], w).unwrap();
        let r = Routing::new(vec![vec![a, b, c], vec![a, b, c]]);
        let topo = derive_topology(&double, &r).unwrap();
        assert!(topo.branch_points.is_empty());
        assert_eq!(topo.bundle_segments.len(), 1);
        assert_eq!(topo.bundle_segments[0].multiplicity, 2);
    }

    #[test]
    fn segments_reproduce_objectives() {
        let (inst, r) = y_instance(0.5);
        let topo = derive_topology(&inst, &r).unwrap();
        let g = inst.graph();
        let fl: f64 = topo
            .bundle_segments
            .iter()
            .map(|s| s.cost(g) * s.multiplicity as f64)
            .sum();
        let fb: f64 = topo.bundle_segments.iter().map(|s| s.cost(g)).sum();
        assert!((fl - eval_fl(&inst, &r).unwrap()).abs() < 1e-9);
        assert!((fb - eval_fb(&inst, &r).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn assemble_round_trips() {
        let (inst, r) = y_instance(0.5);
        let topo = derive_topology(&inst, &r).unwrap();
        let segs: Vec<Vec<NodeId>> = topo.bundle_segments.iter().map(|s| s.nodes.clone()).collect();
        assert_eq!(topo.assemble(inst.cables(), &segs).unwrap(), r);
    }

    #[test]
    fn infeasible_routings_are_rejected() {
        let (inst, mut r) = y_instance(0.5);
        r.paths[0].remove(1);
        assert!(matches!(eval_f(&inst, &r), Err(Error::RoutingInfeasible(_))));
        let (inst, mut r) = y_instance(0.5);
        r.paths.pop();
        assert!(eval_f(&inst, &r).is_err());
    }

    #[test]
    fn start_equals_end_contributes_nothing() {
        let g = grid([2, 1, 1]);
        let inst = Instance::new(
            g,
            vec![Cable::new(NodeId(1), NodeId(1))],
            Weights::from_bundle(0.5).unwrap(),
        )
        .unwrap();
        let r = Routing::new(vec![vec![NodeId(1)]]);
        assert_eq!(eval_f(&inst, &r).unwrap(), 0.0);
        let topo = derive_topology(&inst, &r).unwrap();
        assert!(topo.bundle_segments.is_empty());
    }

    #[test]
    fn gap_formula() {
        assert_eq!(duality_gap(100.0, 100.0).unwrap(), 0.0);
        assert!((duality_gap(105.0, 100.0).unwrap() - 0.05).abs() < 1e-15);
        assert!(duality_gap(95.0, 100.0).unwrap() < 0.0);
        assert_eq!(duality_gap(1.0, 0.0), Err(Error::BoundNotPositive(0.0)));
    }

    #[test]
    fn weights_validation() {
        assert!(Weights::new(0.5, 0.5).is_ok());
        assert!(Weights::new(0.6, 0.5).is_err());
        assert!(Weights::from_bundle(1.5).is_err());
        assert!(Weights::from_bundle(-0.1).is_err());
    }

    #[test]
    fn loop_removal() {
        let p: Path = [0, 1, 2, 3, 1, 4].iter().map(|&i| NodeId(i)).collect();
        let q: Path = [0, 1, 4].iter().map(|&i| NodeId(i)).collect();
        assert_eq!(remove_loops(&p), q);
    }
}
