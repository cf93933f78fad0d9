//! Shortest-path kernels on the routing graph.
//!
//! Every search is deterministic: heap entries are ordered by cost and then by
//! node id, and equal-cost predecessors resolve to the smaller node id.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::grid::{EdgeId, NodeId, RoutingGraph};
use crate::model::Path;

const NO_PRED: u32 = u32::MAX;

/// Effective edge cost on top of the graph's base cost `c_e`.
pub trait EdgeCosts {
    fn cost(&self, edge: EdgeId, base: f64) -> f64;
}

impl<F> EdgeCosts for F
where
    F: Fn(EdgeId, f64) -> f64,
{
    #[inline]
    fn cost(&self, edge: EdgeId, base: f64) -> f64 {
        self(edge, base)
    }
}

/// The graph's own edge costs.
#[derive(Debug, Clone, Copy, Default)]
pub struct BaseCosts;

impl EdgeCosts for BaseCosts {
    #[inline]
    fn cost(&self, _edge: EdgeId, base: f64) -> f64 {
        base
    }
}

/// Uniform scaling `s · c_e`.
#[derive(Debug, Clone, Copy)]
pub struct Scaled(pub f64);

impl EdgeCosts for Scaled {
    #[inline]
    fn cost(&self, _edge: EdgeId, base: f64) -> f64 {
        self.0 * base
    }
}

/// General overlay: `scale · multiplier_e · c_e + additive_e`.
#[derive(Debug, Clone)]
pub struct CostOverlay {
    pub scale: f64,
    pub multipliers: HashMap<EdgeId, f64>,
    pub additive: HashMap<EdgeId, f64>,
}

impl Default for CostOverlay {
    fn default() -> Self {
        CostOverlay {
            scale: 1.0,
            multipliers: HashMap::new(),
            additive: HashMap::new(),
        }
    }
}

impl CostOverlay {
    pub fn scaled(scale: f64) -> Self {
        CostOverlay {
            scale,
            ..Default::default()
        }
    }

    pub fn with_multiplier(mut self, edge: EdgeId, m: f64) -> Self {
        self.multipliers.insert(edge, m);
        self
    }

    pub fn with_additive(mut self, edge: EdgeId, a: f64) -> Self {
        self.additive.insert(edge, a);
        self
    }
}

impl EdgeCosts for CostOverlay {
    fn cost(&self, edge: EdgeId, base: f64) -> f64 {
        let m = self.multipliers.get(&edge).copied().unwrap_or(1.0);
        let a = self.additive.get(&edge).copied().unwrap_or(0.0);
        self.scale * m * base + a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    cost: f64,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (cost, node).
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single- or multi-source shortest-path tree.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub source: NodeId,
    pub dist: Vec<f64>,
    pred: Vec<u32>,
    /// Nodes in the order they were settled; predecessors always come first.
    pub settled: Vec<NodeId>,
}

impl DistanceField {
    pub fn pred(&self, v: NodeId) -> Option<NodeId> {
        match self.pred[v.index()] {
            NO_PRED => None,
            p => Some(NodeId(p)),
        }
    }

    pub fn reached(&self, v: NodeId) -> bool {
        self.dist[v.index()].is_finite()
    }

    /// Path from the tree root that reaches `v` to `v` itself.
    pub fn path_to(&self, v: NodeId) -> Option<Path> {
        if !self.reached(v) {
            return None;
        }
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.pred(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }

    /// The root whose subtree contains `v` (the source for single-source fields).
    pub fn root_of(&self, v: NodeId) -> NodeId {
        let mut cur = v;
        while let Some(p) = self.pred(cur) {
            cur = p;
        }
        cur
    }

    /// Sum of `weight(edge)` along each node's tree path, indexed by node.
    pub fn accumulate_along_tree(
        &self,
        graph: &RoutingGraph,
        weight: impl Fn(EdgeId) -> f64,
    ) -> Vec<f64> {
        let mut acc = vec![f64::INFINITY; self.dist.len()];
        for &v in &self.settled {
            acc[v.index()] = match self.pred(v) {
                None => 0.0,
                Some(p) => {
                    let e = graph.edge_between(p, v).expect("tree edge");
                    acc[p.index()] + weight(e)
                }
            };
        }
        acc
    }
}

/// Options controlling how far a Dijkstra search runs.
#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    /// Do not settle nodes farther than this.
    pub max_dist: f64,
    /// Stop once this node is settled.
    pub target: Option<NodeId>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_dist: f64::INFINITY,
            target: None,
        }
    }
}

/// Full single-source Dijkstra; unreachable nodes keep `dist = +∞`.
pub fn dijkstra<C: EdgeCosts>(graph: &RoutingGraph, source: NodeId, costs: &C) -> DistanceField {
    dijkstra_multi(graph, &[(source, 0.0)], costs, SearchLimits::default())
}

/// Dijkstra from several sources with initial offsets.
pub fn dijkstra_multi<C: EdgeCosts>(
    graph: &RoutingGraph,
    sources: &[(NodeId, f64)],
    costs: &C,
    limits: SearchLimits,
) -> DistanceField {
    let mut run = DijkstraRun::new(graph, sources, costs);
    while let Some(top) = run.peek() {
        if top > limits.max_dist {
            break;
        }
        let u = run.step().expect("nonempty frontier");
        if limits.target == Some(u) {
            break;
        }
    }
    run.finish()
}

/// Dijkstra that settles one node per call, so several searches can be
/// advanced in lockstep.
pub struct DijkstraRun<'a, C: EdgeCosts> {
    graph: &'a RoutingGraph,
    costs: &'a C,
    source: NodeId,
    dist: Vec<f64>,
    pred: Vec<u32>,
    done: Vec<bool>,
    settled: Vec<NodeId>,
    heap: BinaryHeap<HeapEntry>,
}

impl<'a, C: EdgeCosts> DijkstraRun<'a, C> {
    pub fn new(graph: &'a RoutingGraph, sources: &[(NodeId, f64)], costs: &'a C) -> Self {
        let n = graph.node_count();
        let mut run = DijkstraRun {
            graph,
            costs,
            source: sources.first().map(|s| s.0).unwrap_or(NodeId(0)),
            dist: vec![f64::INFINITY; n],
            pred: vec![NO_PRED; n],
            done: vec![false; n],
            settled: Vec::new(),
            heap: BinaryHeap::new(),
        };
        for &(s, d0) in sources {
            if d0 < run.dist[s.index()] {
                run.dist[s.index()] = d0;
                run.heap.push(HeapEntry { cost: d0, node: s.0 });
            }
        }
        run
    }

    /// Smallest tentative distance on the frontier; every unsettled node is at
    /// least this far away.
    pub fn peek(&mut self) -> Option<f64> {
        while let Some(&HeapEntry { cost, node }) = self.heap.peek() {
            let u = node as usize;
            if self.done[u] || cost > self.dist[u] {
                self.heap.pop();
            } else {
                return Some(cost);
            }
        }
        None
    }

    pub fn step(&mut self) -> Option<NodeId> {
        self.peek()?;
        let HeapEntry { cost, node } = self.heap.pop().expect("peeked");
        self.done[node as usize] = true;
        self.settled.push(NodeId(node));
        for &(v, e) in self.graph.neighbors(NodeId(node)) {
            let vi = v.index();
            if self.done[vi] {
                continue;
            }
            let nd = cost + self.costs.cost(e, self.graph.edge_cost(e));
            if nd < self.dist[vi] {
                self.dist[vi] = nd;
                self.pred[vi] = node;
                self.heap.push(HeapEntry { cost: nd, node: v.0 });
            } else if nd == self.dist[vi] && node < self.pred[vi] {
                self.pred[vi] = node;
            }
        }
        Some(NodeId(node))
    }

    pub fn is_settled(&self, v: NodeId) -> bool {
        self.done[v.index()]
    }

    /// Exact distance of a settled node.
    pub fn settled_dist(&self, v: NodeId) -> Option<f64> {
        self.done[v.index()].then(|| self.dist[v.index()])
    }

    /// Converts to a field holding only settled labels.
    pub fn finish(mut self) -> DistanceField {
        // Tentative labels beyond the settled frontier are not exact; drop them.
        for i in 0..self.dist.len() {
            if !self.done[i] {
                self.dist[i] = f64::INFINITY;
                self.pred[i] = NO_PRED;
            }
        }
        DistanceField {
            source: self.source,
            dist: self.dist,
            pred: self.pred,
            settled: self.settled,
        }
    }
}

/// Shortest path between two nodes by Dijkstra with early exit.
pub fn shortest_path<C: EdgeCosts>(
    graph: &RoutingGraph,
    start: NodeId,
    goal: NodeId,
    costs: &C,
) -> Result<(Path, f64)> {
    let field = dijkstra_multi(
        graph,
        &[(start, 0.0)],
        costs,
        SearchLimits {
            max_dist: f64::INFINITY,
            target: Some(goal),
        },
    );
    match field.path_to(goal) {
        Some(p) => Ok((p, field.dist[goal.index()])),
        None => Err(Error::TerminalsDisconnected {
            from: start,
            to: goal,
        }),
    }
}

/// A* heuristic: `scale · field[v]`, where `field` holds distances to the goal.
#[derive(Debug, Clone, Copy)]
pub struct Heuristic<'a> {
    pub dist_to_goal: &'a [f64],
    pub scale: f64,
}

impl<'a> Heuristic<'a> {
    pub fn exact(field: &'a DistanceField) -> Self {
        Heuristic {
            dist_to_goal: &field.dist,
            scale: 1.0,
        }
    }

    pub fn scaled(dist_to_goal: &'a [f64], scale: f64) -> Self {
        Heuristic {
            dist_to_goal,
            scale,
        }
    }

    #[inline]
    fn at(&self, v: NodeId) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.scale * self.dist_to_goal[v.index()]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstarPath {
    pub nodes: Path,
    pub cost: f64,
    /// Number of node expansions performed.
    pub expanded: usize,
}

/// A* search. The heuristic must be consistent for `costs`.
pub fn astar<C: EdgeCosts>(
    graph: &RoutingGraph,
    start: NodeId,
    goal: NodeId,
    heuristic: Heuristic<'_>,
    costs: &C,
) -> Result<AstarPath> {
    let n = graph.node_count();
    let disconnected = Error::TerminalsDisconnected {
        from: start,
        to: goal,
    };
    if !heuristic.at(start).is_finite() {
        return Err(disconnected);
    }
    let mut g = vec![f64::INFINITY; n];
    let mut pred = vec![NO_PRED; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    g[start.index()] = 0.0;
    heap.push(HeapEntry {
        cost: heuristic.at(start),
        node: start.0,
    });
    let mut expanded = 0usize;
    while let Some(HeapEntry { node, .. }) = heap.pop() {
        let u = node as usize;
        if closed[u] {
            continue;
        }
        closed[u] = true;
        expanded += 1;
        if node == goal.0 {
            let mut nodes = vec![goal];
            let mut cur = goal.0;
            while pred[cur as usize] != NO_PRED {
                cur = pred[cur as usize];
                nodes.push(NodeId(cur));
            }
            nodes.reverse();
            return Ok(AstarPath {
                nodes,
                cost: g[u],
                expanded,
            });
        }
        let gu = g[u];
        let hu = heuristic.at(NodeId(node));
        for &(v, e) in graph.neighbors(NodeId(node)) {
            let vi = v.index();
            let c = costs.cost(e, graph.edge_cost(e));
            let hv = heuristic.at(v);
            debug_assert!(
                !hv.is_finite() || hu <= c + hv + 1e-9 * (1.0 + hu.abs()),
                "inconsistent A* heuristic on edge {e:?}"
            );
            let nd = gu + c;
            if nd < g[vi] {
                g[vi] = nd;
                pred[vi] = node;
                // Consistent heuristics never reopen; tolerate rounding by reopening.
                closed[vi] = false;
                if hv.is_finite() {
                    heap.push(HeapEntry {
                        cost: nd + hv,
                        node: v.0,
                    });
                }
            }
        }
    }
    Err(disconnected)
}

/// Shortest path from `start` to `goal` using A* with the given heuristic.
pub fn route<C: EdgeCosts>(
    graph: &RoutingGraph,
    start: NodeId,
    goal: NodeId,
    heuristic: Heuristic<'_>,
    costs: &C,
) -> Result<Path> {
    astar(graph, start, goal, heuristic, costs).map(|p| p.nodes)
}

/// Parameters of the penalty method behind [`alpha_shortest_paths`].
#[derive(Debug, Clone, Copy)]
pub struct AlphaPathOptions {
    /// Factor applied to the node and edge costs of every examined path.
    pub penalty: f64,
    /// Maximum shared interior-node fraction between two accepted paths.
    pub max_overlap: f64,
    /// Attempts per requested path.
    pub attempts_per_path: usize,
}

impl Default for AlphaPathOptions {
    fn default() -> Self {
        AlphaPathOptions {
            penalty: 2.0,
            max_overlap: 0.8,
            attempts_per_path: 5,
        }
    }
}

/// Interior-node overlap between two paths, relative to the shorter interior.
pub fn interior_overlap(a: &[NodeId], b: &[NodeId]) -> f64 {
    let interior = |p: &[NodeId]| -> HashSet<NodeId> {
        if p.len() <= 2 {
            HashSet::new()
        } else {
            p[1..p.len() - 1].iter().copied().collect()
        }
    };
    let (ia, ib) = (interior(a), interior(b));
    let denom = ia.len().min(ib.len());
    if denom == 0 {
        return 0.0;
    }
    ia.intersection(&ib).count() as f64 / denom as f64
}

/// Up to `n_phi` spatially distinct paths, each at most `alpha` times the
/// shortest-path cost under `costs`. The first path is the shortest one.
///
/// After every examined path the costs of its interior nodes and of its edges
/// are multiplied by the penalty factor and the search is repeated. A candidate
/// is kept when its unpenalized cost is within the `alpha` budget and it does
/// not overlap any kept path by more than the allowed fraction.
///
/// `heuristic` must be admissible for `costs`; penalties only increase costs.
pub fn alpha_shortest_paths<C: EdgeCosts>(
    graph: &RoutingGraph,
    start: NodeId,
    goal: NodeId,
    alpha: f64,
    n_phi: usize,
    costs: &C,
    heuristic: Heuristic<'_>,
    options: AlphaPathOptions,
) -> Result<Vec<Path>> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must exceed 1, got {alpha}")));
    }
    if n_phi == 0 {
        return Err(Error::InvalidParameter("n_phi must be at least 1".into()));
    }
    let first = astar(graph, start, goal, heuristic, costs)?;
    let budget = alpha * first.cost;
    let mut accepted = vec![first.nodes];
    let mut node_pen: HashMap<NodeId, f64> = HashMap::new();
    let mut edge_pen: HashMap<EdgeId, f64> = HashMap::new();

    let penalize = |path: &[NodeId],
                        node_pen: &mut HashMap<NodeId, f64>,
                        edge_pen: &mut HashMap<EdgeId, f64>| {
        if path.len() > 2 {
            for &v in &path[1..path.len() - 1] {
                *node_pen.entry(v).or_insert(1.0) *= options.penalty;
            }
        }
        for w in path.windows(2) {
            if let Some(e) = graph.edge_between(w[0], w[1]) {
                *edge_pen.entry(e).or_insert(1.0) *= options.penalty;
            }
        }
    };
    penalize(&accepted[0], &mut node_pen, &mut edge_pen);

    let max_attempts = options.attempts_per_path * n_phi;
    let mut attempts = 0;
    while accepted.len() < n_phi && attempts < max_attempts {
        attempts += 1;
        let penalized = |e: EdgeId, base: f64| -> f64 {
            let (u, v) = graph.endpoints(e);
            let (cu, cv) = (graph.node_cost(u), graph.node_cost(v));
            let (pu, pv) = (
                node_pen.get(&u).copied().unwrap_or(1.0),
                node_pen.get(&v).copied().unwrap_or(1.0),
            );
            let node_factor = (cu * pu + cv * pv) / (cu + cv);
            let edge_factor = edge_pen.get(&e).copied().unwrap_or(1.0);
            costs.cost(e, base * node_factor * edge_factor)
        };
        let candidate = astar(graph, start, goal, heuristic, &penalized)?.nodes;
        let true_cost: f64 = candidate
            .windows(2)
            .map(|w| {
                let e = graph.edge_between(w[0], w[1]).expect("adjacent");
                costs.cost(e, graph.edge_cost(e))
            })
            .sum();
        let within = true_cost <= budget * (1.0 + 1e-12);
        let distinct = accepted.iter().all(|p| {
            *p != candidate && interior_overlap(&candidate, p) <= options.max_overlap
        });
        penalize(&candidate, &mut node_pen, &mut edge_pen);
        if within && distinct {
            accepted.push(candidate);
        }
    }
    Ok(accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_graph, GridSpec};
    use crate::model::path_cost;

    fn grid(dims: [usize; 3]) -> RoutingGraph {
        build_graph(&GridSpec::unit(dims).unwrap(), &[]).unwrap()
    }

    /// Every simple path between two nodes, by plain DFS.
    fn all_simple_paths(g: &RoutingGraph, s: NodeId, t: NodeId) -> Vec<Path> {
        fn rec(g: &RoutingGraph, t: NodeId, path: &mut Path, out: &mut Vec<Path>) {
            let u = *path.last().unwrap();
            if u == t {
                out.push(path.clone());
                return;
            }
            for &(v, _) in g.neighbors(u) {
                if !path.contains(&v) {
                    path.push(v);
                    rec(g, t, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        rec(g, t, &mut vec![s], &mut out);
        out
    }

    #[test]
    fn line_distances() {
        let g = grid([3, 1, 1]);
        let f = dijkstra(&g, NodeId(0), &BaseCosts);
        assert_eq!(f.dist, vec![0.0, 1.0, 2.0]);
        assert_eq!(f.path_to(NodeId(2)).unwrap(), vec![NodeId(0), NodeId(1), NodeId(2)]);
    }

    #[test]
    fn corner_to_corner_matches_brute_force() {
        let g = grid([3, 3, 1]);
        let (s, t) = (NodeId(0), NodeId(8));
        let f = dijkstra(&g, s, &BaseCosts);
        let brute = all_simple_paths(&g, s, t)
            .iter()
            .map(|p| path_cost(&g, p).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!((f.dist[t.index()] - brute).abs() < 1e-12);
        assert!((f.dist[t.index()] - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn expensive_edge_forces_detour() {
        let g = grid([3, 2, 1]);
        let (s, t) = (NodeId(0), NodeId(2));
        let e = g.edge_between(NodeId(0), NodeId(1)).unwrap();
        let overlay = CostOverlay::default().with_multiplier(e, 100.0);
        let f = dijkstra(&g, s, &overlay);
        let path = f.path_to(t).unwrap();
        assert!(!path.windows(2).any(|w| w == [NodeId(0), NodeId(1)]));
        let brute = all_simple_paths(&g, s, t)
            .iter()
            .map(|p| {
                p.windows(2)
                    .map(|w| {
                        let e = g.edge_between(w[0], w[1]).unwrap();
                        overlay.cost(e, g.edge_cost(e))
                    })
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((f.dist[t.index()] - brute).abs() < 1e-12);
    }

    #[test]
    fn field_satisfies_triangle_inequality() {
        let g = grid([4, 3, 2]);
        let f = dijkstra(&g, NodeId(5), &BaseCosts);
        assert_eq!(f.dist[5], 0.0);
        for (e, u, v) in g.edges() {
            let c = g.edge_cost(e);
            assert!(f.dist[v.index()] <= f.dist[u.index()] + c + 1e-12);
            assert!(f.dist[u.index()] <= f.dist[v.index()] + c + 1e-12);
        }
    }

    #[test]
    fn astar_trivial_and_exact() {
        let g = grid([4, 4, 2]);
        let goal = NodeId(30);
        let h = dijkstra(&g, goal, &BaseCosts);
        let p = astar(&g, goal, goal, Heuristic::exact(&h), &BaseCosts).unwrap();
        assert_eq!(p.nodes, vec![goal]);
        assert_eq!(p.cost, 0.0);

        let costs = Scaled(1.7);
        let p = astar(&g, NodeId(0), goal, Heuristic::exact(&h), &costs).unwrap();
        let d = dijkstra(&g, NodeId(0), &costs);
        assert!((p.cost - d.dist[goal.index()]).abs() < 1e-9);
        assert!((path_cost(&g, &p.nodes).unwrap() * 1.7 - p.cost).abs() < 1e-9);
    }

    #[test]
    fn astar_expands_only_nodes_on_optimal_frontier() {
        let g = grid([6, 5, 3]);
        let (s, t) = (NodeId(0), NodeId(g.node_count() as u32 - 1));
        let h = dijkstra(&g, t, &BaseCosts);
        let from_s = dijkstra(&g, s, &BaseCosts);
        let p = astar(&g, s, t, Heuristic::exact(&h), &BaseCosts).unwrap();
        let opt = p.cost;
        let bound = g
            .nodes()
            .filter(|v| from_s.dist[v.index()] + h.dist[v.index()] <= opt + 1e-9)
            .count();
        assert!(p.expanded <= bound);
        assert!(p.expanded < g.node_count());
    }

    #[test]
    fn disconnected_terminals() {
        let spec = GridSpec::unit([3, 1, 1]).unwrap();
        let wall = crate::grid::Zone::obstacle([0.9, -1.0, -1.0], [1.1, 1.0, 1.0]).unwrap();
        let g = build_graph(&spec, &[wall]).unwrap();
        let (s, t) = (NodeId(0), NodeId(1));
        let h = dijkstra(&g, t, &BaseCosts);
        assert!(matches!(
            astar(&g, s, t, Heuristic::exact(&h), &BaseCosts),
            Err(Error::TerminalsDisconnected { .. })
        ));
        assert!(shortest_path(&g, s, t, &BaseCosts).is_err());
    }

    fn alpha_paths(g: &RoutingGraph, s: NodeId, t: NodeId, alpha: f64, n: usize) -> Vec<Path> {
        let h = dijkstra(g, t, &BaseCosts);
        alpha_shortest_paths(
            g,
            s,
            t,
            alpha,
            n,
            &BaseCosts,
            Heuristic::exact(&h),
            AlphaPathOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn alpha_paths_tight_budget_keeps_only_diagonal() {
        let g = grid([2, 2, 1]);
        // Exhaustive check: only the diagonal fits within 1.2 x sqrt(2).
        let fitting: Vec<_> = all_simple_paths(&g, NodeId(0), NodeId(3))
            .into_iter()
            .filter(|p| path_cost(&g, p).unwrap() <= 1.2 * 2f64.sqrt())
            .collect();
        assert_eq!(fitting.len(), 1);
        let paths = alpha_paths(&g, NodeId(0), NodeId(3), 1.2, 7);
        assert_eq!(paths, vec![vec![NodeId(0), NodeId(3)]]);
    }

    #[test]
    fn alpha_paths_loose_budget_returns_several() {
        let g = grid([2, 2, 1]);
        let paths = alpha_paths(&g, NodeId(0), NodeId(3), 3.0, 7);
        assert!(paths.len() > 1);
        assert_eq!(paths[0], vec![NodeId(0), NodeId(3)]);
        let all = all_simple_paths(&g, NodeId(0), NodeId(3));
        for p in &paths {
            assert!(all.contains(p));
            assert!(path_cost(&g, p).unwrap() <= 3.0 * 2f64.sqrt() + 1e-12);
        }
        let one = alpha_paths(&g, NodeId(0), NodeId(3), 3.0, 1);
        assert_eq!(one, vec![vec![NodeId(0), NodeId(3)]]);
    }

    #[test]
    fn alpha_paths_are_within_budget_and_deterministic() {
        let g = grid([6, 6, 2]);
        let (s, t) = (NodeId(0), NodeId(g.node_count() as u32 - 1));
        let a = alpha_paths(&g, s, t, 1.3, 7);
        let b = alpha_paths(&g, s, t, 1.3, 7);
        assert_eq!(a, b);
        let shortest = path_cost(&g, &a[0]).unwrap();
        for p in &a {
            let ratio = path_cost(&g, p).unwrap() / shortest;
            assert!((1.0 - 1e-12..=1.3 + 1e-12).contains(&ratio));
        }
        for i in 0..a.len() {
            for j in 0..i {
                assert!(interior_overlap(&a[i], &a[j]) <= 0.8);
            }
        }
    }
}
