//! Harness routing heuristic: penalized single-cable rerouting, round-robin
//! cable search, and branch-point relocation, alternated to a fixed point.

use crate::error::{Error, Result};
use crate::grid::{EdgeId, NodeId, RoutingGraph};
use crate::model::{
    derive_topology, objectives_from_edges, path_edges, validate_routing, Instance, Path, Routing,
    Topology, Weights,
};
use crate::search::{self, dijkstra_multi, DijkstraRun, DistanceField, Heuristic, SearchLimits};

/// Relative margin an objective must drop by to count as an improvement.
pub const IMPROVEMENT_TOL: f64 = 1e-9;

/// True when `new` is strictly better than `old` beyond float noise.
pub fn improves(new: f64, old: f64) -> bool {
    new < old - IMPROVEMENT_TOL * old.abs()
}

/// Edges traversed by the paths held fixed while one cable is rerouted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPathSet {
    usage: Vec<u32>,
}

impl FixedPathSet {
    pub fn new(edge_count: usize) -> Self {
        FixedPathSet {
            usage: vec![0; edge_count],
        }
    }

    pub fn from_edge_lists<'a>(
        edge_count: usize,
        lists: impl IntoIterator<Item = &'a [EdgeId]>,
    ) -> Self {
        let mut set = FixedPathSet::new(edge_count);
        for l in lists {
            set.add(l);
        }
        set
    }

    pub fn add(&mut self, edges: &[EdgeId]) {
        for &e in edges {
            self.usage[e.index()] += 1;
        }
    }

    pub fn remove(&mut self, edges: &[EdgeId]) {
        for &e in edges {
            debug_assert!(self.usage[e.index()] > 0);
            self.usage[e.index()] -= 1;
        }
    }

    #[inline]
    pub fn contains(&self, e: EdgeId) -> bool {
        self.usage[e.index()] > 0
    }

    pub fn is_empty(&self) -> bool {
        self.usage.iter().all(|&u| u == 0)
    }
}

/// Cheapest path for `cable` when edges in `fixed` cost `w_L c_e` and every
/// other edge costs `(w_L + w_B) c_e`.
pub fn penalized_route(instance: &Instance, cable: usize, fixed: &FixedPathSet) -> Result<Path> {
    let w = instance.weights();
    let c = instance.cables()[cable];
    let costs = |e: EdgeId, base: f64| {
        if fixed.contains(e) {
            w.w_l * base
        } else {
            (w.w_l + w.w_b) * base
        }
    };
    let heuristic = Heuristic::scaled(instance.end_field(cable), w.w_l);
    search::route(instance.graph(), c.start, c.end, heuristic, &costs)
}

/// Limits and counters for the local search.
#[derive(Debug, Clone, Copy)]
pub struct HrhOptions {
    /// Accepted moves after which the search is declared non-terminating.
    pub move_cap: usize,
}

impl Default for HrhOptions {
    fn default() -> Self {
        HrhOptions { move_cap: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HrhStats {
    /// Penalized reroutes attempted.
    pub route_evaluations: usize,
    pub route_moves: usize,
    pub branch_moves: usize,
    pub pair_moves: usize,
    /// Alternations between cable search and branch-point relocation.
    pub rounds: usize,
}

impl HrhStats {
    pub fn moves(&self) -> usize {
        self.route_moves + self.branch_moves + self.pair_moves
    }
}

/// Observer of accepted moves: receives the objective before and after.
pub trait MoveObserver {
    fn accepted(&mut self, before: f64, after: f64);
}

impl MoveObserver for () {
    fn accepted(&mut self, _before: f64, _after: f64) {}
}

impl MoveObserver for Vec<(f64, f64)> {
    fn accepted(&mut self, before: f64, after: f64) {
        self.push((before, after));
    }
}

/// Edge cost for a spoke carrying `m` cables; `shared` marks edges kept by the
/// rest of the harness, which only pay the per-cable part.
pub(crate) fn spoke_cost(w: Weights, m: u32, shared: &[bool]) -> impl Fn(EdgeId, f64) -> f64 + '_ {
    let m = m as f64;
    move |e: EdgeId, base: f64| {
        if shared[e.index()] {
            w.w_l * m * base
        } else {
            (w.w_l * m + w.w_b) * base
        }
    }
}

/// Marks union edges that are not on any of the `excluded` segments.
pub(crate) fn shared_edges(instance: &Instance, topo: &Topology, excluded: &[usize]) -> Vec<bool> {
    let mut shared = vec![false; instance.graph().edge_count()];
    for (i, s) in topo.bundle_segments.iter().enumerate() {
        if !excluded.contains(&i) {
            for &e in &s.edges {
                shared[e.index()] = true;
            }
        }
    }
    shared
}

pub(crate) fn segment_cost(graph: &RoutingGraph, edges: &[EdgeId], cost: &impl Fn(EdgeId, f64) -> f64) -> f64 {
    edges.iter().map(|&e| cost(e, graph.edge_cost(e))).sum()
}

/// Distance fields from the far end of each listed spoke of `b`.
pub(crate) fn spoke_fields(
    instance: &Instance,
    topo: &Topology,
    b: NodeId,
    spokes: &[usize],
    shared: &[bool],
    bound: f64,
) -> Vec<(usize, DistanceField)> {
    spokes
        .iter()
        .map(|&s| {
            let seg = &topo.bundle_segments[s];
            let cost = spoke_cost(instance.weights(), seg.multiplicity, shared);
            let field = dijkstra_multi(
                instance.graph(),
                &[(seg.other_end(b), 0.0)],
                &cost,
                SearchLimits {
                    max_dist: bound,
                    target: None,
                },
            );
            (s, field)
        })
        .collect()
}

/// Node minimizing the summed spoke distances among those with sum at most
/// `bound`; ties go to the smaller node id.
///
/// The spoke searches advance in lockstep. A node settled by the searches in
/// `A` has a sum of at least its settled distances plus the frontier radii of
/// the others, so the searches stop once every such bound exceeds the best sum.
pub(crate) fn min_sum_site(
    instance: &Instance,
    topo: &Topology,
    b: NodeId,
    spokes: &[usize],
    shared: &[bool],
    bound: f64,
) -> Option<(NodeId, f64, Vec<(usize, DistanceField)>)> {
    let graph = instance.graph();
    let costs: Vec<_> = spokes
        .iter()
        .map(|&s| spoke_cost(instance.weights(), topo.bundle_segments[s].multiplicity, shared))
        .collect();
    let mut runs: Vec<_> = spokes
        .iter()
        .zip(&costs)
        .map(|(&s, c)| DijkstraRun::new(graph, &[(topo.bundle_segments[s].other_end(b), 0.0)], c))
        .collect();
    let k = runs.len();
    let mut count = vec![0u8; graph.node_count()];
    let mut touched: Vec<NodeId> = Vec::new();
    let mut best: Option<(NodeId, f64)> = None;
    let mut limit = bound;
    let mut steps = 0usize;
    let mut next_check = 1024usize;
    loop {
        let tops: Vec<f64> = runs.iter_mut().map(|r| r.peek().unwrap_or(f64::INFINITY)).collect();
        let (j, &top) = tops
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("at least one spoke");
        if top == f64::INFINITY {
            break;
        }
        let frontier: f64 = tops.iter().sum();
        if frontier > limit && steps >= next_check {
            next_check = steps + (touched.len() / 4).max(1024);
            let open = touched.iter().any(|&v| {
                let c = count[v.index()] as usize;
                c < k && {
                    let lb: f64 = runs
                        .iter()
                        .zip(&tops)
                        .map(|(r, &t)| r.settled_dist(v).unwrap_or(t))
                        .sum();
                    lb <= limit
                }
            });
            if !open {
                break;
            }
        }
        let u = runs[j].step().expect("frontier is nonempty");
        steps += 1;
        let c = &mut count[u.index()];
        if *c == 0 {
            touched.push(u);
        }
        *c += 1;
        if *c as usize == k {
            let total: f64 = runs.iter().fold(0.0, |acc, r| acc + r.settled_dist(u).expect("settled"));
            let better = match best {
                None => total <= limit,
                Some((bv, bt)) => total < bt || (total == bt && u < bv),
            };
            if better {
                best = Some((u, total));
                limit = total;
            }
        }
    }
    let (v, total) = best?;
    let fields = spokes.iter().copied().zip(runs.into_iter().map(DijkstraRun::finish)).collect();
    Some((v, total, fields))
}

/// Replacement node list for segment `s` given a path that starts at its
/// unmoved endpoint `fixed_end`; keeps the segment's stored orientation.
pub(crate) fn reoriented(topo: &Topology, s: usize, fixed_end: NodeId, mut path: Path) -> Path {
    if topo.bundle_segments[s].first() != fixed_end {
        path.reverse();
    }
    path
}

/// Segments incident to `b`, or `None` when one of them is a loop.
pub(crate) fn spokes_of(topo: &Topology, b: NodeId) -> Option<Vec<usize>> {
    let inc = topo.incident_segments(b);
    if inc.is_empty() || inc.iter().any(|&s| topo.bundle_segments[s].first() == topo.bundle_segments[s].last()) {
        return None;
    }
    Some(inc)
}

struct Search<'a, O: MoveObserver> {
    instance: &'a Instance,
    options: HrhOptions,
    stats: HrhStats,
    observer: &'a mut O,
}

impl<'a, O: MoveObserver> Search<'a, O> {
    fn f_of(&self, edges: &[Vec<EdgeId>]) -> f64 {
        objectives_from_edges(self.instance.graph(), self.instance.weights(), edges).f
    }

    fn count_move(&mut self, before: f64, after: f64) -> Result<()> {
        self.observer.accepted(before, after);
        if self.stats.moves() > self.options.move_cap {
            return Err(Error::MoveCapExceeded(self.options.move_cap));
        }
        Ok(())
    }

    fn cable_route_search(&mut self, routing: Routing) -> Result<Routing> {
        let inst = self.instance;
        let graph = inst.graph();
        let n_k = inst.cable_count();
        let mut best_edges = validate_routing(inst, &routing)?;
        let mut best = routing;
        let mut f_best = self.f_of(&best_edges);
        let mut fixed =
            FixedPathSet::from_edge_lists(graph.edge_count(), best_edges.iter().map(|v| &v[..]));
        let mut i = 1usize;
        let mut k = 0usize;
        while i <= n_k {
            fixed.remove(&best_edges[k]);
            let new_path = penalized_route(inst, k, &fixed)?;
            self.stats.route_evaluations += 1;
            let new_edges = path_edges(graph, &new_path)?;
            let old_edges = std::mem::replace(&mut best_edges[k], new_edges);
            let f_new = self.f_of(&best_edges);
            if improves(f_new, f_best) {
                self.stats.route_moves += 1;
                best.paths[k] = new_path;
                self.count_move(f_best, f_new)?;
                f_best = f_new;
                i = 0;
            } else {
                best_edges[k] = old_edges;
            }
            fixed.add(&best_edges[k]);
            i += 1;
            k = (k + 1) % n_k;
        }
        Ok(best)
    }

    fn try_candidate(
        &mut self,
        topo: &Topology,
        segments: Vec<Path>,
        f_cur: f64,
    ) -> Result<Option<(Routing, f64)>> {
        let routing = topo.assemble(self.instance.cables(), &segments)?;
        let edges = validate_routing(self.instance, &routing)?;
        let f_new = self.f_of(&edges);
        Ok(improves(f_new, f_cur).then_some((routing, f_new)))
    }

    fn relocate_single(
        &mut self,
        topo: &Topology,
        b: NodeId,
        f_cur: f64,
    ) -> Result<Option<(Routing, f64)>> {
        let Some(spokes) = spokes_of(topo, b) else {
            return Ok(None);
        };
        let shared = shared_edges(self.instance, topo, &spokes);
        let incumbent: f64 = spokes
            .iter()
            .map(|&s| {
                let seg = &topo.bundle_segments[s];
                segment_cost(self.instance.graph(), &seg.edges, &spoke_cost(self.instance.weights(), seg.multiplicity, &shared))
            })
            .sum();
        let bound = incumbent * (1.0 + 1e-12);
        let Some((v, total, fields)) = min_sum_site(self.instance, topo, b, &spokes, &shared, bound) else {
            return Ok(None);
        };
        if total >= incumbent * (1.0 - 1e-12) {
            return Ok(None);
        }
        let mut segments: Vec<Path> = topo.bundle_segments.iter().map(|s| s.nodes.clone()).collect();
        for (s, field) in &fields {
            let far = topo.bundle_segments[*s].other_end(b);
            let p = field.path_to(v).expect("reached");
            segments[*s] = reoriented(topo, *s, far, p);
        }
        self.try_candidate(topo, segments, f_cur)
    }

    fn relocate_pair(
        &mut self,
        topo: &Topology,
        link: usize,
        f_cur: f64,
    ) -> Result<Option<(Routing, f64)>> {
        let graph = self.instance.graph();
        let seg = &topo.bundle_segments[link];
        let (b1, b2) = (seg.first(), seg.last());
        let (Some(inc1), Some(inc2)) = (spokes_of(topo, b1), spokes_of(topo, b2)) else {
            return Ok(None);
        };
        let spokes1: Vec<usize> = inc1.iter().copied().filter(|&s| s != link).collect();
        let spokes2: Vec<usize> = inc2.iter().copied().filter(|&s| s != link).collect();
        // Parallel links between the pair would move both ends of one spoke.
        if spokes1.iter().any(|&s| topo.bundle_segments[s].other_end(b1) == b2)
            || spokes2.iter().any(|&s| topo.bundle_segments[s].other_end(b2) == b1)
        {
            return Ok(None);
        }
        let mut excluded = spokes1.clone();
        excluded.extend(&spokes2);
        excluded.push(link);
        let shared = shared_edges(self.instance, topo, &excluded);
        let link_cost = spoke_cost(self.instance.weights(), seg.multiplicity, &shared);
        let cost_of = |spokes: &[usize]| -> f64 {
            spokes
                .iter()
                .map(|&s| {
                    let o = &topo.bundle_segments[s];
                    segment_cost(self.instance.graph(), &o.edges, &spoke_cost(self.instance.weights(), o.multiplicity, &shared))
                })
                .sum()
        };
        let incumbent = cost_of(&spokes1) + segment_cost(self.instance.graph(), &seg.edges, &link_cost) + cost_of(&spokes2);
        let bound = incumbent * (1.0 + 1e-12);
        let fields1 = spoke_fields(self.instance, topo, b1, &spokes1, &shared, bound);
        let fields2 = spoke_fields(self.instance, topo, b2, &spokes2, &shared, bound);
        let r1 = sum_fields(&fields1, graph.node_count());
        let r2 = sum_fields(&fields2, graph.node_count());
        let seeds: Vec<(NodeId, f64)> = r1
            .iter()
            .enumerate()
            .filter(|(_, d)| **d <= bound)
            .map(|(i, &d)| (NodeId(i as u32), d))
            .collect();
        if seeds.is_empty() {
            return Ok(None);
        }
        let through = dijkstra_multi(
            graph,
            &seeds,
            &link_cost,
            SearchLimits {
                max_dist: bound,
                target: None,
            },
        );
        let mut best: Option<(NodeId, f64)> = None;
        for i in 0..graph.node_count() {
            let t = through.dist[i] + r2[i];
            if t.is_finite() && best.map_or(true, |(_, b)| t < b) {
                best = Some((NodeId(i as u32), t));
            }
        }
        let Some((v, total)) = best else {
            return Ok(None);
        };
        if total >= incumbent * (1.0 - 1e-12) {
            return Ok(None);
        }
        let link_path = through.path_to(v).expect("reached");
        let u = link_path[0];
        let mut segments: Vec<Path> = topo.bundle_segments.iter().map(|s| s.nodes.clone()).collect();
        for (s, field) in &fields1 {
            let far = topo.bundle_segments[*s].other_end(b1);
            segments[*s] = reoriented(topo, *s, far, field.path_to(u).expect("reached"));
        }
        for (s, field) in &fields2 {
            let far = topo.bundle_segments[*s].other_end(b2);
            segments[*s] = reoriented(topo, *s, far, field.path_to(v).expect("reached"));
        }
        // The link runs u -> v, i.e. from b1's new site to b2's.
        segments[link] = if seg.first() == b1 {
            link_path
        } else {
            link_path.into_iter().rev().collect()
        };
        self.try_candidate(topo, segments, f_cur)
    }

    fn optimize_branch_points(&mut self, routing: Routing) -> Result<Routing> {
        let inst = self.instance;
        let mut routing = routing;
        let mut f_cur = self.f_of(&validate_routing(inst, &routing)?);
        loop {
            let mut improved = false;
            let mut topo = derive_topology(inst, &routing)?;
            let mut i = 0;
            while i < topo.branch_points.len() {
                let b = topo.branch_points[i];
                i += 1;
                if topo.is_terminal(b) {
                    continue;
                }
                if let Some((r, f_new)) = self.relocate_single(&topo, b, f_cur)? {
                    self.stats.branch_moves += 1;
                    self.count_move(f_cur, f_new)?;
                    routing = r;
                    f_cur = f_new;
                    improved = true;
                    topo = derive_topology(inst, &routing)?;
                }
            }
            let mut s = 0;
            while s < topo.bundle_segments.len() {
                let seg = &topo.bundle_segments[s];
                let movable = |n: NodeId| topo.is_branch_point(n) && !topo.is_terminal(n);
                let candidate = seg.first() != seg.last() && movable(seg.first()) && movable(seg.last());
                let idx = s;
                s += 1;
                if !candidate {
                    continue;
                }
                if let Some((r, f_new)) = self.relocate_pair(&topo, idx, f_cur)? {
                    self.stats.pair_moves += 1;
                    self.count_move(f_cur, f_new)?;
                    routing = r;
                    f_cur = f_new;
                    improved = true;
                    topo = derive_topology(inst, &routing)?;
                }
            }
            if !improved {
                return Ok(routing);
            }
        }
    }
}

fn sum_fields(fields: &[(usize, DistanceField)], n: usize) -> Vec<f64> {
    let mut total = vec![0.0; n];
    for (_, f) in fields {
        for (t, d) in total.iter_mut().zip(&f.dist) {
            *t += d;
        }
    }
    total
}

/// Node minimizing the summed field distances; ties go to the smaller node id.
#[cfg(test)]
fn argmin_sum(fields: &[(usize, DistanceField)]) -> Option<(NodeId, f64)> {
    let n = fields.first()?.1.dist.len();
    let total = sum_fields(fields, n);
    let mut best: Option<(NodeId, f64)> = None;
    for (i, t) in total.into_iter().enumerate() {
        if t.is_finite() && best.map_or(true, |(_, b)| t < b) {
            best = Some((NodeId(i as u32), t));
        }
    }
    best
}

/// Round-robin penalized rerouting of every cable until `|K|` consecutive
/// attempts fail to improve the objective.
pub fn cable_route_search(instance: &Instance, routing: Routing) -> Result<Routing> {
    cable_route_search_with_stats(instance, routing).map(|(r, _)| r)
}

pub fn cable_route_search_with_stats(
    instance: &Instance,
    routing: Routing,
) -> Result<(Routing, HrhStats)> {
    let mut observer = ();
    let mut s = Search {
        instance,
        options: HrhOptions::default(),
        stats: HrhStats::default(),
        observer: &mut observer,
    };
    let r = s.cable_route_search(routing)?;
    Ok((r, s.stats))
}

/// Relocates branch points (singly and adjacent pairs) while the objective
/// improves.
pub fn optimize_branch_points(instance: &Instance, routing: Routing) -> Result<Routing> {
    let mut observer = ();
    let mut s = Search {
        instance,
        options: HrhOptions::default(),
        stats: HrhStats::default(),
        observer: &mut observer,
    };
    s.optimize_branch_points(routing)
}

/// Alternates cable rerouting and branch-point relocation until neither
/// improves the objective.
pub fn run_hrh(instance: &Instance, initial: Routing) -> Result<Routing> {
    run_hrh_observed(instance, initial, HrhOptions::default(), &mut ()).map(|(r, _)| r)
}

pub fn run_hrh_observed<O: MoveObserver>(
    instance: &Instance,
    initial: Routing,
    options: HrhOptions,
    observer: &mut O,
) -> Result<(Routing, HrhStats)> {
    let mut s = Search {
        instance,
        options,
        stats: HrhStats::default(),
        observer,
    };
    let mut routing = initial;
    loop {
        s.stats.rounds += 1;
        let before = s.stats.moves();
        routing = s.cable_route_search(routing)?;
        routing = s.optimize_branch_points(routing)?;
        if s.stats.moves() == before {
            return Ok((routing, s.stats));
        }
    }
}

/// Per-cable shortest paths under base costs.
pub fn shortest_paths_routing(instance: &Instance) -> Result<Routing> {
    let graph = instance.graph();
    let paths = (0..instance.cable_count())
        .map(|k| {
            let c = instance.cables()[k];
            search::route(
                graph,
                c.start,
                c.end,
                Heuristic::scaled(instance.end_field(k), 1.0),
                &search::BaseCosts,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Routing::new(paths))
}
