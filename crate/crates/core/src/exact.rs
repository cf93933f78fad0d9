//! Exhaustive oracle for tiny instances.
//!
//! All cables but one have their simple paths enumerated (depth-first with cost
//! pruning); the remaining cable is solved exactly by a shortest-path search
//! against the union of the others, which is optimal for that cable given the
//! rest. The product of the enumerated lists is searched by branch and bound.
//!
//! A path of cable `k` costing `c` forces `f ≥ c + w_L Σ_{j≠k} s_j`, where
//! `s_j` is the shortest-path cost of cable `j`, because every edge of the path
//! is selected. Given any feasible objective value `U`, paths above
//! `U − w_L Σ_{j≠k} s_j` can never be optimal; this is the safe cap.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{EdgeId, NodeId, RoutingGraph};
use crate::model::{evaluate, objectives_from_edges, path_edges, Instance, Path, Routing};
use crate::search::{self, Heuristic};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExactLimits {
    pub max_paths_per_cable: usize,
    /// Complete assignments evaluated before giving up.
    pub max_product: u64,
    /// Paths costing more than this multiple of the cable's shortest path are skipped.
    pub path_cost_cap_ratio: f64,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            max_paths_per_cable: 5_000,
            max_product: 10_000_000,
            path_cost_cap_ratio: 3.0,
        }
    }
}

impl ExactLimits {
    /// No ratio cap; only the safe cap applies.
    pub fn uncapped(max_paths_per_cable: usize, max_product: u64) -> Self {
        ExactLimits {
            max_paths_per_cable,
            max_product,
            path_cost_cap_ratio: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proof {
    Complete,
    Truncated,
}

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub routing: Routing,
    pub f_opt: f64,
    pub proof: Proof,
    /// Paths enumerated per cable (zero for the cable solved by search).
    pub paths_enumerated: Vec<usize>,
    pub assignments_evaluated: u64,
}

struct Enumeration {
    paths: Vec<(f64, Path, Vec<EdgeId>)>,
    complete: bool,
}

/// Simple paths of `cable` costing at most `cap`, sorted by cost then nodes.
fn enumerate_paths(instance: &Instance, cable: usize, cap: f64, limit: usize) -> Enumeration {
    let graph = instance.graph();
    let c = instance.cables()[cable];
    let h = instance.end_field(cable);
    let cap = cap * (1.0 + 1e-12) + 1e-12;
    let mut on_path = vec![false; graph.node_count()];
    let mut path = vec![c.start];
    let mut complete = true;

    fn rec(
        graph: &RoutingGraph,
        h: &[f64],
        goal: NodeId,
        cap: f64,
        limit: usize,
        cost: f64,
        path: &mut Path,
        on_path: &mut [bool],
        out: &mut Vec<(f64, Path)>,
        complete: &mut bool,
    ) {
        let u = *path.last().unwrap();
        if u == goal {
            if out.len() >= limit {
                *complete = false;
                return;
            }
            out.push((cost, path.clone()));
            return;
        }
        on_path[u.index()] = true;
        for &(v, e) in graph.neighbors(u) {
            if !*complete {
                break;
            }
            if on_path[v.index()] {
                continue;
            }
            let nc = cost + graph.edge_cost(e);
            if nc + h[v.index()] > cap {
                continue;
            }
            path.push(v);
            rec(graph, h, goal, cap, limit, nc, path, on_path, out, complete);
            path.pop();
        }
        on_path[u.index()] = false;
    }

    let mut raw: Vec<(f64, Path)> = Vec::new();
    if h[c.start.index()].is_finite() {
        rec(
            graph, h, c.end, cap, limit, 0.0, &mut path, &mut on_path, &mut raw, &mut complete,
        );
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let paths = raw
        .into_iter()
        .map(|(cost, p)| {
            let edges = path_edges(graph, &p).expect("enumerated paths are connected");
            (cost, p, edges)
        })
        .collect();
    Enumeration { paths, complete }
}

struct Shared<'a> {
    instance: &'a Instance,
    /// Enumerated cables in search order with their path lists.
    levels: Vec<(usize, &'a [(f64, Path, Vec<EdgeId>)])>,
    last: usize,
    shortest: Vec<f64>,
    best_bits: AtomicU64,
    evaluated: AtomicUsize,
    max_product: u64,
}

struct Branch {
    usage: Vec<u32>,
    chosen: Vec<usize>,
    f_l: f64,
    union_cost: f64,
    best: Option<(f64, Vec<usize>, Path)>,
    truncated: bool,
}

impl<'a> Shared<'a> {
    fn global_best(&self) -> f64 {
        f64::from_bits(self.best_bits.load(Ordering::Relaxed))
    }

    fn offer(&self, f: f64) {
        let mut cur = self.best_bits.load(Ordering::Relaxed);
        while f < f64::from_bits(cur) {
            match self.best_bits.compare_exchange_weak(cur, f.to_bits(), Ordering::Relaxed, Ordering::Relaxed) {
                Ok(_) => break,
                Err(x) => cur = x,
            }
        }
    }

    fn prunes(&self, lb: f64, branch: &Branch) -> bool {
        let bound = branch
            .best
            .as_ref()
            .map_or(self.global_best(), |b| b.0.min(self.global_best()));
        lb > bound * (1.0 + 1e-12) + 1e-12
    }

    /// Cheapest path of `cable` when unused edges cost `(w_L + share) c_e`.
    fn discounted(&self, cable: usize, usage: &[u32], share: f64) -> Option<(Path, f64)> {
        let w = self.instance.weights();
        let c = self.instance.cables()[cable];
        let costs = |e: EdgeId, base: f64| {
            if usage[e.index()] > 0 {
                w.w_l * base
            } else {
                (w.w_l + share) * base
            }
        };
        search::astar(
            self.instance.graph(),
            c.start,
            c.end,
            Heuristic::scaled(self.instance.end_field(cable), w.w_l),
            &costs,
        )
        .ok()
        .map(|p| (p.nodes, p.cost))
    }

    fn descend(&self, level: usize, branch: &mut Branch) {
        let w = self.instance.weights();
        let graph = self.instance.graph();
        if level == self.levels.len() {
            if self.evaluated.fetch_add(1, Ordering::Relaxed) as u64 >= self.max_product {
                branch.truncated = true;
                return;
            }
            let Some((path, cost)) = self.discounted(self.last, &branch.usage, w.w_b) else {
                return;
            };
            let lb = w.w_l * branch.f_l + w.w_b * branch.union_cost + cost;
            if self.prunes(lb, branch) {
                return;
            }
            let f = self.exact_value(branch, &path);
            if branch.best.as_ref().map_or(true, |b| f < b.0) {
                branch.best = Some((f, branch.chosen.clone(), path));
                self.offer(f);
            }
            return;
        }
        let (_, paths) = self.levels[level];
        let rest_shortest: f64 = self.levels[level + 1..]
            .iter()
            .map(|(k, _)| self.shortest[*k])
            .sum::<f64>()
            + self.shortest[self.last];
        let remaining = (self.levels.len() - level) as f64;
        for (i, (cost, _, edges)) in paths.iter().enumerate() {
            if branch.truncated {
                return;
            }
            let monotone = w.w_l * (branch.f_l + cost + rest_shortest) + w.w_b * branch.union_cost;
            if w.w_l > 0.0 && self.prunes(monotone, branch) {
                break;
            }
            let added: f64 = edges
                .iter()
                .filter(|e| branch.usage[e.index()] == 0)
                .map(|&e| graph.edge_cost(e))
                .sum();
            let union_cost = branch.union_cost + added;
            if self.prunes(w.w_l * (branch.f_l + cost + rest_shortest) + w.w_b * union_cost, branch) {
                continue;
            }
            for &e in edges {
                branch.usage[e.index()] += 1;
            }
            // Remaining cables share the new-edge charge evenly in the bound.
            let share = w.w_b / remaining;
            let mut lb = w.w_l * (branch.f_l + cost) + w.w_b * union_cost;
            let mut feasible = true;
            if level + 1 < self.levels.len() {
                for k in self.levels[level + 1..].iter().map(|(k, _)| *k).chain([self.last]) {
                    match self.discounted(k, &branch.usage, share) {
                        Some((_, c)) => lb += c,
                        None => feasible = false,
                    }
                }
            }
            if feasible && !self.prunes(lb, branch) {
                let (old_l, old_u) = (branch.f_l, branch.union_cost);
                branch.f_l += cost;
                branch.union_cost = union_cost;
                branch.chosen.push(i);
                self.descend(level + 1, branch);
                branch.chosen.pop();
                branch.f_l = old_l;
                branch.union_cost = old_u;
            }
            for &e in edges {
                branch.usage[e.index()] -= 1;
            }
        }
    }

    fn exact_value(&self, branch: &Branch, last_path: &Path) -> f64 {
        let graph = self.instance.graph();
        let mut edges: Vec<Vec<EdgeId>> = vec![Vec::new(); self.instance.cable_count()];
        for (level, &i) in branch.chosen.iter().enumerate() {
            let (k, paths) = self.levels[level];
            edges[k] = paths[i].2.clone();
        }
        edges[self.last] = path_edges(graph, last_path).expect("search path");
        objectives_from_edges(graph, self.instance.weights(), &edges).f
    }
}

/// Exact minimum of the weighted objective, or the best assignment found when
/// a limit was hit (flagged as truncated).
pub fn solve_exact(instance: &Instance, limits: &ExactLimits) -> Result<ExactResult> {
    if limits.max_paths_per_cable == 0 || limits.max_product == 0 || !(limits.path_cost_cap_ratio >= 1.0) {
        return Err(Error::InvalidParameter(
            "exact limits must be positive and the cap ratio at least 1".into(),
        ));
    }
    let graph = instance.graph();
    let w = instance.weights();
    let n_k = instance.cable_count();
    let shortest = instance.shortest_costs();
    for (k, c) in instance.cables().iter().enumerate() {
        if !shortest[k].is_finite() {
            return Err(Error::TerminalsDisconnected {
                from: c.start,
                to: c.end,
            });
        }
    }
    let upper = evaluate(instance, &greedy_routing(instance)?)?.f;
    let total_shortest: f64 = shortest.iter().sum();

    let mut ratio_binding = false;
    let enumerations: Vec<Enumeration> = (0..n_k)
        .map(|k| {
            let safe = upper - w.w_l * (total_shortest - shortest[k]);
            let ratio_cap = limits.path_cost_cap_ratio * shortest[k];
            if ratio_cap < safe * (1.0 - 1e-12) {
                ratio_binding = true;
            }
            if n_k == 1 {
                return Enumeration {
                    paths: Vec::new(),
                    complete: true,
                };
            }
            enumerate_paths(instance, k, ratio_cap.min(safe), limits.max_paths_per_cable)
        })
        .collect();

    // The cable with the largest (or an incomplete) list is solved by search.
    let last = if n_k == 1 {
        0
    } else {
        (0..n_k)
            .max_by_key(|&k| (!enumerations[k].complete, enumerations[k].paths.len(), std::cmp::Reverse(k)))
            .unwrap()
    };
    let mut complete = !ratio_binding || n_k == 1;
    let mut levels = Vec::new();
    let mut paths_enumerated = vec![0; n_k];
    for k in 0..n_k {
        if k == last {
            continue;
        }
        complete &= enumerations[k].complete;
        paths_enumerated[k] = enumerations[k].paths.len();
        levels.push((k, &enumerations[k].paths[..]));
    }
    // Fewer choices near the root prune better.
    levels.sort_by_key(|(k, p)| (p.len(), *k));

    let shared = Shared {
        instance,
        levels,
        last,
        shortest,
        best_bits: AtomicU64::new((upper * (1.0 + 1e-9) + 1e-9).to_bits()),
        evaluated: AtomicUsize::new(0),
        max_product: limits.max_product,
    };
    let new_branch = || Branch {
        usage: vec![0; graph.edge_count()],
        chosen: Vec::new(),
        f_l: 0.0,
        union_cost: 0.0,
        best: None,
        truncated: false,
    };

    let outcomes: Vec<Branch> = if shared.levels.is_empty() {
        let mut b = new_branch();
        shared.descend(0, &mut b);
        vec![b]
    } else {
        let (_, first) = shared.levels[0];
        (0..first.len())
            .into_par_iter()
            .map(|i| {
                let mut b = new_branch();
                let (cost, _, edges) = &first[i];
                let union_cost: f64 = edges.iter().map(|&e| graph.edge_cost(e)).sum();
                let rest: f64 = shared.levels[1..].iter().map(|(k, _)| shared.shortest[*k]).sum::<f64>()
                    + shared.shortest[last];
                if shared.prunes(w.w_l * (cost + rest) + w.w_b * union_cost, &b) {
                    return b;
                }
                for &e in edges {
                    b.usage[e.index()] += 1;
                }
                b.f_l = *cost;
                b.union_cost = union_cost;
                b.chosen.push(i);
                shared.descend(1, &mut b);
                b
            })
            .collect()
    };

    let mut truncated = false;
    let mut best: Option<(f64, Vec<usize>, Path)> = None;
    for b in outcomes {
        truncated |= b.truncated;
        if let Some(cand) = b.best {
            if best.as_ref().map_or(true, |x| cand.0 < x.0) {
                best = Some(cand);
            }
        }
    }
    complete &= !truncated;
    let assignments_evaluated = shared.evaluated.load(Ordering::Relaxed) as u64;

    let routing = match best {
        Some((_, chosen, last_path)) => {
            let mut paths: Vec<Path> = vec![Vec::new(); n_k];
            for (level, &i) in chosen.iter().enumerate() {
                let (k, list) = shared.levels[level];
                paths[k] = list[i].1.clone();
            }
            paths[last] = last_path;
            Routing::new(paths)
        }
        None => {
            // The greedy bound was already optimal within tolerance.
            greedy_routing(instance)?
        }
    };
    let f_opt = evaluate(instance, &routing)?.f;
    Ok(ExactResult {
        routing,
        f_opt,
        proof: if complete { Proof::Complete } else { Proof::Truncated },
        paths_enumerated,
        assignments_evaluated: assignments_evaluated.min(limits.max_product),
    })
}

/// Chains penalized shortest paths in cable order; a cheap feasible upper bound
/// that does not depend on the local search.
fn greedy_routing(instance: &Instance) -> Result<Routing> {
    let graph = instance.graph();
    let w = instance.weights();
    let mut used = vec![false; graph.edge_count()];
    let mut paths = Vec::new();
    for k in 0..instance.cable_count() {
        let c = instance.cables()[k];
        let costs = |e: EdgeId, base: f64| {
            if used[e.index()] {
                w.w_l * base
            } else {
                (w.w_l + w.w_b) * base
            }
        };
        let p = search::astar(graph, c.start, c.end, Heuristic::scaled(instance.end_field(k), w.w_l), &costs)?
            .nodes;
        for e in path_edges(graph, &p)? {
            used[e.index()] = true;
        }
        paths.push(p);
    }
    Ok(Routing::new(paths))
}

/// Weak-duality check of a dual value against a complete exact result.
pub fn verify_bound(result: &ExactResult, h_value: f64) -> Result<bool> {
    if result.proof != Proof::Complete {
        return Err(Error::Precondition("exact result is truncated".into()));
    }
    Ok(h_value <= result.f_opt + 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_graph, GridSpec};
    use crate::model::{Cable, Weights};
    use std::sync::Arc;

    fn instance(dims: [usize; 3], cables: &[([usize; 3], [usize; 3])], w_b: f64) -> Instance {
        let g: Arc<RoutingGraph> = Arc::new(build_graph(&GridSpec::unit(dims).unwrap(), &[]).unwrap());
        let cables = cables
            .iter()
            .map(|&(a, b)| Cable::new(g.node_at(a).unwrap(), g.node_at(b).unwrap()))
            .collect();
        Instance::new(g, cables, Weights::from_bundle(w_b).unwrap()).unwrap()
    }

    /// Every simple path, no pruning.
    fn all_paths(g: &RoutingGraph, s: NodeId, t: NodeId) -> Vec<Path> {
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

    fn brute_force(inst: &Instance) -> f64 {
        let g = inst.graph();
        let lists: Vec<Vec<Path>> = inst.cables().iter().map(|c| all_paths(g, c.start, c.end)).collect();
        let mut best = f64::INFINITY;
        let mut idx = vec![0usize; lists.len()];
        loop {
            let r = Routing::new(idx.iter().enumerate().map(|(k, &i)| lists[k][i].clone()).collect());
            best = best.min(evaluate(inst, &r).unwrap().f);
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return best;
                }
                idx[k] += 1;
                if idx[k] < lists[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn single_cable_is_shortest_path() {
        let inst = instance([4, 3, 1], &[([0, 0, 0], [3, 2, 0])], 0.4);
        let res = solve_exact(&inst, &ExactLimits::default()).unwrap();
        assert_eq!(res.proof, Proof::Complete);
        assert!((res.f_opt - inst.shortest_costs()[0]).abs() < 1e-12);
    }

    #[test]
    fn crossing_cables_match_brute_force() {
        for w_b in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let inst = instance([3, 3, 1], &[([0, 0, 0], [2, 2, 0]), ([0, 2, 0], [2, 0, 0])], w_b);
            let res = solve_exact(&inst, &ExactLimits::uncapped(1_000_000, 100_000_000)).unwrap();
            assert_eq!(res.proof, Proof::Complete);
            let bf = brute_force(&inst);
            assert!((res.f_opt - bf).abs() < 1e-9, "w_B = {w_b}: {} vs {bf}", res.f_opt);
        }
    }

    #[test]
    fn three_cables_match_brute_force() {
        let inst = instance(
            [3, 2, 1],
            &[([0, 0, 0], [2, 1, 0]), ([0, 1, 0], [2, 0, 0]), ([1, 0, 0], [1, 1, 0])],
            0.6,
        );
        let res = solve_exact(&inst, &ExactLimits::uncapped(1_000_000, 100_000_000)).unwrap();
        assert_eq!(res.proof, Proof::Complete);
        assert!((res.f_opt - brute_force(&inst)).abs() < 1e-9);
    }

    #[test]
    fn no_bundling_reduces_to_shortest_paths() {
        let inst = instance([4, 4, 1], &[([0, 0, 0], [3, 3, 0]), ([0, 3, 0], [3, 1, 0])], 0.0);
        let res = solve_exact(&inst, &ExactLimits::default()).unwrap();
        let sum: f64 = inst.shortest_costs().iter().sum();
        assert!((res.f_opt - sum).abs() < 1e-9);
    }

    #[test]
    fn limits_flag_truncation() {
        let inst = instance([4, 4, 1], &[([0, 0, 0], [3, 3, 0]), ([0, 3, 0], [3, 0, 0]), ([0, 1, 0], [3, 2, 0])], 0.5);
        let res = solve_exact(
            &inst,
            &ExactLimits {
                max_paths_per_cable: 3,
                max_product: 10,
                path_cost_cap_ratio: 3.0,
            },
        )
        .unwrap();
        assert_eq!(res.proof, Proof::Truncated);
        assert!(verify_bound(&res, 0.0).is_err());
    }

    #[test]
    fn capped_and_uncapped_agree() {
        let inst = instance([4, 3, 1], &[([0, 0, 0], [3, 2, 0]), ([0, 2, 0], [3, 0, 0])], 0.75);
        let a = solve_exact(&inst, &ExactLimits::default()).unwrap();
        let b = solve_exact(&inst, &ExactLimits::uncapped(1_000_000, 100_000_000)).unwrap();
        assert_eq!(b.proof, Proof::Complete);
        assert!((a.f_opt - b.f_opt).abs() < 1e-9);
    }

    #[test]
    fn verify_bound_examples() {
        let inst = instance([3, 3, 1], &[([0, 0, 0], [2, 2, 0]), ([0, 2, 0], [2, 0, 0])], 0.5);
        let res = solve_exact(&inst, &ExactLimits::default()).unwrap();
        assert!(verify_bound(&res, res.f_opt).unwrap());
        assert!(!verify_bound(&res, res.f_opt + 1.0).unwrap());
    }

    #[test]
    fn deterministic() {
        let inst = instance([4, 3, 1], &[([0, 0, 0], [3, 2, 0]), ([0, 2, 0], [3, 0, 0]), ([1, 0, 0], [2, 2, 0])], 0.5);
        let a = solve_exact(&inst, &ExactLimits::default()).unwrap();
        let b = solve_exact(&inst, &ExactLimits::default()).unwrap();
        assert_eq!(a.routing, b.routing);
    }
}
