use std::sync::Arc;

use harness_core::grid::{build_graph, GridSpec, NodeId, RoutingGraph, Zone};
use harness_core::hrh::{run_hrh, run_hrh_observed, shortest_paths_routing, HrhOptions};
use harness_core::lagrangian::{eval_dual, initial_lambda, project_onto_omega, Multipliers};
use harness_core::model::{evaluate, remove_loops, validate_routing, Cable, Instance, Weights};
use harness_core::search::{astar, dijkstra, BaseCosts, Heuristic};
use proptest::prelude::*;

fn random_graph(dims: [usize; 3], zones: &[([f64; 3], [f64; 3], f64)]) -> RoutingGraph {
    let spec = GridSpec::unit(dims).unwrap();
    let zones: Vec<Zone> = zones
        .iter()
        .map(|&(a, b, m)| {
            let lo = std::array::from_fn(|i| a[i].min(b[i]));
            let hi = std::array::from_fn(|i| a[i].max(b[i]));
            Zone::cost_multiplier(lo, hi, m).unwrap()
        })
        .collect();
    build_graph(&spec, &zones).unwrap()
}

fn zone() -> impl Strategy<Value = ([f64; 3], [f64; 3], f64)> {
    (
        prop::array::uniform3(0.0..6.0f64),
        prop::array::uniform3(0.0..6.0f64),
        0.2..5.0f64,
    )
}

fn dims() -> impl Strategy<Value = [usize; 3]> {
    (2usize..7, 2usize..6, 1usize..4).prop_map(|(a, b, c)| [a, b, c])
}

fn instance(seed_nodes: &[(usize, usize)], dims: [usize; 3], zones: &[([f64; 3], [f64; 3], f64)], w_b: f64) -> Instance {
    let g = Arc::new(random_graph(dims, zones));
    let n = g.node_count();
    let cables = seed_nodes
        .iter()
        .map(|&(a, b)| {
            let (a, b) = (a % n, b % n);
            let b = if a == b { (b + 1) % n } else { b };
            Cable::new(NodeId(a as u32), NodeId(b as u32))
        })
        .collect();
    Instance::new(g, cables, Weights::from_bundle(w_b).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn astar_matches_dijkstra(d in dims(), zs in prop::collection::vec(zone(), 0..3),
                              s in 0usize..1000, t in 0usize..1000, scale in 0.0..=1.0f64) {
        let g = random_graph(d, &zs);
        let n = g.node_count();
        let (s, t) = (NodeId((s % n) as u32), NodeId((t % n) as u32));
        let from_s = dijkstra(&g, s, &BaseCosts);
        let to_t = dijkstra(&g, t, &BaseCosts);
        let p = astar(&g, s, t, Heuristic::scaled(&to_t.dist, scale), &BaseCosts).unwrap();
        let want = from_s.dist[t.index()];
        prop_assert!((p.cost - want).abs() <= 1e-9 * (1.0 + want));
        prop_assert_eq!(p.nodes.first(), Some(&s));
        prop_assert_eq!(p.nodes.last(), Some(&t));
        let walked: f64 = p.nodes.windows(2).map(|w| g.edge_cost(g.edge_between(w[0], w[1]).unwrap())).sum();
        prop_assert!((walked - p.cost).abs() <= 1e-9 * (1.0 + want));
    }

    #[test]
    fn projection_is_feasible_and_optimal(v in prop::collection::vec(-5.0..5.0f64, 1..6), budget in 0.0..4.0f64) {
        let p = project_onto_omega(&v, budget).unwrap();
        let sum: f64 = p.iter().sum();
        prop_assert!((sum - budget).abs() <= 1e-9);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        if budget > 0.0 {
            // Optimality: p = max(v - θ, 0) for a common shift θ.
            let theta = v.iter().zip(&p).find(|(_, &q)| q > 1e-12).map(|(&a, &q)| a - q).unwrap();
            for (&a, &q) in v.iter().zip(&p) {
                if q > 1e-12 {
                    prop_assert!((a - q - theta).abs() <= 1e-9);
                } else {
                    prop_assert!(a <= theta + 1e-9);
                }
            }
        }
    }

    #[test]
    fn remove_loops_gives_simple_path(raw in prop::collection::vec(0u32..8, 1..30)) {
        let path: Vec<NodeId> = raw.iter().map(|&x| NodeId(x)).collect();
        let out = remove_loops(&path);
        prop_assert_eq!(out.first(), path.first());
        prop_assert_eq!(out.last(), path.last());
        let mut seen = std::collections::HashSet::new();
        prop_assert!(out.iter().all(|n| seen.insert(*n)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn hrh_is_monotone_and_idempotent(d in dims(), zs in prop::collection::vec(zone(), 0..2),
                                      cs in prop::collection::vec((0usize..500, 0usize..500), 1..4),
                                      w_b in 0.0..=1.0f64) {
        let inst = instance(&cs, d, &zs, w_b);
        let start = shortest_paths_routing(&inst).unwrap();
        let f0 = evaluate(&inst, &start).unwrap().f;
        let mut log: Vec<(f64, f64)> = Vec::new();
        let (out, _) = run_hrh_observed(&inst, start, HrhOptions::default(), &mut log).unwrap();
        validate_routing(&inst, &out).unwrap();
        let f1 = evaluate(&inst, &out).unwrap().f;
        prop_assert!(f1 <= f0);
        for &(before, after) in &log {
            prop_assert!(after < before);
        }
        let again = run_hrh(&inst, out.clone()).unwrap();
        prop_assert_eq!(again, out);
    }

    #[test]
    fn dual_never_exceeds_feasible_primal(d in dims(), zs in prop::collection::vec(zone(), 0..2),
                                          cs in prop::collection::vec((0usize..500, 0usize..500), 1..4),
                                          w_b in 0.0..=1.0f64,
                                          noise in prop::collection::vec(-1.0..1.0f64, 64)) {
        let inst = instance(&cs, d, &zs, w_b);
        let g = inst.graph();
        let k = inst.cable_count();
        let mut lambda: Multipliers = initial_lambda(&inst);
        for (i, (e, _, _)) in g.edges().enumerate().take(noise.len() / k.max(1)) {
            let c = g.edge_cost(e);
            let row: Vec<f64> = (0..k).map(|j| lambda.get(e, j, c) + noise[i * k + j] * c).collect();
            lambda.set_row(e, &project_onto_omega(&row, w_b * c).unwrap());
        }
        prop_assert!(lambda.max_violation(&inst) <= 1e-9);
        let h = eval_dual(&inst, &lambda).unwrap().h_value;
        let sp = shortest_paths_routing(&inst).unwrap();
        let f = evaluate(&inst, &run_hrh(&inst, sp.clone()).unwrap()).unwrap().f;
        prop_assert!(h <= f + 1e-9);
        prop_assert!(h <= evaluate(&inst, &sp).unwrap().f + 1e-9);
    }
}
