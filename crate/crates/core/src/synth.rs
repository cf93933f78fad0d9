//! Synthetic instance generators.
//!
//! Benchmark instances place start terminals in one spherical cluster and end
//! terminals in another, the two cluster centres lying on the x axis through
//! the grid centre. Tiny seeded instances are small enough for the exact solver.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_graph, distance, GridSpec, NodeId, Point3, RoutingGraph, Zone};
use crate::model::{Cable, Instance, Weights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub dims: [usize; 3],
    pub cell_size: f64,
    pub cables: usize,
    /// Cluster radius in meters.
    pub cluster_radius: f64,
    /// Distance between the two cluster centres in meters.
    pub separation: f64,
    pub seed: u64,
}

fn nodes_within(graph: &RoutingGraph, centre: Point3, radius: f64) -> Vec<NodeId> {
    graph
        .nodes()
        .filter(|&n| distance(graph.position(n), centre) <= radius)
        .collect()
}

pub fn clustered_instance(cfg: &ClusterConfig, weights: Weights) -> Result<Instance> {
    if cfg.cables == 0 {
        return Err(Error::InvalidParameter("at least one cable is required".into()));
    }
    if !(cfg.cluster_radius >= 0.0 && cfg.separation > 0.0) {
        return Err(Error::InvalidParameter(
            "cluster radius must be nonnegative and separation positive".into(),
        ));
    }
    let spec = GridSpec::new([0.0; 3], [cfg.cell_size; 3], cfg.dims)?;
    let graph = Arc::new(build_graph(&spec, &[])?);
    let b = spec.bounds();
    let centre: Point3 = std::array::from_fn(|i| 0.5 * (b.min[i] + b.max[i]));
    let half = 0.5 * cfg.separation;
    let starts = nodes_within(&graph, [centre[0] - half, centre[1], centre[2]], cfg.cluster_radius);
    let ends = nodes_within(&graph, [centre[0] + half, centre[1], centre[2]], cfg.cluster_radius);
    if starts.is_empty() || ends.is_empty() {
        return Err(Error::InvalidParameter(
            "a cluster contains no grid node; increase the radius or reduce the separation".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cables = Vec::with_capacity(cfg.cables);
    let mut tries = 0;
    while cables.len() < cfg.cables {
        let s = *starts.choose(&mut rng).expect("nonempty");
        let e = *ends.choose(&mut rng).expect("nonempty");
        tries += 1;
        if s != e {
            cables.push(Cable::new(s, e));
        } else if tries > 1000 * cfg.cables {
            return Err(Error::InvalidParameter("clusters coincide".into()));
        }
    }
    Instance::new(graph, cables, weights)
}

/// Grid dimensions for a benchmark with about `nodes` vertices, keeping the
/// aspect ratio of `base`.
pub fn scaled_dims(base: [usize; 3], nodes: usize) -> [usize; 3] {
    let current = (base[0] * base[1] * base[2]) as f64;
    let s = (nodes as f64 / current).cbrt();
    base.map(|d| ((d as f64 * s).round() as usize).max(1))
}

/// Weights at which the tiny suite is evaluated.
pub const TINY_WEIGHTS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

const TINY_DIMS: [[usize; 3]; 10] = [
    [3, 3, 1],
    [4, 3, 1],
    [4, 4, 1],
    [5, 3, 1],
    [5, 4, 1],
    [3, 3, 2],
    [4, 3, 2],
    [5, 5, 1],
    [5, 4, 2],
    [5, 5, 2],
];

/// Seeded tiny instance: starts near x = 0, ends near the far x face, at most
/// three cables (two on the larger grids), optionally one single-node obstacle in the interior.
pub fn tiny_instance(seed: u64, weights: Weights) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = TINY_DIMS[rng.gen_range(0..TINY_DIMS.len())];
    // Three cables across a two-layer 5x4 grid are beyond exhaustive search.
    let k = if dims[0] * dims[1] * dims[2] > 30 { 2 } else { rng.gen_range(2..=3) };
    let mut zones = Vec::new();
    if dims[0] >= 4 && dims[1] >= 3 && rng.gen_bool(0.4) {
        let x = rng.gen_range(1..dims[0] - 1) as f64;
        let y = rng.gen_range(1..dims[1] - 1) as f64;
        zones.push(Zone::obstacle([x - 0.1, y - 0.1, -0.5], [x + 0.1, y + 0.1, 0.1])?);
    }
    let graph = Arc::new(build_graph(&GridSpec::unit(dims)?, &zones)?);
    let side = |x: usize| -> Vec<NodeId> {
        graph
            .nodes()
            .filter(|&n| graph.lattice_coords(n)[0] == x)
            .collect()
    };
    let (left, right) = (side(0), side(dims[0] - 1));
    let cables: Vec<Cable> = (0..k)
        .map(|_| {
            Cable::new(
                *left.choose(&mut rng).expect("nonempty"),
                *right.choose(&mut rng).expect("nonempty"),
            )
        })
        .collect();
    Instance::new(graph, cables, weights)
}

/// The seeded suite of tiny instances used for oracle comparisons.
pub fn tiny_suite(count: usize, seed: u64) -> Result<Vec<Instance>> {
    let w = Weights::from_bundle(0.5)?;
    (0..count as u64)
        .map(|i| tiny_instance(seed.wrapping_mul(1_000_003).wrapping_add(i), w))
        .collect()
}

/// Y-shaped instance on a uniform grid: every cable runs from `root` to one leaf.
pub fn y_instance(dims: [usize; 3], root: [usize; 3], leaves: &[[usize; 3]], w_b: f64) -> Result<Instance> {
    let graph = Arc::new(build_graph(&GridSpec::unit(dims)?, &[])?);
    let at = |c: [usize; 3]| {
        graph
            .node_at(c)
            .ok_or_else(|| Error::InvalidInstance(format!("no node at {c:?}")))
    };
    let r = at(root)?;
    let cables = leaves
        .iter()
        .map(|&l| Ok(Cable::new(r, at(l)?)))
        .collect::<Result<Vec<_>>>()?;
    Instance::new(graph, cables, Weights::from_bundle(w_b)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clustered_terminals_lie_in_their_clusters() {
        let cfg = ClusterConfig {
            dims: [20, 10, 6],
            cell_size: 0.5,
            cables: 12,
            cluster_radius: 1.0,
            separation: 6.0,
            seed: 3,
        };
        let inst = clustered_instance(&cfg, Weights::from_bundle(0.5).unwrap()).unwrap();
        assert_eq!(inst.cable_count(), 12);
        let g = inst.graph();
        let b = g.spec().bounds();
        let cx = 0.5 * (b.min[0] + b.max[0]);
        for c in inst.cables() {
            assert!(g.position(c.start)[0] <= cx - 3.0 + 1.0 + 1e-9);
            assert!(g.position(c.end)[0] >= cx + 3.0 - 1.0 - 1e-9);
        }
        let again = clustered_instance(&cfg, Weights::from_bundle(0.5).unwrap()).unwrap();
        assert_eq!(again.cables(), inst.cables());
    }

    #[test]
    fn empty_cluster_is_an_error() {
        let cfg = ClusterConfig {
            dims: [4, 4, 4],
            cell_size: 1.0,
            cables: 2,
            cluster_radius: 0.1,
            separation: 100.0,
            seed: 0,
        };
        assert!(clustered_instance(&cfg, Weights::from_bundle(0.5).unwrap()).is_err());
    }

    #[test]
    fn scaled_dims_hits_target_size() {
        let d = scaled_dims([44, 28, 17], 80_000);
        let n = (d[0] * d[1] * d[2]) as f64;
        assert!((n / 80_000.0 - 1.0).abs() < 0.1);
        assert_eq!(scaled_dims([44, 28, 17], 20_944), [44, 28, 17]);
    }

    #[test]
    fn tiny_suite_is_small_and_seeded() {
        let suite = tiny_suite(20, 1).unwrap();
        assert_eq!(suite.len(), 20);
        for inst in &suite {
            let d = inst.graph().spec().dims;
            assert!(d[0] <= 5 && d[1] <= 5 && d[2] <= 2);
            assert!(inst.cable_count() <= 3);
        }
        let again = tiny_suite(20, 1).unwrap();
        for (a, b) in suite.iter().zip(&again) {
            assert_eq!(a.cables(), b.cables());
        }
    }
}
