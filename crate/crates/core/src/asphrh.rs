//! α-shortest-paths harness routing heuristic (α-SPHRH).
//!
//! Initial routings come from sequential penalized insertion of cables against
//! sets of near-shortest paths, one routing per cable order; each is then
//! polished by the HRH.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::EdgeId;
use crate::hrh::{self, FixedPathSet};
use crate::model::{evaluate, path_edges, selection_key, Instance, Path, Routing};
use crate::search::{self, AlphaPathOptions, BaseCosts, Heuristic};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsphrhParams {
    pub alpha: f64,
    pub n_phi: usize,
    pub n_initial: usize,
    pub sequence_seed: u64,
}

impl Default for AsphrhParams {
    fn default() -> Self {
        AsphrhParams {
            alpha: 1.2,
            n_phi: 7,
            n_initial: 5,
            sequence_seed: 0,
        }
    }
}

impl AsphrhParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        if self.n_phi == 0 || self.n_initial == 0 {
            return Err(Error::InvalidParameter("n_phi and n_initial must be positive".into()));
        }
        Ok(())
    }
}

/// α-shortest-path sets for every cable under base costs.
pub fn alpha_sets(instance: &Instance, alpha: f64, n_phi: usize) -> Result<Vec<Vec<Path>>> {
    instance.end_field(0);
    (0..instance.cable_count())
        .into_par_iter()
        .map(|k| {
            let c = instance.cables()[k];
            search::alpha_shortest_paths(
                instance.graph(),
                c.start,
                c.end,
                alpha,
                n_phi,
                &BaseCosts,
                Heuristic::scaled(instance.end_field(k), 1.0),
                AlphaPathOptions::default(),
            )
        })
        .collect()
}

/// Up to `n` distinct cable orders: the identity first, then seeded shuffles.
pub fn cable_sequences(cables: usize, n: usize, seed: u64) -> Vec<Vec<usize>> {
    let permutations = (1..=cables).try_fold(1usize, |acc, k| acc.checked_mul(k));
    let n = permutations.map_or(n, |p| n.min(p));
    let identity: Vec<usize> = (0..cables).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::with_capacity(n);
    seen.insert(identity.clone());
    out.push(identity.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < n {
        let mut s = identity.clone();
        s.shuffle(&mut rng);
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}

/// Builds one routing by rerouting cables in `sequence` order against the
/// union of every other cable's current path set.
pub fn construct_initial(
    instance: &Instance,
    phi_sets: &[Vec<Path>],
    sequence: &[usize],
) -> Result<Routing> {
    let graph = instance.graph();
    if phi_sets.len() != instance.cable_count() || phi_sets.iter().any(|s| s.is_empty()) {
        return Err(Error::Precondition("one nonempty path set per cable is required".into()));
    }
    let mut sets: Vec<Vec<Vec<EdgeId>>> = phi_sets
        .iter()
        .map(|s| s.iter().map(|p| path_edges(graph, p)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let mut fixed = FixedPathSet::new(graph.edge_count());
    for set in &sets {
        for p in set {
            fixed.add(p);
        }
    }
    let mut chosen: Vec<Option<Path>> = vec![None; instance.cable_count()];
    for &k in sequence {
        for p in &sets[k] {
            fixed.remove(p);
        }
        let path = hrh::penalized_route(instance, k, &fixed)?;
        let edges = path_edges(graph, &path)?;
        fixed.add(&edges);
        sets[k] = vec![edges];
        chosen[k] = Some(path);
    }
    let paths = chosen
        .into_iter()
        .enumerate()
        .map(|(k, p)| p.ok_or_else(|| Error::Precondition(format!("cable {k} missing from sequence"))))
        .collect::<Result<_>>()?;
    Ok(Routing::new(paths))
}

#[derive(Debug, Clone)]
pub struct AsphrhResult {
    pub best_routing: Routing,
    pub f_best: f64,
    /// HRH outputs with distinct edge selections.
    pub candidates: Vec<Routing>,
    pub initial_routings: Vec<Routing>,
}

pub fn run_asphrh(instance: &Instance, params: &AsphrhParams) -> Result<AsphrhResult> {
    params.validate()?;
    let sets = alpha_sets(instance, params.alpha, params.n_phi)?;
    let sequences = cable_sequences(instance.cable_count(), params.n_initial, params.sequence_seed);
    let initial_routings = sequences
        .iter()
        .map(|s| construct_initial(instance, &sets, s))
        .collect::<Result<Vec<_>>>()?;
    let polished = initial_routings
        .par_iter()
        .map(|r| {
            let out = hrh::run_hrh(instance, r.clone())?;
            let f = evaluate(instance, &out)?.f;
            Ok((out, f))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut seen = HashSet::new();
    let mut candidates = Vec::new();
    let mut best: Option<(Routing, f64)> = None;
    for (r, f) in polished {
        if best.as_ref().map_or(true, |(_, fb)| f < *fb) {
            best = Some((r.clone(), f));
        }
        if seen.insert(selection_key(instance, &r)?) {
            candidates.push(r);
        }
    }
    let (best_routing, f_best) = best.expect("at least one sequence");
    Ok(AsphrhResult {
        best_routing,
        f_best,
        candidates,
        initial_routings,
    })
}
