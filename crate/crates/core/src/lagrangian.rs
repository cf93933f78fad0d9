//! Lagrangian dual bound and the subgradient harness routing heuristic (SHRH).
//!
//! Relaxing the coupling between cable paths and edge selection leaves one
//! shortest-path problem per cable under costs `w_L c_e + λ_e^k`, where each
//! edge's multipliers lie on the scaled simplex `Σ_k λ_e^k = w_B c_e`.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::EdgeId;
use crate::hrh::{self, HrhOptions};
use crate::model::{duality_gap, evaluate, path_edges, selection_key, Instance, Path, Routing};
use crate::search::{self, Heuristic};

const UNIFORM: u32 = u32::MAX;

/// Multipliers `λ_e^k`. Rows that never left the uniform split are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    cables: usize,
    w_b: f64,
    slot: Vec<u32>,
    values: Vec<f64>,
}

impl Multipliers {
    /// Uniform split `λ_e^k = w_B c_e / |K|`.
    pub fn uniform(instance: &Instance) -> Self {
        Multipliers {
            cables: instance.cable_count(),
            w_b: instance.weights().w_b,
            slot: vec![UNIFORM; instance.graph().edge_count()],
            values: Vec::new(),
        }
    }

    #[inline]
    fn uniform_value(&self, base: f64) -> f64 {
        self.w_b * base / self.cables as f64
    }

    #[inline]
    pub fn get(&self, edge: EdgeId, cable: usize, base: f64) -> f64 {
        match self.slot[edge.index()] {
            UNIFORM => self.uniform_value(base),
            s => self.values[s as usize * self.cables + cable],
        }
    }

    /// The multiplier row of one edge.
    pub fn row(&self, edge: EdgeId, base: f64) -> Vec<f64> {
        match self.slot[edge.index()] {
            UNIFORM => vec![self.uniform_value(base); self.cables],
            s => {
                let s = s as usize * self.cables;
                self.values[s..s + self.cables].to_vec()
            }
        }
    }

    pub fn set_row(&mut self, edge: EdgeId, row: &[f64]) {
        assert_eq!(row.len(), self.cables);
        let s = match self.slot[edge.index()] {
            UNIFORM => {
                let s = self.values.len() / self.cables;
                self.values.extend_from_slice(row);
                self.slot[edge.index()] = s as u32;
                return;
            }
            s => s as usize * self.cables,
        };
        self.values[s..s + self.cables].copy_from_slice(row);
    }

    /// Number of edges with explicitly stored rows.
    pub fn explicit_rows(&self) -> usize {
        self.values.len() / self.cables.max(1)
    }

    /// Largest violation of nonnegativity or of the per-edge budget.
    pub fn max_violation(&self, instance: &Instance) -> f64 {
        let g = instance.graph();
        let mut worst: f64 = 0.0;
        for (e, _, _) in g.edges() {
            if self.slot[e.index()] == UNIFORM {
                continue;
            }
            let row = self.row(e, g.edge_cost(e));
            let budget = self.w_b * g.edge_cost(e);
            let sum: f64 = row.iter().sum();
            worst = worst.max((sum - budget).abs());
            for &v in &row {
                worst = worst.max(-v);
            }
        }
        worst
    }
}

/// Initial multipliers `λ_e^k = w_B c_e / |K|`.
pub fn initial_lambda(instance: &Instance) -> Multipliers {
    Multipliers::uniform(instance)
}

/// Dual value and a subgradient at some multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientInfo {
    /// Edges of each cable's minimizing path: the (e, k) pairs where `ξ = 1`.
    pub xi: Vec<Vec<EdgeId>>,
    pub h_value: f64,
    pub subproblem_routing: Routing,
}

impl SubgradientInfo {
    pub fn norm_sq(&self) -> f64 {
        self.xi.iter().map(|p| p.len()).sum::<usize>() as f64
    }
}

/// Evaluates the dual function: one shortest path per cable under
/// `w_L c_e + λ_e^k`.
pub fn eval_dual(instance: &Instance, lambda: &Multipliers) -> Result<SubgradientInfo> {
    let graph = instance.graph();
    let w_l = instance.weights().w_l;
    // Warm the shared heuristic cache before fanning out.
    instance.end_field(0);
    let results: Vec<(Vec<crate::grid::NodeId>, f64)> = (0..instance.cable_count())
        .into_par_iter()
        .map(|k| {
            let c = instance.cables()[k];
            let costs = |e: EdgeId, base: f64| w_l * base + lambda.get(e, k, base);
            let heuristic = Heuristic::scaled(instance.end_field(k), w_l);
            search::astar(graph, c.start, c.end, heuristic, &costs).map(|p| (p.nodes, p.cost))
        })
        .collect::<Result<_>>()?;
    let mut xi = Vec::with_capacity(results.len());
    let mut paths = Vec::with_capacity(results.len());
    let mut h_value = 0.0;
    for (path, cost) in results {
        xi.push(path_edges(graph, &path)?);
        paths.push(path);
        h_value += cost;
    }
    Ok(SubgradientInfo {
        xi,
        h_value,
        subproblem_routing: Routing::new(paths),
    })
}

/// Euclidean projection onto `{v ≥ 0, Σ v = budget}`.
pub fn project_onto_omega(lambda_e: &[f64], budget: f64) -> Result<Vec<f64>> {
    if budget < 0.0 {
        return Err(Error::NegativeBudget(budget));
    }
    if lambda_e.is_empty() {
        return Ok(Vec::new());
    }
    if budget == 0.0 {
        return Ok(vec![0.0; lambda_e.len()]);
    }
    let sum: f64 = lambda_e.iter().sum();
    if lambda_e.iter().all(|&v| v >= 0.0) && (sum - budget).abs() <= 1e-12 * budget.max(1.0) {
        return Ok(lambda_e.to_vec());
    }
    let mut sorted = lambda_e.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        prefix += u;
        let t = (prefix - budget) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    let mut out: Vec<f64> = lambda_e.iter().map(|&v| (v - theta).max(0.0)).collect();
    let total: f64 = out.iter().sum();
    if total > 0.0 {
        let scale = budget / total;
        out.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(out)
}

/// Step length `δ (ĥ − h) / ‖ξ‖²`, floored at zero.
pub fn step_length(delta: f64, h_hat: f64, h: f64, xi_norm_sq: f64) -> f64 {
    if xi_norm_sq <= 0.0 {
        return 0.0;
    }
    let diff = h_hat - h;
    if diff < 0.0 {
        log::warn!("dual value {h} exceeds primal bound {h_hat}; weak duality violated");
        return 0.0;
    }
    delta * diff / xi_norm_sq
}

/// Moves `λ` along `ξ` by `eta` and projects every touched edge back onto its simplex.
pub fn subgradient_update(
    instance: &Instance,
    lambda: &mut Multipliers,
    info: &SubgradientInfo,
    eta: f64,
) -> Result<()> {
    if eta == 0.0 {
        return Ok(());
    }
    let graph = instance.graph();
    let mut touched: Vec<EdgeId> = info.xi.iter().flatten().copied().collect();
    touched.sort_unstable();
    touched.dedup();
    for e in touched {
        let base = graph.edge_cost(e);
        let mut row = lambda.row(e, base);
        for (k, edges) in info.xi.iter().enumerate() {
            if edges.contains(&e) {
                row[k] += eta;
            }
        }
        let projected = project_onto_omega(&row, lambda.w_b * base)?;
        lambda.set_row(e, &projected);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShrhParams {
    pub i_hrh: usize,
    pub i_stag: usize,
    pub epsilon: f64,
    pub delta0: f64,
    pub delta_decay: f64,
    pub decay_patience: usize,
    pub max_iterations: usize,
}

impl Default for ShrhParams {
    fn default() -> Self {
        ShrhParams {
            i_hrh: 25,
            i_stag: 100,
            epsilon: 1e-4,
            delta0: 1.5,
            delta_decay: 0.8,
            decay_patience: 10,
            max_iterations: 10_000,
        }
    }
}

impl ShrhParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.i_hrh == 0 || self.i_stag == 0 || self.decay_patience == 0 || self.max_iterations == 0 {
            return bad("i_hrh, i_stag, decay_patience and max_iterations must be positive");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.delta0 > 0.0 && self.delta0 <= 2.0) {
            return bad("delta0 must lie in (0, 2]");
        }
        if !(self.delta_decay > 0.0 && self.delta_decay <= 1.0) {
            return bad("delta_decay must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Stagnation,
    GapClosed,
    ZeroSubgradient,
    IterationCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub h: f64,
    pub h_best: f64,
    pub f_best: f64,
    pub gap: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ShrhResult {
    pub best_routing: Routing,
    pub f_best: f64,
    pub h_best: f64,
    /// HRH outputs with distinct edge selections, in discovery order.
    pub candidates: Vec<Routing>,
    pub history: Vec<IterationRecord>,
    pub termination: Termination,
    pub hrh_runs: usize,
}

impl ShrhResult {
    pub fn gap(&self) -> Option<f64> {
        duality_gap(self.f_best, self.h_best).ok()
    }
}

/// Projected subgradient ascent on the dual, polishing subproblem routings
/// with the HRH every `i_hrh` iterations.
pub fn run_shrh(instance: &Instance, params: &ShrhParams) -> Result<ShrhResult> {
    params.validate()?;
    let mut lambda = initial_lambda(instance);
    let mut best_routing = hrh::shortest_paths_routing(instance)?;
    let mut f_best = evaluate(instance, &best_routing)?.f;
    let mut h_best = f64::NEG_INFINITY;
    let mut delta = params.delta0;
    let mut since_improvement = 0usize;
    let mut h_values: Vec<f64> = Vec::new();
    let mut history = Vec::new();
    let mut candidates = Vec::new();
    let mut seen: HashSet<Vec<EdgeId>> = HashSet::new();
    let mut hrh_runs = 0;
    let mut polished_cache: HashMap<Vec<Path>, Routing> = HashMap::new();
    let mut i = 0usize;
    let termination = loop {
        let info = eval_dual(instance, &lambda)?;
        let h = info.h_value;
        h_values.push(h);
        if h > h_best {
            h_best = h;
            since_improvement = 0;
        } else {
            since_improvement += 1;
            if since_improvement >= params.decay_patience {
                delta *= params.delta_decay;
                since_improvement = 0;
            }
        }
        if i % params.i_hrh == 0 {
            // The HRH is deterministic, so a repeated subproblem routing needs no rerun.
            let polished = match polished_cache.get(&info.subproblem_routing.paths) {
                Some(r) => r.clone(),
                None => {
                    let r = hrh::run_hrh_observed(
                        instance,
                        info.subproblem_routing.clone(),
                        HrhOptions::default(),
                        &mut (),
                    )?
                    .0;
                    hrh_runs += 1;
                    polished_cache.insert(info.subproblem_routing.paths.clone(), r.clone());
                    r
                }
            };
            let f = evaluate(instance, &polished)?.f;
            if seen.insert(selection_key(instance, &polished)?) {
                candidates.push(polished.clone());
            }
            if f < f_best {
                f_best = f;
                best_routing = polished;
            }
        }
        if h > f_best + 1e-9 * f_best.abs().max(1.0) {
            log::warn!("iteration {i}: dual value {h} above primal value {f_best}");
        }
        history.push(IterationRecord {
            iteration: i,
            h,
            h_best,
            f_best,
            gap: duality_gap(f_best, h_best).ok(),
        });

        if f_best - h_best <= 1e-12 * f_best.abs() {
            break Termination::GapClosed;
        }
        if i >= params.i_stag {
            let old = h_values[i - params.i_stag];
            let progress = if old > 0.0 {
                (h_best - old) / old
            } else {
                h_best - old
            };
            if progress < params.epsilon {
                break Termination::Stagnation;
            }
        }
        if i + 1 >= params.max_iterations {
            break Termination::IterationCap;
        }
        let norm_sq = info.norm_sq();
        if norm_sq == 0.0 {
            break Termination::ZeroSubgradient;
        }
        let eta = step_length(delta, f_best, h, norm_sq);
        subgradient_update(instance, &mut lambda, &info, eta)?;
        i += 1;
    };
    log::debug!(
        "shrh finished after {} iterations ({termination:?}), f = {f_best}, h = {h_best}",
        i + 1
    );
    Ok(ShrhResult {
        best_routing,
        f_best,
        h_best,
        candidates,
        history,
        termination,
        hrh_runs,
    })
}
