//! Solver runs over a set of bundle weights and the records they produce.

use std::collections::HashSet;
use std::time::Instant;

use anyhow::{bail, ensure, Context};
use harness_core::asphrh::{run_asphrh, AsphrhParams};
use harness_core::exact::{solve_exact, ExactLimits, Proof};
use harness_core::grid::{NodeId, Point3};
use harness_core::lagrangian::{run_shrh, ShrhParams};
use harness_core::model::{
    derive_topology, duality_gap, evaluate, selection_key, Instance, Routing, Weights,
};
use harness_core::postprocess::{enforce_min_lengths, LengthRules};
use harness_core::pso::{pso_solve, PsoParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Shrh,
    Asphrh,
    Pso,
    Exact,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Shrh => "shrh",
            Algorithm::Asphrh => "asphrh",
            Algorithm::Pso => "pso",
            Algorithm::Exact => "exact",
        }
    }

    /// Whether repeated runs give identical routings regardless of seed.
    pub fn is_deterministic(self) -> bool {
        !matches!(self, Algorithm::Pso)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolverParams {
    pub shrh: ShrhParams,
    pub asphrh: AsphrhParams,
    pub pso: PsoParams,
    pub exact: ExactLimits,
    pub min_lengths: Option<LengthRules>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSummary {
    pub from: Point3,
    pub to: Point3,
    pub length: f64,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySummary {
    pub branch_points: Vec<Point3>,
    pub segments: Vec<SegmentSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub schema_version: u32,
    pub weight: f64,
    pub algo: Algorithm,
    /// 0 for the best routing found at this weight.
    pub rank: usize,
    /// Node ids along each cable path.
    pub routing: Vec<Vec<u32>>,
    pub topology: TopologySummary,
    pub f: f64,
    pub f_l: f64,
    pub f_b: f64,
    /// Best dual bound (SHRH only).
    pub h: Option<f64>,
    pub gap: Option<f64>,
    pub time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_proof: Option<Proof>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_lengths_satisfied: Option<bool>,
}

impl SolutionRecord {
    pub fn routing(&self) -> Routing {
        Routing::new(
            self.routing
                .iter()
                .map(|p| p.iter().map(|&n| NodeId(n)).collect())
                .collect(),
        )
    }

    /// Self-consistency of the stored objective values.
    pub fn check_objective(&self) -> anyhow::Result<()> {
        let w = Weights::from_bundle(self.weight)?;
        let f = w.w_l * self.f_l + w.w_b * self.f_b;
        ensure!(
            (f - self.f).abs() <= 1e-9 * self.f.abs().max(1.0),
            "stored f = {} but w_L f_L + w_B f_B = {f}",
            self.f
        );
        Ok(())
    }
}

/// Re-checks a record against its instance: routing feasibility, objective
/// values and the bound.
pub fn revalidate(instance: &Instance, record: &SolutionRecord) -> anyhow::Result<()> {
    record.check_objective()?;
    let inst = instance.with_weights(Weights::from_bundle(record.weight)?);
    let obj = evaluate(&inst, &record.routing()).context("routing is infeasible")?;
    let tol = 1e-9 * obj.f.abs().max(1.0);
    ensure!((obj.f - record.f).abs() <= tol, "recomputed f = {} differs from {}", obj.f, record.f);
    ensure!((obj.f_l - record.f_l).abs() <= tol, "recomputed f_L differs");
    ensure!((obj.f_b - record.f_b).abs() <= tol, "recomputed f_B differs");
    if let Some(h) = record.h {
        ensure!(h <= record.f + tol, "bound {h} exceeds f = {}", record.f);
    }
    Ok(())
}

fn summarize(instance: &Instance, routing: &Routing) -> anyhow::Result<TopologySummary> {
    let g = instance.graph();
    let topo = derive_topology(instance, routing)?;
    Ok(TopologySummary {
        branch_points: topo
            .branch_points
            .iter()
            .filter(|&&b| !topo.is_terminal(b))
            .map(|&b| g.position(b))
            .collect(),
        segments: topo
            .bundle_segments
            .iter()
            .map(|s| SegmentSummary {
                from: g.position(s.first()),
                to: g.position(s.last()),
                length: s.length(g),
                multiplicity: s.multiplicity,
            })
            .collect(),
    })
}

struct Run {
    routings: Vec<Routing>,
    h: Option<f64>,
    proof: Option<Proof>,
}

fn run_solver(instance: &Instance, algo: Algorithm, params: &SolverParams) -> anyhow::Result<Run> {
    Ok(match algo {
        Algorithm::Shrh => {
            let r = run_shrh(instance, &params.shrh)?;
            let mut routings = vec![r.best_routing];
            routings.extend(r.candidates);
            Run {
                routings,
                h: Some(r.h_best),
                proof: None,
            }
        }
        Algorithm::Asphrh => {
            let r = run_asphrh(instance, &params.asphrh)?;
            let mut routings = vec![r.best_routing];
            routings.extend(r.candidates);
            Run {
                routings,
                h: None,
                proof: None,
            }
        }
        Algorithm::Pso => {
            let r = pso_solve(instance, &params.pso)?;
            let Some(best) = r.best_routing else {
                bail!("no particle decoded to a feasible routing");
            };
            Run {
                routings: vec![best],
                h: None,
                proof: None,
            }
        }
        Algorithm::Exact => {
            let r = solve_exact(instance, &params.exact)?;
            Run {
                routings: vec![r.routing],
                h: None,
                proof: Some(r.proof),
            }
        }
    })
}

/// Runs one solver at one weight; returns its distinct candidate routings as
/// records ordered by `f`.
pub fn solve_weight(
    instance: &Instance,
    w_b: f64,
    algo: Algorithm,
    params: &SolverParams,
) -> anyhow::Result<Vec<SolutionRecord>> {
    let inst = instance.with_weights(Weights::from_bundle(w_b)?);
    let start = Instant::now();
    let run = run_solver(&inst, algo, params)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for routing in run.routings {
        if !seen.insert(selection_key(&inst, &routing)?) {
            continue;
        }
        let (routing, satisfied) = match &params.min_lengths {
            Some(rules) => {
                let r = enforce_min_lengths(&inst, &routing, rules)?;
                (r.routing, Some(r.satisfied))
            }
            None => (routing, None),
        };
        out.push((routing, satisfied));
    }
    let time_s = start.elapsed().as_secs_f64();
    let mut records = out
        .into_iter()
        .map(|(routing, satisfied)| {
            let obj = evaluate(&inst, &routing)?;
            Ok(SolutionRecord {
                schema_version: SCHEMA_VERSION,
                weight: w_b,
                algo,
                rank: 0,
                routing: routing.paths.iter().map(|p| p.iter().map(|n| n.0).collect()).collect(),
                topology: summarize(&inst, &routing)?,
                f: obj.f,
                f_l: obj.f_l,
                f_b: obj.f_b,
                h: run.h,
                gap: run.h.and_then(|h| duality_gap(obj.f, h).ok()),
                time_s,
                exact_proof: run.proof,
                min_lengths_satisfied: satisfied,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.f.total_cmp(&b.f).then_with(|| a.routing.cmp(&b.routing)));
    for (i, r) in records.iter_mut().enumerate() {
        r.rank = i;
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub weight: f64,
    pub algo: Algorithm,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    pub records: Vec<SolutionRecord>,
    pub failures: Vec<SweepFailure>,
}

/// Runs every (weight, algorithm) job concurrently. Failed jobs are reported
/// and the rest continue. Records are sorted by weight, algorithm and `f`.
pub fn pareto_sweep(
    instance: &Instance,
    weights: &[f64],
    algos: &[Algorithm],
    params: &SolverParams,
) -> anyhow::Result<SweepOutcome> {
    ensure!(!weights.is_empty(), "at least one weight is required");
    for &w in weights {
        Weights::from_bundle(w)?;
    }
    let jobs: Vec<(f64, Algorithm)> = weights
        .iter()
        .flat_map(|&w| algos.iter().map(move |&a| (w, a)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(w, a)| (w, a, solve_weight(instance, w, a, params)))
        .collect();
    let mut outcome = SweepOutcome::default();
    for (weight, algo, r) in results {
        match r {
            Ok(recs) => outcome.records.extend(recs),
            Err(e) => {
                log::error!("{} at w_B = {weight} failed: {e:#}", algo.name());
                outcome.failures.push(SweepFailure {
                    weight,
                    algo,
                    error: format!("{e:#}"),
                })
            }
        }
    }
    outcome.records.sort_by(|a, b| {
        a.weight
            .total_cmp(&b.weight)
            .then(a.algo.cmp(&b.algo))
            .then(a.f.total_cmp(&b.f))
            .then(a.rank.cmp(&b.rank))
    });
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use harness_core::synth::y_instance;

    fn y() -> Instance {
        y_instance([6, 5, 1], [0, 2, 0], &[[5, 0, 0], [5, 4, 0]], 0.5).unwrap()
    }

    #[test]
    fn records_revalidate() {
        let inst = y();
        for algo in [Algorithm::Shrh, Algorithm::Asphrh, Algorithm::Pso, Algorithm::Exact] {
            let recs = solve_weight(&inst, 0.6, algo, &SolverParams::default()).unwrap();
            assert!(!recs.is_empty());
            assert!(recs.windows(2).all(|w| w[0].f <= w[1].f));
            for (i, r) in recs.iter().enumerate() {
                assert_eq!(r.rank, i);
                revalidate(&inst, r).unwrap();
            }
            assert_eq!(recs[0].h.is_some(), algo == Algorithm::Shrh);
        }
    }

    #[test]
    fn zero_weight_has_zero_gap() {
        let out = pareto_sweep(&y(), &[0.0], &[Algorithm::Shrh], &SolverParams::default()).unwrap();
        assert!(out.failures.is_empty());
        for r in &out.records {
            assert!(r.gap.unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn tampered_record_fails_revalidation() {
        let inst = y();
        let mut r = solve_weight(&inst, 0.5, Algorithm::Asphrh, &SolverParams::default()).unwrap()[0].clone();
        r.f += 1e-3;
        assert!(revalidate(&inst, &r).is_err());
        let mut r2 = solve_weight(&inst, 0.5, Algorithm::Asphrh, &SolverParams::default()).unwrap()[0].clone();
        r2.routing[0].pop();
        assert!(revalidate(&inst, &r2).is_err());
    }

    #[test]
    fn sweep_orders_records_and_reports_failures() {
        let inst = y();
        let params = SolverParams {
            exact: ExactLimits {
                max_paths_per_cable: 0,
                ..Default::default()
            },
            ..Default::default()
        };
        let out = pareto_sweep(&inst, &[0.7, 0.2], &[Algorithm::Asphrh, Algorithm::Exact], &params).unwrap();
        assert!(out.records.windows(2).all(|w| w[0].weight <= w[1].weight));
        assert!(out.records.iter().any(|r| r.algo == Algorithm::Asphrh));
        // Exact either proves truncation or fails; it must not abort the sweep.
        for r in out.records.iter().filter(|r| r.algo == Algorithm::Exact) {
            assert!(r.exact_proof.is_some());
        }
        assert!(pareto_sweep(&inst, &[], &[Algorithm::Shrh], &params).is_err());
        assert!(pareto_sweep(&inst, &[1.2], &[Algorithm::Shrh], &params).is_err());
    }
}
