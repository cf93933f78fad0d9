//! Scaling benchmark on clustered synthetic instances.
//!
//! Two series are supported: a cable-count series at a fixed node count and a
//! node-count series at a fixed cable count. The physical scene size stays
//! fixed, so a larger node count means a finer grid.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{ensure, Context};
use harness_core::model::Weights;
use harness_core::synth::{clustered_instance, scaled_dims, ClusterConfig};
use serde::{Deserialize, Serialize};

use crate::export::sig9;
use crate::sweep::{pareto_sweep, Algorithm, SolverParams};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CableSeries {
    pub nodes: usize,
    pub cables: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSeries {
    pub cables: usize,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub schema_version: u32,
    /// Grid shape whose aspect ratio every generated grid keeps.
    pub base_dims: [usize; 3],
    /// Cell size in meters at `base_dims`.
    pub base_cell_size: f64,
    /// Radius of each terminal cluster in meters.
    pub cluster_radius: f64,
    /// Distance between the start and end cluster centres in meters.
    pub separation: f64,
    pub algorithms: Vec<Algorithm>,
    pub seeds: Vec<u64>,
    /// Bundle weights per run, spread uniformly over (0, 1).
    #[serde(default = "one")]
    pub n_weights: usize,
    #[serde(default)]
    pub cable_series: Option<CableSeries>,
    #[serde(default)]
    pub node_series: Option<NodeSeries>,
}

fn one() -> usize {
    1
}

impl BenchConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        ensure!(self.schema_version == SCHEMA_VERSION, "unsupported schema_version {}", self.schema_version);
        ensure!(!self.algorithms.is_empty(), "algorithms must not be empty");
        ensure!(!self.seeds.is_empty(), "seeds must not be empty");
        ensure!(self.n_weights > 0, "n_weights must be positive");
        ensure!(self.base_cell_size > 0.0, "base_cell_size must be positive");
        ensure!(
            self.cable_series.is_some() || self.node_series.is_some(),
            "at least one of cable_series and node_series is required"
        );
        Ok(())
    }
}

pub fn read_config(path: &Path) -> anyhow::Result<BenchConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let cfg: BenchConfig =
        serde_path_to_error::deserialize(de).map_err(|e| anyhow::anyhow!("{}: {}", e.path(), e.inner()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// `n` weights at the midpoints of `n` equal slices of (0, 1).
pub fn uniform_weights(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub series: String,
    pub cables: usize,
    pub nodes: usize,
    pub n_weights: usize,
    pub algo: Algorithm,
    pub seed: u64,
    pub seconds: f64,
    pub f_best: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub series: String,
    pub algo: Algorithm,
    pub slope: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub slopes: Vec<Slope>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn run_point(
    cfg: &BenchConfig,
    series: &str,
    cables: usize,
    nodes: usize,
    params: &SolverParams,
    rows: &mut Vec<BenchRow>,
) {
    let dims = scaled_dims(cfg.base_dims, nodes);
    let cell_size = cfg.base_cell_size * cfg.base_dims[0] as f64 / dims[0] as f64;
    let weights = uniform_weights(cfg.n_weights);
    for &seed in &cfg.seeds {
        let cluster = ClusterConfig {
            dims,
            cell_size,
            cables,
            cluster_radius: cfg.cluster_radius,
            separation: cfg.separation,
            seed,
        };
        let instance = Weights::from_bundle(weights[0])
            .map_err(anyhow::Error::from)
            .and_then(|w| clustered_instance(&cluster, w).map_err(anyhow::Error::from));
        for &algo in &cfg.algorithms {
            let mut row = BenchRow {
                series: series.to_string(),
                cables,
                nodes: dims.iter().product(),
                n_weights: cfg.n_weights,
                algo,
                seed,
                seconds: f64::NAN,
                f_best: None,
                error: None,
            };
            match &instance {
                Err(e) => row.error = Some(format!("{e:#}")),
                Ok(inst) => {
                    let mut p = params.clone();
                    p.pso.rng_seed = seed;
                    p.asphrh.sequence_seed = seed;
                    let start = Instant::now();
                    let out = pareto_sweep(inst, &weights, &[algo], &p);
                    row.seconds = start.elapsed().as_secs_f64();
                    match out {
                        Ok(o) if o.failures.is_empty() => {
                            row.f_best = o.records.iter().filter(|r| r.rank == 0).map(|r| r.f).reduce(f64::min);
                        }
                        Ok(o) => row.error = Some(o.failures[0].error.clone()),
                        Err(e) => row.error = Some(format!("{e:#}")),
                    }
                }
            }
            log::info!(
                "{series}: |K| = {cables}, |V| = {}, {} took {:.3} s",
                row.nodes,
                algo.name(),
                row.seconds
            );
            rows.push(row);
        }
    }
}

fn slopes_for(rows: &[BenchRow], series: &str, x_of: impl Fn(&BenchRow) -> usize, algos: &[Algorithm]) -> Vec<Slope> {
    algos
        .iter()
        .filter_map(|&algo| {
            let mut xs: Vec<usize> = rows
                .iter()
                .filter(|r| r.series == series && r.algo == algo)
                .map(&x_of)
                .collect();
            xs.sort_unstable();
            xs.dedup();
            // Mean time per x over seeds; failed rows are left out.
            let points: Vec<(f64, f64)> = xs
                .iter()
                .filter_map(|&x| {
                    let t: Vec<f64> = rows
                        .iter()
                        .filter(|r| r.series == series && r.algo == algo && x_of(r) == x && r.error.is_none())
                        .map(|r| r.seconds)
                        .collect();
                    (!t.is_empty()).then(|| (x as f64, t.iter().sum::<f64>() / t.len() as f64))
                })
                .collect();
            loglog_slope(&points).map(|slope| Slope {
                series: series.to_string(),
                algo,
                slope,
                points: points.len(),
            })
        })
        .collect()
}

pub fn run_benchmark(cfg: &BenchConfig, params: &SolverParams) -> anyhow::Result<BenchReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    if let Some(s) = &cfg.cable_series {
        for &k in &s.cables {
            run_point(cfg, "cables", k, s.nodes, params, &mut rows);
        }
    }
    if let Some(s) = &cfg.node_series {
        for &n in &s.nodes {
            run_point(cfg, "nodes", s.cables, n, params, &mut rows);
        }
    }
    let mut slopes = slopes_for(&rows, "cables", |r| r.cables, &cfg.algorithms);
    slopes.extend(slopes_for(&rows, "nodes", |r| r.nodes, &cfg.algorithms));
    Ok(BenchReport { rows, slopes })
}

pub const BENCH_FILE: &str = "bench.csv";
pub const SLOPES_FILE: &str = "slopes.csv";

pub fn write_report(report: &BenchReport, dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut w = csv::Writer::from_path(dir.join(BENCH_FILE))?;
    w.write_record(["series", "cables", "nodes", "n_weights", "algo", "seed", "seconds", "f_best", "error"])?;
    for r in &report.rows {
        w.write_record([
            r.series.clone(),
            r.cables.to_string(),
            r.nodes.to_string(),
            r.n_weights.to_string(),
            r.algo.name().to_string(),
            r.seed.to_string(),
            sig9(r.seconds),
            r.f_best.map(sig9).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join(SLOPES_FILE))?;
    w.write_record(["series", "algo", "slope", "points"])?;
    for s in &report.slopes {
        w.write_record([s.series.clone(), s.algo.name().to_string(), sig9(s.slope), s.points.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
