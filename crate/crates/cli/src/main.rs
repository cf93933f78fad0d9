use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use harness_cli::bench::{read_config, run_benchmark, write_report};
use harness_cli::export::export;
use harness_cli::scene::{load_scene, BundleWeight};
use harness_cli::sweep::{pareto_sweep, Algorithm, SolverParams};
use harness_cli::thread_count;

#[derive(Parser)]
#[command(name = "harness", version, about = "Cable harness topology optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scene for one or more bundle weights.
    Solve {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, value_enum)]
        algo: Algorithm,
        /// Comma-separated bundle weights; defaults to the scene's list.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scene's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Time solvers on clustered synthetic instances.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check that a scene parses and builds.
    Validate {
        #[arg(long)]
        scene: PathBuf,
    },
}

fn init_threads(threads: Option<usize>) -> anyhow::Result<()> {
    let n = thread_count(threads)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("cannot configure the thread pool")
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Solve {
            scene,
            algo,
            weights,
            out,
            seed,
            threads,
        } => {
            init_threads(threads)?;
            let (file, instance) = load_scene(&scene)?;
            let weights = match weights {
                Some(ws) => {
                    for (i, &w) in ws.iter().enumerate() {
                        anyhow::ensure!((0.0..=1.0).contains(&w), "--weights[{i}]: {w} is outside [0, 1]");
                    }
                    ws
                }
                None => file.weights.iter().map(|w: &BundleWeight| w.0).collect(),
            };
            let seed = seed.unwrap_or(file.seed);
            let mut asphrh = file.asphrh;
            asphrh.sequence_seed = seed;
            let params = SolverParams {
                shrh: file.shrh,
                asphrh,
                pso: file.pso.params(seed),
                exact: file.exact,
                min_lengths: file.min_lengths,
            };
            let outcome = pareto_sweep(&instance, &weights, &[algo], &params)?;
            let files = export(&outcome.records, &out)?;
            println!("wrote {} files to {}", files.len(), out.display());
            for f in &outcome.failures {
                eprintln!("w_B = {}: {}", f.weight, f.error);
            }
            Ok(outcome.failures.is_empty())
        }
        Command::Bench { config, out, threads } => {
            init_threads(threads)?;
            let cfg = read_config(&config)?;
            let report = run_benchmark(&cfg, &SolverParams::default())?;
            write_report(&report, &out)?;
            for s in &report.slopes {
                println!("{} {}: log-log slope {:.3} over {} points", s.series, s.algo.name(), s.slope, s.points);
            }
            Ok(report.rows.iter().all(|r| r.error.is_none()))
        }
        Command::Validate { scene } => {
            let (_, instance) = load_scene(&scene)?;
            let g = instance.graph();
            println!(
                "ok: {} nodes, {} edges, {} cables",
                g.node_count(),
                g.edge_count(),
                instance.cable_count()
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
