//! Scene ingestion, weight sweeps, solution export and scaling benchmarks on
//! top of `harness-core`.

pub mod bench;
pub mod export;
pub mod scene;
pub mod sweep;

/// Version written to and expected in every scene, record and config file.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "HARNESS_THREADS";

/// Thread count from the command line, else the environment, else the
/// machine's available parallelism.
pub fn thread_count(cli: Option<usize>) -> anyhow::Result<usize> {
    if let Some(n) = cli {
        anyhow::ensure!(n > 0, "--threads must be positive");
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
            anyhow::ensure!(n > 0, "{THREADS_ENV} must be positive");
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}
