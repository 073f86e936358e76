//! Thread-pool execution of the lattice search, the simulator, DAMEX and
//! benchmark replications. Results never depend on the number of workers.

use std::collections::BTreeMap;
use std::num::NonZeroUsize;
use std::sync::Arc;

use clef_core::damex::{cone_counts, top_cones, ConeMass, DamexConfig};
use clef_core::experiments::{aggregate, run_replication, BenchmarkReport, ExperimentConfig};
use clef_core::sim::{prepare_benchmark, simulate_row, Benchmark, RngStream, StructureGenConfig};
use clef_core::{DataMatrix, Error, Executor, FeatureSet, RankedData};
use rayon::prelude::*;
use rayon::ThreadPool;

/// Environment variable consulted when no worker count is given.
pub const THREADS_ENV: &str = "CLEF_THREADS";

/// `requested`, else `$CLEF_THREADS`, else the available parallelism.
pub fn worker_count(requested: Option<usize>) -> usize {
    requested
        .filter(|&t| t > 0)
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|&t| t > 0))
        .or_else(|| std::thread::available_parallelism().ok().map(NonZeroUsize::get))
        .unwrap_or(1)
}

/// Evaluates lattice candidates on a rayon pool.
#[derive(Clone)]
pub struct ParallelExecutor {
    pool: Arc<ThreadPool>,
    log_levels: bool,
}

impl ParallelExecutor {
    pub fn new(threads: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().expect("thread pool");
        Self { pool: Arc::new(pool), log_levels: false }
    }

    /// Print one line per lattice level to stderr.
    pub fn with_level_log(mut self, on: bool) -> Self {
        self.log_levels = on;
        self
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

impl Executor for ParallelExecutor {
    fn map<T, F>(&self, items: &[FeatureSet], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&FeatureSet) -> T + Sync + Send,
    {
        self.pool.install(|| items.par_iter().map(&f).collect())
    }

    fn level_done(&self, level: usize, candidates: usize, kept: usize) {
        if self.log_levels {
            eprintln!("level {level}: {candidates} candidates, {kept} kept");
        }
    }
}

/// Same output as the sequential simulator; rows are drawn concurrently.
pub fn simulate_benchmark_parallel(
    n: usize,
    cfg: &StructureGenConfig,
    w: f64,
    stream: RngStream,
    executor: &ParallelExecutor,
) -> Result<Benchmark, Error> {
    let (structure, row_seed) = prepare_benchmark(cfg, w, stream)?;
    let rows: Vec<Vec<f64>> =
        executor.install(|| (0..n).into_par_iter().map(|i| simulate_row(&structure, row_seed, i)).collect());
    let values = rows.into_iter().flatten().collect();
    Ok(Benchmark { data: DataMatrix::new(n, cfg.d, values)?, structure, row_seed })
}

/// DAMEX with per-chunk cone counts merged at the end.
pub fn damex_parallel(rd: &RankedData, cfg: &DamexConfig, executor: &ParallelExecutor) -> Result<Vec<ConeMass>, Error> {
    cfg.validate()?;
    let n = rd.n();
    let chunk = n.div_ceil(executor.threads() * 4).max(1024);
    let partials: Vec<BTreeMap<FeatureSet, usize>> = executor.install(|| {
        (0..n.div_ceil(chunk))
            .into_par_iter()
            .map(|c| cone_counts(rd, cfg, c * chunk..((c + 1) * chunk).min(n)))
            .collect()
    });
    let mut total = BTreeMap::new();
    for part in partials {
        for (cone, count) in part {
            *total.entry(cone).or_insert(0) += count;
        }
    }
    Ok(top_cones(total, cfg))
}

/// Replications run concurrently; the report equals the sequential one.
pub fn run_benchmark_parallel(cfg: &ExperimentConfig, executor: &ParallelExecutor) -> Result<BenchmarkReport, Error> {
    cfg.validate()?;
    let replications = executor.install(|| {
        (0..cfg.replications).into_par_iter().map(|r| run_replication(cfg, r, executor)).collect::<Vec<_>>()
    });
    Ok(BenchmarkReport { config: cfg.clone(), k: cfg.k()?.k(), summary: aggregate(cfg, &replications), replications })
}
