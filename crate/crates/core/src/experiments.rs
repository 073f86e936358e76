//! Scoring discovered groups against the ground truth, and replicated
//! benchmark runs.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::clef::{run_clef, Executor};
use crate::damex::{damex_run, DamexConfig};
use crate::data::{compute_ranks, TailParams, TiePolicy};
use crate::estimators::{Criterion, TestConfig};
use crate::feature_set::FeatureSet;
use crate::sim::{simulate_benchmark, Benchmark, RngStream, StructureGenConfig};
use crate::Error;

/// Classification of a discovered family against the truth. The four
/// counts partition the discovered family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub recovered: usize,
    pub subset_errors: usize,
    pub superset_errors: usize,
    pub other_errors: usize,
}

impl Metrics {
    pub fn total(&self) -> usize {
        self.recovered + self.subset_errors + self.superset_errors + self.other_errors
    }

    fn fields(&self) -> [f64; 4] {
        [self.recovered as f64, self.subset_errors as f64, self.superset_errors as f64, self.other_errors as f64]
    }
}

/// Scores `found` against `truth`. Duplicates in `found` are counted once.
pub fn score(found: &[FeatureSet], truth: &[FeatureSet]) -> Metrics {
    let mut found = found.to_vec();
    found.sort();
    found.dedup();
    let mut m = Metrics::default();
    for alpha in &found {
        if truth.contains(alpha) {
            m.recovered += 1;
        } else if truth.iter().any(|beta| alpha.is_proper_subset(beta)) {
            m.subset_errors += 1;
        } else if truth.iter().any(|beta| beta.is_proper_subset(alpha)) {
            m.superset_errors += 1;
        } else {
            m.other_errors += 1;
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Clef,
    Asymptotic,
    Peng,
    Hill,
    Damex,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Asymptotic, Algorithm::Peng, Algorithm::Hill, Algorithm::Clef, Algorithm::Damex];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Clef => "clef",
            Algorithm::Asymptotic => "asymptotic",
            Algorithm::Peng => "peng",
            Algorithm::Hill => "hill",
            Algorithm::Damex => "damex",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Clef => "CLEF",
            Algorithm::Asymptotic => "CLEF-asymptotic",
            Algorithm::Peng => "CLEF-Peng",
            Algorithm::Hill => "CLEF-Hill",
            Algorithm::Damex => "DAMEX",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn criterion(self) -> Option<Criterion> {
        match self {
            Algorithm::Clef => Some(Criterion::Clef),
            Algorithm::Asymptotic => Some(Criterion::Asymptotic),
            Algorithm::Peng => Some(Criterion::Peng),
            Algorithm::Hill => Some(Criterion::Hill),
            Algorithm::Damex => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub structure: StructureGenConfig,
    pub w: f64,
    pub k_over_n: f64,
    pub tests: TestConfig,
    pub epsilon: f64,
    pub algorithms: Vec<Algorithm>,
    pub replications: usize,
    pub base_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 50_000,
            structure: StructureGenConfig::default(),
            w: 0.1,
            k_over_n: 0.005,
            tests: TestConfig::default(),
            epsilon: 0.1,
            algorithms: Algorithm::ALL.to_vec(),
            replications: 50,
            base_seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParameter("no algorithms selected".into()));
        }
        self.structure.validate()?;
        self.tests.validate()?;
        let p = TailParams::from_fraction(self.k_over_n, self.n)?;
        DamexConfig { epsilon: self.epsilon, ..DamexConfig::new(p) }.validate()
    }

    pub fn k(&self) -> Result<TailParams, Error> {
        TailParams::from_fraction(self.k_over_n, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmOutcome {
    pub algorithm: Algorithm,
    pub metrics: Option<Metrics>,
    #[serde(default)]
    pub error: Option<String>,
}

/// Per-replication log entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub replication: usize,
    pub stream: RngStream,
    #[serde(default)]
    pub error: Option<String>,
    pub outcomes: Vec<AlgorithmOutcome>,
}

/// Runs every configured algorithm on an already simulated dataset.
pub fn evaluate_replication<E: Executor>(
    cfg: &ExperimentConfig,
    replication: usize,
    bench: &Benchmark,
    executor: &E,
) -> ReplicationOutcome {
    let stream = RngStream::new(cfg.base_seed, replication as u64);
    let prepared = cfg.k().and_then(|p| Ok((p, compute_ranks(&bench.data, TiePolicy::FirstOccurrence)?)));
    let (p, rd) = match prepared {
        Ok(v) => v,
        Err(e) => return ReplicationOutcome { replication, stream, error: Some(e.to_string()), outcomes: Vec::new() },
    };
    let truth = &bench.structure.subsets;
    let outcomes = cfg
        .algorithms
        .iter()
        .map(|&algorithm| {
            let found = match algorithm.criterion() {
                Some(criterion) => run_clef(&rd, p, &cfg.tests, criterion, executor).map(|r| r.maximal),
                None => {
                    let dcfg = DamexConfig { epsilon: cfg.epsilon, top_k_subsets: truth.len(), p };
                    damex_run(&rd, &dcfg).map(|cones| cones.into_iter().map(|c| c.features).collect())
                }
            };
            match found {
                Ok(found) => AlgorithmOutcome { algorithm, metrics: Some(score(&found, truth)), error: None },
                Err(e) => AlgorithmOutcome { algorithm, metrics: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    ReplicationOutcome { replication, stream, error: None, outcomes }
}

/// Simulates replication `r` (stream `r` of the base seed) and evaluates it.
pub fn run_replication<E: Executor>(cfg: &ExperimentConfig, replication: usize, executor: &E) -> ReplicationOutcome {
    let stream = RngStream::new(cfg.base_seed, replication as u64);
    match simulate_benchmark(cfg.n, &cfg.structure, cfg.w, stream) {
        Ok(bench) => evaluate_replication(cfg, replication, &bench, executor),
        Err(e) => ReplicationOutcome { replication, stream, error: Some(e.to_string()), outcomes: Vec::new() },
    }
}

/// Mean and sample standard deviation (`n − 1` denominator) per field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub k_over_n: f64,
    pub replications: usize,
    pub failures: usize,
    pub mean: [f64; 4],
    pub sd: [f64; 4],
}

impl AlgorithmSummary {
    pub fn mean_metrics(&self) -> MetricsSummary {
        MetricsSummary::from(self.mean)
    }

    pub fn sd_metrics(&self) -> MetricsSummary {
        MetricsSummary::from(self.sd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSummary {
    pub recovered: f64,
    pub subset_errors: f64,
    pub superset_errors: f64,
    pub other_errors: f64,
}

impl From<[f64; 4]> for MetricsSummary {
    fn from(v: [f64; 4]) -> Self {
        Self { recovered: v[0], subset_errors: v[1], superset_errors: v[2], other_errors: v[3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: ExperimentConfig,
    pub k: usize,
    pub summary: Vec<AlgorithmSummary>,
    pub replications: Vec<ReplicationOutcome>,
}

impl BenchmarkReport {
    pub fn summary_for(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.summary.iter().find(|s| s.algorithm == algorithm)
    }
}

/// Reduces per-replication logs to per-algorithm means and SDs.
pub fn aggregate(cfg: &ExperimentConfig, replications: &[ReplicationOutcome]) -> Vec<AlgorithmSummary> {
    cfg.algorithms
        .iter()
        .map(|&algorithm| {
            let samples: Vec<[f64; 4]> = replications
                .iter()
                .filter_map(|r| r.outcomes.iter().find(|o| o.algorithm == algorithm))
                .filter_map(|o| o.metrics.map(|m| m.fields()))
                .collect();
            let count = samples.len();
            let mut mean = [0.0; 4];
            let mut sd = [0.0; 4];
            if count > 0 {
                for f in 0..4 {
                    mean[f] = samples.iter().map(|s| s[f]).sum::<f64>() / count as f64;
                    if count > 1 {
                        let ss: f64 = samples.iter().map(|s| (s[f] - mean[f]) * (s[f] - mean[f])).sum();
                        sd[f] = libm::sqrt(ss / (count - 1) as f64);
                    }
                }
            }
            AlgorithmSummary {
                algorithm,
                k_over_n: cfg.k_over_n,
                replications: count,
                failures: replications.len() - count,
                mean,
                sd,
            }
        })
        .collect()
}

/// Runs all replications one after another.
pub fn run_benchmark<E: Executor>(cfg: &ExperimentConfig, executor: &E) -> Result<BenchmarkReport, Error> {
    cfg.validate()?;
    let replications: Vec<ReplicationOutcome> =
        (0..cfg.replications).map(|r| run_replication(cfg, r, executor)).collect();
    Ok(BenchmarkReport { config: cfg.clone(), k: cfg.k()?.k(), summary: aggregate(cfg, &replications), replications })
}

/// Plain-text table with one row per algorithm, SDs in brackets.
pub fn render_table(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    let header = alloc::format!(
        "n={} d={} K={}",
        report.config.n,
        report.config.structure.d,
        report.config.structure.num_subsets
    );
    let _ = writeln!(
        out,
        "{:<16} {:>7} {:>16} {:>16} {:>16} {:>16}",
        header, "k/n", "recovered", "subset errors", "superset errors", "other errors"
    );
    for s in &report.summary {
        let cell = |f: usize| alloc::format!("{:.2} ({:.2})", s.mean[f], s.sd[f]);
        let _ = writeln!(
            out,
            "{:<16} {:>7} {:>16} {:>16} {:>16} {:>16}",
            s.algorithm.label(),
            alloc::format!("{}", s.k_over_n),
            cell(0),
            cell(1),
            cell(2),
            cell(3)
        );
    }
    out
}
