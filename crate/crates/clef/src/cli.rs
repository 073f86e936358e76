//! The `clef` command line.
//!
//! Exit codes: 0 success, 1 internal failure, 2 bad input data, 3 bad
//! configuration or usage.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use clef_core::damex::DamexConfig;
use clef_core::experiments::{render_table, score, Algorithm, ExperimentConfig};
use clef_core::sim::{RngStream, StructureGenConfig};
use clef_core::{compute_ranks, run_clef, Criterion, Error, TailParams, TestConfig, TiePolicy};

use crate::io::{self, CsvOptions, Found, Header, IoError, StructureFile};
use crate::parallel::{
    damex_parallel, run_benchmark_parallel, simulate_benchmark_parallel, worker_count, ParallelExecutor,
};

#[derive(Debug, Parser)]
#[command(name = "clef", version, about = "Discover groups of asymptotically dependent features")]
pub struct Cli {
    /// Worker threads (default: $CLEF_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a benchmark dataset and its ground-truth structure.
    Simulate(SimulateArgs),
    /// Run the lattice search on a CSV dataset.
    Discover(DiscoverArgs),
    /// Run the DAMEX baseline on a CSV dataset.
    Damex(DamexArgs),
    /// Replicated simulation study.
    Benchmark(BenchmarkArgs),
    /// Score a discovered family against a ground-truth structure.
    Score(ScoreArgs),
}

#[derive(Debug, Args)]
struct StructureArgs {
    #[arg(long, default_value_t = 100)]
    d: usize,
    /// Number of dependent subsets.
    #[arg(long = "K", visible_alias = "num-subsets", default_value_t = 80)]
    num_subsets: usize,
    #[arg(long, default_value_t = 2)]
    min_size: usize,
    #[arg(long, default_value_t = 8)]
    max_size: usize,
    #[arg(long, default_value_t = 0.25)]
    geom_p: f64,
    #[arg(long, default_value_t = 10_000)]
    max_attempts: usize,
    /// Logistic dependence parameter.
    #[arg(long, default_value_t = 0.1)]
    w: f64,
}

impl StructureArgs {
    fn config(&self) -> StructureGenConfig {
        StructureGenConfig {
            d: self.d,
            num_subsets: self.num_subsets,
            min_size: self.min_size,
            max_size: self.max_size,
            geom_p: self.geom_p,
            max_attempts: self.max_attempts,
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 50_000)]
    n: usize,
    #[command(flatten)]
    structure: StructureArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Substream of the seed, as used for benchmark replication r.
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Data CSV to write.
    #[arg(long, short)]
    out: PathBuf,
    /// Ground-truth JSON to write.
    #[arg(long = "structure-out")]
    structure_out: PathBuf,
}

#[derive(Debug, Args)]
struct CsvArgs {
    /// Input CSV, one observation per row.
    input: PathBuf,
    #[arg(long, default_value = ",")]
    delimiter: char,
    #[arg(long, value_enum, default_value_t = Header::Auto)]
    header: Header,
    /// Break ties with a seeded shuffle instead of by row order.
    #[arg(long)]
    jitter: Option<u64>,
    /// Reject data with ties.
    #[arg(long, conflicts_with = "jitter")]
    forbid_ties: bool,
}

impl CsvArgs {
    fn options(&self) -> Result<CsvOptions, Failure> {
        if !self.delimiter.is_ascii() {
            return Err(Failure::Config("delimiter must be a single ASCII character".into()));
        }
        Ok(CsvOptions { delimiter: self.delimiter as u8, header: self.header })
    }

    fn policy(&self) -> TiePolicy {
        match (self.forbid_ties, self.jitter) {
            (true, _) => TiePolicy::AverageForbidden,
            (false, Some(seed)) => TiePolicy::Jitter(seed),
            (false, None) => TiePolicy::FirstOccurrence,
        }
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct KArgs {
    /// Number of extreme order statistics.
    #[arg(long)]
    k: Option<usize>,
    /// Extreme fraction; k = round(n * k_over_n).
    #[arg(long)]
    k_over_n: Option<f64>,
}

impl KArgs {
    fn resolve(&self, n: usize) -> Result<(TailParams, Option<f64>), Error> {
        match (self.k, self.k_over_n) {
            (Some(k), None) => Ok((TailParams::new(k, n)?, None)),
            (None, Some(f)) => Ok((TailParams::from_fraction(f, n)?, Some(f))),
            _ => unreachable!("clap enforces exactly one"),
        }
    }
}

#[derive(Debug, Args)]
struct TestArgs {
    #[arg(long, default_value_t = 0.001)]
    delta: f64,
    #[arg(long, default_value_t = 0.08)]
    kappa_min: f64,
    #[arg(long = "clef-c", default_value_t = 0.05)]
    clef_c: f64,
    #[arg(long, default_value_t = 0.05)]
    rho_guard: f64,
    /// Finite-difference step is k^-fd_exponent.
    #[arg(long, default_value_t = 0.25)]
    fd_exponent: f64,
}

impl TestArgs {
    fn config(&self) -> TestConfig {
        TestConfig {
            delta: self.delta,
            kappa_min: self.kappa_min,
            clef_c: self.clef_c,
            rho_guard: self.rho_guard,
            fd_exponent: self.fd_exponent,
        }
    }
}

#[derive(Debug, Args)]
struct DiscoverArgs {
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    k: KArgs,
    #[command(flatten)]
    tests: TestArgs,
    #[arg(long, default_value = "hill", value_parser = parse_criterion)]
    criterion: Criterion,
    /// Report JSON to write.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DamexArgs {
    #[command(flatten)]
    csv: CsvArgs,
    #[command(flatten)]
    k: KArgs,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 80)]
    top_k_subsets: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    #[arg(long, default_value_t = 50_000)]
    n: usize,
    #[command(flatten)]
    structure: StructureArgs,
    #[arg(long, default_value_t = 0.005)]
    k_over_n: f64,
    #[command(flatten)]
    tests: TestArgs,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Comma-separated subset of clef, asymptotic, peng, hill, damex.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm, default_value = "asymptotic,peng,hill,clef,damex")]
    algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    replications: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON to write.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Plain-text table to write (always printed to stdout).
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// A discover report, a damex output, or a JSON list of index lists.
    report: PathBuf,
    /// Ground-truth JSON written by `simulate`.
    #[arg(long)]
    structure: PathBuf,
}

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    Criterion::parse(s).ok_or_else(|| format!("unknown criterion {s:?} (clef, asymptotic, peng, hill)"))
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    Algorithm::parse(s.trim()).ok_or_else(|| format!("unknown algorithm {s:?} (clef, asymptotic, peng, hill, damex)"))
}

/// A failure with its exit code.
#[derive(Debug)]
pub enum Failure {
    Internal(String),
    Data(String),
    Config(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Internal(_) => 1,
            Failure::Data(_) => 2,
            Failure::Config(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Internal(m) | Failure::Data(m) | Failure::Config(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TooSmall { .. }
            | Error::Shape { .. }
            | Error::TooManyFeatures { .. }
            | Error::NonFinite { .. }
            | Error::Ties { .. } => Failure::Data(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Write { .. } => Failure::Internal(e.to_string()),
            IoError::Data { source: Error::InvalidParameter(_), .. } => Failure::Config(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let executor = ParallelExecutor::new(worker_count(cli.threads));
    match cli.command {
        Command::Simulate(a) => simulate(a, &executor),
        Command::Discover(a) => discover(a, &executor),
        Command::Damex(a) => damex(a, &executor),
        Command::Benchmark(a) => benchmark(a, &executor),
        Command::Score(a) => score_cmd(a),
    }
}

fn simulate(a: SimulateArgs, executor: &ParallelExecutor) -> Result<(), Failure> {
    if a.n == 0 {
        return Err(Failure::Config("n must be at least 1".into()));
    }
    let cfg = a.structure.config();
    let bench = simulate_benchmark_parallel(a.n, &cfg, a.structure.w, RngStream::new(a.seed, a.stream), executor)?;
    io::write_csv_file(&a.out, &bench.data)?;
    io::write_json(&a.structure_out, &StructureFile::new(&bench.structure, a.seed, a.stream, cfg))?;
    eprintln!(
        "wrote {} rows x {} features to {}, {} subsets to {}",
        a.n,
        cfg.d,
        a.out.display(),
        bench.structure.subsets.len(),
        a.structure_out.display()
    );
    Ok(())
}

fn load_ranked(csv: &CsvArgs) -> Result<clef_core::RankedData, Failure> {
    let data = io::read_csv(&csv.input, csv.options()?)?;
    compute_ranks(&data, csv.policy()).map_err(|e| match Failure::from(e) {
        Failure::Data(m) => Failure::Data(format!("{}: {m}", csv.input.display())),
        other => other,
    })
}

fn print_family<'a>(sets: impl IntoIterator<Item = &'a clef_core::FeatureSet>) {
    for s in sets {
        let members: Vec<String> = s.one_based().iter().map(usize::to_string).collect();
        println!("{}", members.join(" "));
    }
}

fn discover(a: DiscoverArgs, executor: &ParallelExecutor) -> Result<(), Failure> {
    let rd = load_ranked(&a.csv)?;
    let (p, fraction) = a.k.resolve(rd.n())?;
    let executor = executor.clone().with_level_log(true);
    eprintln!("n = {}, d = {}, k = {}, criterion = {}", rd.n(), rd.d(), p.k(), a.criterion.name());
    let mut report = run_clef(&rd, p, &a.tests.config(), a.criterion, &executor)?;
    report.params.k_over_n = fraction;
    if let Some(out) = &a.out {
        io::write_json(out, &report)?;
    }
    print_family(&report.maximal);
    Ok(())
}

fn damex(a: DamexArgs, executor: &ParallelExecutor) -> Result<(), Failure> {
    let rd = load_ranked(&a.csv)?;
    let (p, _) = a.k.resolve(rd.n())?;
    let cfg = DamexConfig { epsilon: a.epsilon, top_k_subsets: a.top_k_subsets, p };
    let cones = damex_parallel(&rd, &cfg, executor)?;
    if let Some(out) = &a.out {
        io::write_json(out, &cones)?;
    }
    for c in &cones {
        let members: Vec<String> = c.features.one_based().iter().map(usize::to_string).collect();
        println!("{}\t{}", members.join(" "), c.mass);
    }
    Ok(())
}

fn benchmark(a: BenchmarkArgs, executor: &ParallelExecutor) -> Result<(), Failure> {
    let cfg = ExperimentConfig {
        n: a.n,
        structure: a.structure.config(),
        w: a.structure.w,
        k_over_n: a.k_over_n,
        tests: a.tests.config(),
        epsilon: a.epsilon,
        algorithms: a.algorithms,
        replications: a.replications as usize,
        base_seed: a.seed,
    };
    let report = run_benchmark_parallel(&cfg, executor)?;
    for r in &report.replications {
        if let Some(e) = &r.error {
            eprintln!("replication {} failed: {e}", r.replication);
        }
    }
    let table = render_table(&report);
    if let Some(out) = &a.out {
        io::write_json(out, &report)?;
    }
    if let Some(path) = &a.table {
        std::fs::write(path, &table).map_err(|source| IoError::Write { path: path.clone(), source })?;
    }
    print!("{table}");
    Ok(())
}

fn score_cmd(a: ScoreArgs) -> Result<(), Failure> {
    let found = Found::read(&a.report)?;
    let truth: StructureFile = io::read_json(&a.structure)?;
    let metrics = score(&found.family(), &truth.subsets);
    println!("{}", serde_json::to_string(&metrics).map_err(|e| Failure::Internal(e.to_string()))?);
    Ok(())
}
