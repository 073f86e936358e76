//! Benchmark data: random dependence structures and samples from the
//! asymmetric logistic max-stable model, with one noisy feature attached to
//! every dependent subset in every row.
//!
//! Randomness is organised in substreams so results do not depend on how
//! rows are scheduled: a replication draws its structure from
//! `(seed, stream_id)`, then a row seed, and row `i` uses stream `i` of that
//! row seed.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::distributions::{Distribution, Open01, WeightedIndex};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::feature_set::{FeatureSet, MAX_FEATURES};
use crate::Error;

/// A seeded, independently addressable random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    -libm::log(u)
}

/// Draw from the unit Fréchet distribution, `P(Z ≤ z) = exp(−1/z)`.
pub fn sample_unit_frechet<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 / exp1(rng)
}

// log S for S positive stable with E[exp(-tS)] = exp(-t^w), 0 < w < 1
// (Kanter's representation).
fn log_positive_stable<R: Rng + ?Sized>(w: f64, rng: &mut R) -> f64 {
    let u = PI * rng.sample::<f64, _>(Open01);
    let e = exp1(rng);
    (1.0 - w) / w * (libm::log(libm::sin((1.0 - w) * u)) - libm::log(e)) + libm::log(libm::sin(w * u))
        - libm::log(libm::sin(u)) / w
}

/// Positive stable variate with Laplace transform `exp(−t^w)`; `w = 1`
/// gives the constant 1.
pub fn sample_positive_stable<R: Rng + ?Sized>(w: f64, rng: &mut R) -> f64 {
    assert!(w > 0.0 && w <= 1.0, "stable index {w} outside (0, 1]");
    if w == 1.0 {
        return 1.0;
    }
    libm::exp(log_positive_stable(w, rng))
}

/// Symmetric logistic vector with unit Fréchet margins and joint CDF
/// `exp{−(Σ z_j^{−1/w})^w}`: `Z_j = (S / E_j)^w` with one shared stable `S`.
pub fn sample_symmetric_logistic<R: Rng + ?Sized>(dim: usize, w: f64, rng: &mut R) -> Vec<f64> {
    assert!(w > 0.0 && w <= 1.0, "dependence parameter {w} outside (0, 1]");
    let log_s = if w == 1.0 { 0.0 } else { log_positive_stable(w, rng) };
    (0..dim).map(|_| libm::exp(w * (log_s - libm::log(exp1(rng))))).collect()
}

/// A family of "true" dependent subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceStructure {
    pub d: usize,
    pub subsets: Vec<FeatureSet>,
    pub w: f64,
}

impl DependenceStructure {
    /// Checks dimension bounds, no nesting and at most two shared features
    /// between any two subsets.
    pub fn validate(&self, min_size: usize, max_size: usize) -> Result<(), Error> {
        let fail = |msg: alloc::string::String| Err(Error::InvalidParameter(msg));
        if !(self.w > 0.0 && self.w <= 1.0) {
            return fail(alloc::format!("w = {} outside (0, 1]", self.w));
        }
        for (a, alpha) in self.subsets.iter().enumerate() {
            if alpha.len() < min_size || alpha.len() > max_size || alpha.last() >= self.d {
                return fail(alloc::format!("subset {alpha} violates size or dimension bounds"));
            }
            for beta in &self.subsets[a + 1..] {
                if alpha.is_subset(beta) || beta.is_subset(alpha) {
                    return fail(alloc::format!("subsets {alpha} and {beta} are nested"));
                }
                if alpha.intersection_len(beta) > 2 {
                    return fail(alloc::format!("subsets {alpha} and {beta} share more than two features"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureGenConfig {
    pub d: usize,
    /// Number of subsets `K`.
    pub num_subsets: usize,
    pub min_size: usize,
    pub max_size: usize,
    /// Success probability of the truncated geometric size law.
    pub geom_p: f64,
    /// Rejections allowed while placing any one subset.
    pub max_attempts: usize,
}

impl Default for StructureGenConfig {
    fn default() -> Self {
        Self { d: 100, num_subsets: 80, min_size: 2, max_size: 8, geom_p: 0.25, max_attempts: 10_000 }
    }
}

impl StructureGenConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let fail = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.d < 3 || self.d > MAX_FEATURES {
            return fail("d must lie in [3, 256]");
        }
        if self.min_size < 2 || self.min_size > self.max_size {
            return fail("need 2 <= min_size <= max_size");
        }
        if self.max_size >= self.d {
            return fail("max_size must be below d so every subset can take a noisy feature");
        }
        if self.num_subsets == 0 {
            return fail("K must be at least 1");
        }
        if !(self.geom_p > 0.0 && self.geom_p < 1.0) {
            return fail("geom_p must lie in (0, 1)");
        }
        Ok(())
    }

    /// `P(size = s) ∝ (1 − p)^{s − min_size}` on `[min_size, max_size]`.
    pub fn size_weights(&self) -> Vec<f64> {
        (self.min_size..=self.max_size).map(|s| libm::pow(1.0 - self.geom_p, (s - self.min_size) as f64)).collect()
    }
}

/// Rejection-samples `K` subsets satisfying the structure constraints.
pub fn generate_structure<R: Rng + ?Sized>(
    cfg: &StructureGenConfig,
    w: f64,
    rng: &mut R,
) -> Result<DependenceStructure, Error> {
    cfg.validate()?;
    let sizes = WeightedIndex::new(cfg.size_weights()).expect("positive weights");
    let mut subsets: Vec<FeatureSet> = Vec::with_capacity(cfg.num_subsets);
    for placed in 0..cfg.num_subsets {
        let mut rejections = 0;
        loop {
            let size = cfg.min_size + sizes.sample(rng);
            let candidate = FeatureSet::from_indices(rand::seq::index::sample(rng, cfg.d, size))?;
            let ok = subsets
                .iter()
                .all(|s| !candidate.is_subset(s) && !s.is_subset(&candidate) && candidate.intersection_len(s) <= 2);
            if ok {
                subsets.push(candidate);
                break;
            }
            rejections += 1;
            if rejections >= cfg.max_attempts {
                return Err(Error::InfeasibleStructure { placed, target: cfg.num_subsets, attempts: rejections });
            }
        }
    }
    Ok(DependenceStructure { d: cfg.d, subsets, w })
}

/// Adds to each subset one feature drawn uniformly from its complement.
pub fn perturb_noisy<R: Rng + ?Sized>(structure: &DependenceStructure, rng: &mut R) -> Vec<FeatureSet> {
    structure
        .subsets
        .iter()
        .map(|alpha| {
            let free = structure.d - alpha.len();
            assert!(free > 0, "subset {alpha} leaves no room for a noisy feature");
            let pick = rng.gen_range(0..free);
            let noisy = (0..structure.d).filter(|j| !alpha.contains(*j)).nth(pick).unwrap();
            alpha.with(noisy)
        })
        .collect()
}

/// One asymmetric logistic row for the given per-row subsets: each subset
/// contributes a symmetric logistic block, feature `j` takes the maximum of
/// its blocks scaled by `1/|A(j)|`, and features in no subset get an
/// independent unit Fréchet draw.
pub fn sample_asym_logistic<R: Rng + ?Sized>(subsets: &[FeatureSet], d: usize, w: f64, rng: &mut R) -> Vec<f64> {
    let mut memberships = vec![0usize; d];
    for alpha in subsets {
        for j in alpha.iter() {
            memberships[j] += 1;
        }
    }
    let mut row = vec![0.0f64; d];
    for alpha in subsets {
        let block = sample_symmetric_logistic(alpha.len(), w, rng);
        for (z, j) in block.into_iter().zip(alpha.iter()) {
            let v = z / memberships[j] as f64;
            if v > row[j] {
                row[j] = v;
            }
        }
    }
    for j in 0..d {
        if memberships[j] == 0 {
            row[j] = sample_unit_frechet(rng);
        }
    }
    row
}

/// A simulated dataset and the structure it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub data: DataMatrix,
    pub structure: DependenceStructure,
    /// Seed of the per-row substreams.
    pub row_seed: u64,
}

/// Draws the structure and the row seed for one replication.
pub fn prepare_benchmark(
    cfg: &StructureGenConfig,
    w: f64,
    stream: RngStream,
) -> Result<(DependenceStructure, u64), Error> {
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("w = {w} outside (0, 1]")));
    }
    let mut rng = stream.rng();
    let structure = generate_structure(cfg, w, &mut rng)?;
    Ok((structure, rng.next_u64()))
}

/// Row `i` of a replication, from its own substream.
pub fn simulate_row(structure: &DependenceStructure, row_seed: u64, i: usize) -> Vec<f64> {
    let mut rng = RngStream::new(row_seed, i as u64).rng();
    let noisy = perturb_noisy(structure, &mut rng);
    sample_asym_logistic(&noisy, structure.d, structure.w, &mut rng)
}

/// Generates an `n × d` dataset from a fresh random structure.
pub fn simulate_benchmark(n: usize, cfg: &StructureGenConfig, w: f64, stream: RngStream) -> Result<Benchmark, Error> {
    let (structure, row_seed) = prepare_benchmark(cfg, w, stream)?;
    let mut values = Vec::with_capacity(n * cfg.d);
    for i in 0..n {
        values.extend(simulate_row(&structure, row_seed, i));
    }
    Ok(Benchmark { data: DataMatrix::new(n, cfg.d, values)?, structure, row_seed })
}
