//! CLEF lattice search: Apriori-style growth of tail-dependent feature
//! groups, followed by pruning to the inclusion-maximal ones.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{RankedData, TailParams};
use crate::estimators::{Criterion, CriterionVerdict, TestConfig};
use crate::feature_set::FeatureSet;
use crate::Error;

/// Runs per-candidate work for one lattice level. Implementations may
/// evaluate candidates concurrently but must return results in input order.
pub trait Executor {
    fn map<T, F>(&self, items: &[FeatureSet], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&FeatureSet) -> T + Sync + Send;

    /// Called after each level of the search.
    fn level_done(&self, _level: usize, _candidates: usize, _kept: usize) {}
}

/// Evaluates candidates one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, items: &[FeatureSet], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&FeatureSet) -> T + Sync + Send,
    {
        items.iter().map(f).collect()
    }
}

/// The groups of one cardinality that survived their test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelFamily {
    pub level: usize,
    pub sets: Vec<FeatureSet>,
}

/// Size-`s` sets all of whose `(s−1)`-subsets belong to `prev`, sorted.
///
/// Sets sharing their first `s − 2` members are joined pairwise and each
/// join is then checked against every face.
pub fn generate_candidates(prev: &LevelFamily) -> Vec<FeatureSet> {
    let mut sorted: Vec<FeatureSet> = prev.sets.clone();
    sorted.sort();
    sorted.dedup();
    let known: BTreeSet<FeatureSet> = sorted.iter().copied().collect();
    let prefix_len = prev.level.saturating_sub(1);

    let mut out = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let prefix: Vec<usize> = sorted[start].iter().take(prefix_len).collect();
        let mut end = start + 1;
        while end < sorted.len() && sorted[end].iter().take(prefix_len).eq(prefix.iter().copied()) {
            end += 1;
        }
        for a in start..end {
            for b in a + 1..end {
                let candidate = sorted[a].with(sorted[b].last());
                let closed = candidate.iter().all(|j| candidate.without(j).is_some_and(|face| known.contains(&face)));
                if closed {
                    out.push(candidate);
                }
            }
        }
        start = end;
    }
    out.sort();
    out
}

/// Output of the growth stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage1 {
    /// `Â_1, …, Â_S`; level 1 is always the full set of singletons.
    pub levels: BTreeMap<usize, LevelFamily>,
    /// One verdict per evaluated candidate, level by level, lexicographic
    /// within a level.
    pub verdicts: Vec<CriterionVerdict>,
}

/// Grows `Â_2, Â_3, …` keeping every candidate accepted by `evaluate`; stops
/// at the first empty level.
pub fn clef_stage1<E, F>(d: usize, executor: &E, evaluate: F) -> Result<Stage1, Error>
where
    E: Executor,
    F: Fn(&FeatureSet) -> Result<CriterionVerdict, Error> + Sync + Send,
{
    if d < 2 {
        return Err(Error::TooSmall { n: 0, d, min: 2 });
    }
    let mut levels = BTreeMap::new();
    let mut verdicts = Vec::new();
    let mut current = LevelFamily { level: 1, sets: (0..d).map(FeatureSet::singleton).collect() };
    for s in 2..=d {
        let candidates = generate_candidates(&current);
        let results = executor.map(&candidates, &evaluate);
        let mut kept = Vec::new();
        for v in results {
            let v = v?;
            if v.keep {
                kept.push(v.alpha);
            }
            verdicts.push(v);
        }
        executor.level_done(s, candidates.len(), kept.len());
        levels.insert(current.level, current);
        current = LevelFamily { level: s, sets: kept };
        if current.sets.is_empty() {
            break;
        }
    }
    if !current.sets.is_empty() {
        levels.insert(current.level, current);
    }
    Ok(Stage1 { levels, verdicts })
}

/// Keeps the inclusion-maximal groups among levels `≥ 2`, sweeping from the
/// top level down.
pub fn prune_maximal(levels: &BTreeMap<usize, LevelFamily>) -> Vec<FeatureSet> {
    let mut maximal: Vec<FeatureSet> = Vec::new();
    for family in levels.values().rev().filter(|f| f.level >= 2) {
        let fresh: Vec<FeatureSet> =
            family.sets.iter().filter(|a| !maximal.iter().any(|b| a.is_subset(b))).copied().collect();
        maximal.extend(fresh);
    }
    maximal.sort();
    maximal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    /// Present when `k` was derived as `round(n · k_over_n)`.
    #[serde(default)]
    pub k_over_n: Option<f64>,
    pub delta: f64,
    pub kappa_min: f64,
    pub clef_c: f64,
    pub rho_guard: f64,
    pub fd_exponent: f64,
}

/// Result of a full CLEF run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryReport {
    pub criterion: Criterion,
    pub params: ReportParams,
    /// `Â_2, …, Â_S` keyed by level.
    pub levels: BTreeMap<usize, Vec<FeatureSet>>,
    pub maximal: Vec<FeatureSet>,
    pub verdicts: Vec<CriterionVerdict>,
}

impl DiscoveryReport {
    /// Number of criterion evaluations performed.
    pub fn evaluations(&self) -> usize {
        self.verdicts.len()
    }
}

/// Runs both stages with one of the built-in criteria.
pub fn run_clef<E: Executor>(
    rd: &RankedData,
    p: TailParams,
    cfg: &TestConfig,
    criterion: Criterion,
    executor: &E,
) -> Result<DiscoveryReport, Error> {
    cfg.validate()?;
    if !matches!(criterion, Criterion::Clef) {
        cfg.fd_step(p)?;
    }
    let stage1 = clef_stage1(rd.d(), executor, |alpha| criterion.evaluate(rd, alpha, p, cfg))?;
    let maximal = prune_maximal(&stage1.levels);
    let levels = stage1.levels.into_values().filter(|f| f.level >= 2).map(|f| (f.level, f.sets)).collect();
    Ok(DiscoveryReport {
        criterion,
        params: ReportParams {
            n: rd.n(),
            d: rd.d(),
            k: p.k(),
            k_over_n: None,
            delta: cfg.delta,
            kappa_min: cfg.kappa_min,
            clef_c: cfg.clef_c,
            rho_guard: cfg.rho_guard,
            fd_exponent: cfg.fd_exponent,
        },
        levels,
        maximal,
        verdicts: stage1.verdicts,
    })
}
