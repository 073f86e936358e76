//! DAMEX baseline: extreme rows are assigned to the face of the positive
//! orthant they lie near, and faces are ranked by empirical mass.
//!
//! A row is extreme when its largest rank-based Pareto value is at least
//! `n/k`. Its face is `{j : V̂_j ≥ ε · max_m V̂_m}`. Mass is count / `k`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{RankedData, TailParams};
use crate::feature_set::FeatureSet;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DamexConfig {
    pub epsilon: f64,
    pub top_k_subsets: usize,
    pub p: TailParams,
}

impl DamexConfig {
    pub fn new(p: TailParams) -> Self {
        Self { epsilon: 0.1, top_k_subsets: 80, p }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(alloc::format!("epsilon = {} must lie in (0, 1)", self.epsilon)));
        }
        if self.top_k_subsets == 0 {
            return Err(Error::InvalidParameter("top_k_subsets must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeMass {
    pub features: FeatureSet,
    pub mass: f64,
}

/// `{j : v_j ≥ ε · max v}`; always contains the argmax.
pub fn assign_cone(v: &[f64], epsilon: f64) -> FeatureSet {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = epsilon * max;
    FeatureSet::from_indices(v.iter().enumerate().filter(|(_, &x)| x >= cut).map(|(j, _)| j))
        .expect("the maximum always clears its own threshold")
}

/// Faces with the largest empirical mass, heaviest first; equal masses are
/// ordered by feature set.
pub fn damex_run(rd: &RankedData, cfg: &DamexConfig) -> Result<Vec<ConeMass>, Error> {
    cfg.validate()?;
    let counts = cone_counts(rd, cfg, 0..rd.n());
    Ok(top_cones(counts, cfg))
}

/// Per-face counts over a range of rows; partial maps from disjoint ranges
/// can be merged by summing.
pub fn cone_counts(rd: &RankedData, cfg: &DamexConfig, rows: core::ops::Range<usize>) -> BTreeMap<FeatureSet, usize> {
    let k = cfg.p.k();
    let mut counts = BTreeMap::new();
    let mut v = alloc::vec![0.0; rd.d()];
    for i in rows {
        // max V̂ ≥ n/k  ⇔  min depth ≤ k
        let shallowest = (0..rd.d()).map(|j| rd.depth(i, j)).min().unwrap_or(usize::MAX);
        if shallowest > k {
            continue;
        }
        for (j, slot) in v.iter_mut().enumerate() {
            *slot = rd.pareto(i, j);
        }
        *counts.entry(assign_cone(&v, cfg.epsilon)).or_insert(0) += 1;
    }
    counts
}

pub fn top_cones(counts: BTreeMap<FeatureSet, usize>, cfg: &DamexConfig) -> Vec<ConeMass> {
    let mut ranked: Vec<(FeatureSet, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(cfg.top_k_subsets);
    let k = cfg.p.k() as f64;
    ranked.into_iter().map(|(features, count)| ConeMass { features, mass: count as f64 / k }).collect()
}
