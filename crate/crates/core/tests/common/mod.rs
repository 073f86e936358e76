#![allow(dead_code)]

use clef_core::{FeatureSet, RankedData};
use proptest::prelude::*;

/// Random permutation ranks, `n` rows by `d` columns.
pub fn ranked(n: usize, d: usize) -> impl Strategy<Value = RankedData> {
    let column = Just((1..=n as u32).collect::<Vec<_>>()).prop_shuffle();
    proptest::collection::vec(column, d).prop_map(|cols| RankedData::from_rank_columns(&cols).unwrap())
}

/// `(data, k)` with `n ≤ 50`, `d ≤ 4`.
pub fn small_case() -> impl Strategy<Value = (RankedData, usize)> {
    (4usize..=50, 2usize..=4).prop_flat_map(|(n, d)| (ranked(n, d), 1..n))
}

/// Every non-empty subset of `0..d`.
pub fn all_subsets(d: usize) -> Vec<FeatureSet> {
    (1u32..1 << d).map(|mask| FeatureSet::from_indices((0..d).filter(|j| mask >> j & 1 == 1)).unwrap()).collect()
}

/// Straight from the definition: row `i` exceeds at level `x` in column `j`
/// when its rank is at least `n − ⌊k x⌋ + 1`.
pub fn exceeds(rd: &RankedData, i: usize, j: usize, k: usize, x: f64) -> bool {
    let n = rd.n() as f64;
    let m = (k as f64 * x).floor().clamp(0.0, n);
    rd.rank(i, j) as f64 >= n - m + 1.0
}

pub fn brute_all(rd: &RankedData, alpha: &FeatureSet, x: &[f64], k: usize) -> usize {
    (0..rd.n()).filter(|&i| alpha.iter().zip(x).all(|(j, &xj)| exceeds(rd, i, j, k, xj))).count()
}

pub fn brute_any(rd: &RankedData, alpha: &FeatureSet, x: &[f64], k: usize) -> usize {
    (0..rd.n()).filter(|&i| alpha.iter().zip(x).any(|(j, &xj)| exceeds(rd, i, j, k, xj))).count()
}

/// Rows failing in at most one coordinate of `alpha`.
pub fn brute_near(rd: &RankedData, alpha: &FeatureSet, x: &[f64], k: usize) -> usize {
    (0..rd.n()).filter(|&i| alpha.iter().zip(x).filter(|&(j, &xj)| !exceeds(rd, i, j, k, xj)).count() <= 1).count()
}

pub fn ones(len: usize) -> Vec<f64> {
    vec![1.0; len]
}
