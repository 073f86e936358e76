//! Empirical tail dependence functionals on ranked data.
//!
//! Every quantity here is a count of rows whose depth (`n + 1 - rank`) is
//! small in some pattern of coordinates, divided by `k`. A coordinate `j`
//! evaluated at `x_j` qualifies when the depth is at most `⌊k x_j⌋`, clamped
//! to `n`.
//!
//! Counting walks the top-`m` rows of one column and probes the depths of the
//! others, so each count costs `O(m · |α|)` rather than a pass over all `n`
//! rows.

use alloc::vec::Vec;

use crate::data::{RankedData, TailParams};
use crate::feature_set::FeatureSet;

/// A column together with its exceedance level `m`: rows of depth `<= m` qualify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Level {
    pub column: usize,
    pub m: usize,
}

/// `min(⌊k x⌋, n)`, with negative products mapped to 0.
#[inline]
pub(crate) fn level_for(k: usize, x: f64, n: usize) -> usize {
    let prod = libm::floor(k as f64 * x);
    if prod.is_nan() || prod <= 0.0 {
        0
    } else if prod >= n as f64 {
        n
    } else {
        prod as usize
    }
}

pub(crate) fn levels(rd: &RankedData, alpha: &FeatureSet, x: &[f64], k: usize) -> Vec<Level> {
    assert_eq!(x.len(), alpha.len(), "x must have one entry per member of alpha");
    alpha.iter().zip(x).map(|(column, &xj)| Level { column, m: level_for(k, xj, rd.n()) }).collect()
}

pub(crate) fn uniform_levels(rd: &RankedData, alpha: &FeatureSet, m: usize) -> Vec<Level> {
    let m = m.min(rd.n());
    alpha.iter().map(|column| Level { column, m }).collect()
}

#[inline]
fn qualifies(rd: &RankedData, row: usize, l: &Level) -> bool {
    rd.depth(row, l.column) <= l.m
}

/// Rows qualifying in every coordinate.
pub(crate) fn count_all(rd: &RankedData, levels: &[Level]) -> usize {
    let Some(driver) = levels.iter().min_by_key(|l| l.m) else {
        return 0;
    };
    if driver.m == 0 {
        return 0;
    }
    rd.rows_by_depth(driver.column)[..driver.m]
        .iter()
        .filter(|&&row| levels.iter().all(|l| qualifies(rd, row as usize, l)))
        .count()
}

/// Rows qualifying in at least one coordinate.
pub(crate) fn count_any(rd: &RankedData, levels: &[Level]) -> usize {
    let mut total = 0;
    for (idx, l) in levels.iter().enumerate() {
        total += rd.rows_by_depth(l.column)[..l.m]
            .iter()
            .filter(|&&row| !levels[..idx].iter().any(|e| qualifies(rd, row as usize, e)))
            .count();
    }
    total
}

/// `(rows qualifying everywhere, rows failing at most one coordinate)`.
///
/// Needs at least two coordinates: a row failing at most once qualifies in
/// one of the first two, so those two top lists enumerate every candidate.
pub(crate) fn count_all_and_near(rd: &RankedData, levels: &[Level]) -> (usize, usize) {
    assert!(levels.len() >= 2);
    let (mut all, mut near) = (0, 0);
    let mut visit = |row: usize| {
        let misses = levels.iter().filter(|l| !qualifies(rd, row, l)).count();
        if misses == 0 {
            all += 1;
        }
        if misses <= 1 {
            near += 1;
        }
    };
    for &row in &rd.rows_by_depth(levels[0].column)[..levels[0].m] {
        visit(row as usize);
    }
    for &row in &rd.rows_by_depth(levels[1].column)[..levels[1].m] {
        if !qualifies(rd, row as usize, &levels[0]) {
            visit(row as usize);
        }
    }
    (all, near)
}

/// Empirical joint tail function `r̂_α(x)`; `x` lists one value per member
/// of `alpha` in increasing feature order.
pub fn empirical_r(rd: &RankedData, alpha: &FeatureSet, x: &[f64], p: TailParams) -> f64 {
    count_all(rd, &levels(rd, alpha, x, p.k())) as f64 / p.k() as f64
}

/// Empirical stable tail dependence function `ℓ̂_α(x)` (union counts).
pub fn empirical_ell(rd: &RankedData, alpha: &FeatureSet, x: &[f64], p: TailParams) -> f64 {
    count_any(rd, &levels(rd, alpha, x, p.k())) as f64 / p.k() as f64
}

pub(crate) fn rho_count(rd: &RankedData, alpha: &FeatureSet, k: usize) -> usize {
    count_all(rd, &uniform_levels(rd, alpha, k))
}

/// Joint tail coefficient estimate `ρ̂_α = r̂_α(1_α)`.
pub fn rho_hat(rd: &RankedData, alpha: &FeatureSet, p: TailParams) -> f64 {
    rho_count(rd, alpha, p.k()) as f64 / p.k() as f64
}

/// `Σ_j count(α∖j) − (|α|−1)·count(α)` at unit levels.
pub(crate) fn mu_delta_count_identity(rd: &RankedData, alpha: &FeatureSet, k: usize) -> usize {
    let s = alpha.len();
    assert!(s >= 2, "mu_delta needs |alpha| >= 2");
    let full = rho_count(rd, alpha, k);
    let faces: usize = alpha.iter().map(|j| rho_count(rd, &alpha.without(j).expect("|alpha| >= 2"), k)).sum();
    faces - (s - 1) * full
}

/// Empirical exponent measure of `Δ_α`, via the face decomposition
/// `Σ_j ρ̂_{α∖j} − (|α|−1) ρ̂_α`.
pub fn mu_delta_hat(rd: &RankedData, alpha: &FeatureSet, p: TailParams) -> f64 {
    mu_delta_count_identity(rd, alpha, p.k()) as f64 / p.k() as f64
}

/// Empirical exponent measure of `Δ_α`, counting rows that exceed in at
/// least `|α| − 1` coordinates directly.
pub fn mu_delta_hat_direct(rd: &RankedData, alpha: &FeatureSet, p: TailParams) -> f64 {
    assert!(alpha.len() >= 2, "mu_delta needs |alpha| >= 2");
    count_all_and_near(rd, &uniform_levels(rd, alpha, p.k())).1 as f64 / p.k() as f64
}

/// `κ̂_α(x)`: rows exceeding everywhere over rows exceeding in all but at
/// most one coordinate; 0 when no row qualifies for the denominator.
pub fn kappa_hat_at(rd: &RankedData, alpha: &FeatureSet, x: &[f64], p: TailParams) -> f64 {
    assert!(alpha.len() >= 2, "kappa needs |alpha| >= 2");
    let (num, den) = count_all_and_near(rd, &levels(rd, alpha, x, p.k()));
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `T̂_{i,α} = min_{j∈α} n / (n + 1 − R_{i,j})` for every row.
pub fn min_pareto_transform(rd: &RankedData, alpha: &FeatureSet) -> Vec<f64> {
    (0..rd.n())
        .map(|i| {
            let deepest = alpha.iter().map(|j| rd.depth(i, j)).max().expect("non-empty");
            rd.n() as f64 / deepest as f64
        })
        .collect()
}

/// The `count` smallest values of `max_{j∈α} depth(i, j)` over rows `i`, in
/// ascending order. Equivalent to the `count` largest `T̂_{i,α}`, without a
/// pass over all rows: rows whose max depth is at most `L` are found from the
/// top-`L` list of one column, doubling `L` until enough rows are found.
pub(crate) fn smallest_max_depths(rd: &RankedData, alpha: &FeatureSet, count: usize) -> Vec<usize> {
    let n = rd.n();
    assert!(count <= n);
    let driver = alpha.iter().next().expect("non-empty");
    let mut bound = count.max(1);
    loop {
        bound = bound.min(n);
        let mut found: Vec<usize> = rd.rows_by_depth(driver)[..bound]
            .iter()
            .filter_map(|&row| {
                let deepest = alpha.iter().map(|j| rd.depth(row as usize, j)).max().unwrap();
                (deepest <= bound).then_some(deepest)
            })
            .collect();
        if found.len() >= count || bound == n {
            found.sort_unstable();
            found.truncate(count);
            return found;
        }
        bound = bound.saturating_mul(2);
    }
}
