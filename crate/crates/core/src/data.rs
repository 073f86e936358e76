//! Raw observations, rank standardization and the tail-size parameter.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::feature_set::MAX_FEATURES;
use crate::Error;

/// `n × d` observations, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self, Error> {
        if values.len() != n * d {
            return Err(Error::Shape { n, d, len: values.len() });
        }
        if d > MAX_FEATURES {
            return Err(Error::TooManyFeatures { d, max: MAX_FEATURES });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / d, column: pos % d });
        }
        Ok(Self { n, d, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, Error> {
        let d = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::Shape { n: rows.len(), d, len: row.len() });
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), d, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, row: usize, column: usize) -> f64 {
        self.values[row * self.d + column]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.d..(row + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d.max(1))
    }

    pub fn column(&self, column: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, column)).collect()
    }

    /// Applies `f` to every entry of one column. Fails, leaving the matrix
    /// unchanged, if any result is not finite.
    pub fn map_column(&mut self, column: usize, f: impl Fn(f64) -> f64) -> Result<(), Error> {
        let mapped: Vec<f64> = (0..self.n).map(|i| f(self.get(i, column))).collect();
        if let Some(row) = mapped.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, column });
        }
        for (i, v) in mapped.into_iter().enumerate() {
            self.values[i * self.d + column] = v;
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// How equal values within a column are turned into distinct ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// Ties are an error.
    AverageForbidden,
    /// Ties are ordered by a seeded random permutation.
    Jitter(u64),
    /// Ties are ordered by row index.
    #[default]
    FirstOccurrence,
}

/// Column-wise ranks of a data matrix; each column is a permutation of `1..=n`.
///
/// Besides the ascending ranks `R`, the "depth" `n + 1 - R` is used
/// throughout: depth 1 is the column maximum, and a row is among the top `m`
/// of column `j` iff its depth is at most `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedData {
    n: usize,
    d: usize,
    // column-major, ranks[j * n + i]
    ranks: Vec<u32>,
    // column-major, by_depth[j * n + e - 1] = row of depth e
    by_depth: Vec<u32>,
}

impl RankedData {
    /// Builds from explicit column rank vectors (1-based ranks).
    pub fn from_rank_columns(columns: &[Vec<u32>]) -> Result<Self, Error> {
        let d = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        check_dims(n, d)?;
        let mut ranks = Vec::with_capacity(n * d);
        let mut by_depth = vec![u32::MAX; n * d];
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Shape { n, d, len: col.len() });
            }
            for (i, &r) in col.iter().enumerate() {
                let r = r as usize;
                if r == 0 || r > n || by_depth[j * n + n - r] != u32::MAX {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "column {} is not a permutation of 1..={n}",
                        j + 1
                    )));
                }
                by_depth[j * n + n - r] = i as u32;
            }
            ranks.extend_from_slice(col);
        }
        Ok(Self { n, d, ranks, by_depth })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn rank(&self, row: usize, column: usize) -> usize {
        self.ranks[column * self.n + row] as usize
    }

    /// `n + 1 - R_{row,column}`.
    #[inline]
    pub fn depth(&self, row: usize, column: usize) -> usize {
        self.n + 1 - self.rank(row, column)
    }

    /// Rank-based Pareto value `n / (n + 1 - R)`, in `[1, n]`.
    #[inline]
    pub fn pareto(&self, row: usize, column: usize) -> f64 {
        self.n as f64 / self.depth(row, column) as f64
    }

    pub fn rank_column(&self, column: usize) -> &[u32] {
        &self.ranks[column * self.n..(column + 1) * self.n]
    }

    /// Rows of `column` ordered from largest to smallest value.
    pub fn rows_by_depth(&self, column: usize) -> &[u32] {
        &self.by_depth[column * self.n..(column + 1) * self.n]
    }
}

fn check_dims(n: usize, d: usize) -> Result<(), Error> {
    if n < 2 || d < 2 {
        return Err(Error::TooSmall { n, d, min: 2 });
    }
    if d > MAX_FEATURES {
        return Err(Error::TooManyFeatures { d, max: MAX_FEATURES });
    }
    Ok(())
}

/// Ranks every column in ascending order, resolving ties per `policy`.
pub fn compute_ranks(data: &DataMatrix, policy: TiePolicy) -> Result<RankedData, Error> {
    let (n, d) = (data.n(), data.d());
    check_dims(n, d)?;
    let mut ranks = vec![0u32; n * d];
    let mut by_depth = vec![0u32; n * d];
    let mut tied_columns = Vec::new();
    let mut rng = match policy {
        TiePolicy::Jitter(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut order: Vec<u32> = Vec::with_capacity(n);
    for j in 0..d {
        order.clear();
        order.extend(0..n as u32);
        // stable: equal values keep row order
        order.sort_by(|&a, &b| data.get(a as usize, j).total_cmp(&data.get(b as usize, j)));

        let mut start = 0;
        let mut has_ties = false;
        while start < n {
            let v = data.get(order[start] as usize, j);
            let mut end = start + 1;
            while end < n && data.get(order[end] as usize, j) == v {
                end += 1;
            }
            if end - start > 1 {
                has_ties = true;
                if let Some(rng) = rng.as_mut() {
                    order[start..end].shuffle(rng);
                }
            }
            start = end;
        }
        if has_ties && policy == TiePolicy::AverageForbidden {
            tied_columns.push(j + 1);
            continue;
        }
        for (pos, &row) in order.iter().enumerate() {
            ranks[j * n + row as usize] = pos as u32 + 1;
            by_depth[j * n + n - 1 - pos] = row;
        }
    }
    if !tied_columns.is_empty() {
        return Err(Error::Ties { columns: tied_columns });
    }
    Ok(RankedData { n, d, ranks, by_depth })
}

/// Number of upper order statistics treated as extreme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TailParams {
    k: usize,
}

impl TailParams {
    pub fn new(k: usize, n: usize) -> Result<Self, Error> {
        if k == 0 || k >= n {
            return Err(Error::InvalidK { k, n });
        }
        Ok(Self { k })
    }

    /// `k = round(n * fraction)`.
    pub fn from_fraction(fraction: f64, n: usize) -> Result<Self, Error> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidParameter(alloc::format!("k/n = {fraction} must lie in (0, 1)")));
        }
        Self::new(libm::round(n as f64 * fraction) as usize, n)
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }
}
