//! Fixed-width bitset over feature indices.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::de::{Deserialize, Deserializer, Error as _};
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::Error;

const WORDS: usize = 4;

/// Largest supported dimension.
pub const MAX_FEATURES: usize = WORDS * 64;

/// A non-empty group of features, stored 0-based.
///
/// Ordering is lexicographic over the sorted member indices, so
/// `{0,1} < {0,1,2} < {0,2} < {1,2}`. Serialized form is the sorted list of
/// 1-based indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureSet {
    bits: [u64; WORDS],
    size: u16,
}

impl FeatureSet {
    pub fn singleton(j: usize) -> Self {
        assert!(j < MAX_FEATURES, "feature index {j} out of range");
        let mut bits = [0u64; WORDS];
        bits[j / 64] |= 1 << (j % 64);
        Self { bits, size: 1 }
    }

    /// Builds a set from 0-based indices. Duplicates collapse; an empty
    /// iterator or an out-of-range index is an error.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self, Error> {
        let mut bits = [0u64; WORDS];
        for j in indices {
            if j >= MAX_FEATURES {
                return Err(Error::FeatureOutOfRange { index: j, max: MAX_FEATURES });
            }
            bits[j / 64] |= 1 << (j % 64);
        }
        let size = popcount(&bits);
        if size == 0 {
            return Err(Error::EmptyFeatureSet);
        }
        Ok(Self { bits, size })
    }

    /// Builds a set from 1-based indices, as used in all human-facing output.
    pub fn from_one_based<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self, Error> {
        let mut shifted = Vec::new();
        for j in indices {
            if j == 0 {
                return Err(Error::FeatureOutOfRange { index: 0, max: MAX_FEATURES });
            }
            shifted.push(j - 1);
        }
        Self::from_indices(shifted)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.size as usize
    }

    /// Always false: feature sets are non-empty by construction.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn contains(&self, j: usize) -> bool {
        j < MAX_FEATURES && self.bits[j / 64] >> (j % 64) & 1 == 1
    }

    /// Members in increasing order.
    pub fn iter(&self) -> Members {
        Members { bits: self.bits, word: 0 }
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.iter().map(|j| j + 1).collect()
    }

    /// Largest member.
    pub fn last(&self) -> usize {
        for w in (0..WORDS).rev() {
            if self.bits[w] != 0 {
                return w * 64 + 63 - self.bits[w].leading_zeros() as usize;
            }
        }
        unreachable!("feature sets are never empty")
    }

    pub fn is_subset(&self, other: &FeatureSet) -> bool {
        self.size <= other.size && (0..WORDS).all(|w| self.bits[w] & !other.bits[w] == 0)
    }

    pub fn is_proper_subset(&self, other: &FeatureSet) -> bool {
        self.size < other.size && self.is_subset(other)
    }

    pub fn intersection_len(&self, other: &FeatureSet) -> usize {
        (0..WORDS).map(|w| (self.bits[w] & other.bits[w]).count_ones() as usize).sum()
    }

    /// `self ∪ {j}`.
    pub fn with(&self, j: usize) -> Self {
        let mut out = *self;
        if !out.contains(j) {
            out.bits[j / 64] |= 1 << (j % 64);
            out.size += 1;
        }
        out
    }

    /// `self ∖ {j}`, or `None` when that would leave the set empty.
    pub fn without(&self, j: usize) -> Option<Self> {
        if !self.contains(j) {
            return Some(*self);
        }
        if self.size == 1 {
            return None;
        }
        let mut out = *self;
        out.bits[j / 64] &= !(1 << (j % 64));
        out.size -= 1;
        Some(out)
    }

    pub fn union(&self, other: &FeatureSet) -> Self {
        let mut bits = self.bits;
        for (b, o) in bits.iter_mut().zip(other.bits.iter()) {
            *b |= o;
        }
        Self { bits, size: popcount(&bits) }
    }
}

fn popcount(bits: &[u64; WORDS]) -> u16 {
    bits.iter().map(|w| w.count_ones() as u16).sum()
}

pub struct Members {
    bits: [u64; WORDS],
    word: usize,
}

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.word < WORDS {
            let w = self.bits[self.word];
            if w != 0 {
                let tz = w.trailing_zeros() as usize;
                self.bits[self.word] &= w - 1;
                return Some(self.word * 64 + tz);
            }
            self.word += 1;
        }
        None
    }
}

impl Ord for FeatureSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for FeatureSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, j) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", j + 1)?;
        }
        f.write_str("}")
    }
}

impl Serialize for FeatureSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for j in self.iter() {
            seq.serialize_element(&(j + 1))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for FeatureSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(deserializer)?;
        FeatureSet::from_one_based(raw).map_err(D::Error::custom)
    }
}
