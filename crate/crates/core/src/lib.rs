//! Discovery of groups of variables that tend to be extreme together.
//!
//! Observations are reduced to column ranks ([`compute_ranks`]); every
//! estimator is a count over the top-`k` ranks. For each candidate group a
//! keep/stop criterion decides whether the group is tail dependent, and the
//! CLEF search ([`run_clef`]) grows groups level by level, Apriori style,
//! before keeping the maximal ones. The [`damex`] baseline, a max-stable
//! simulator ([`sim`]) and a replicated benchmark harness ([`experiments`])
//! complete the crate.
//!
//! The crate is `no_std` and only needs an allocator. IO, parallel
//! executors and the command line live in the companion `clef` crate.
#![no_std]

extern crate alloc;

pub mod clef;
pub mod damex;
pub mod data;
mod error;
pub mod estimators;
pub mod experiments;
pub mod feature_set;
pub mod normal;
pub mod sim;
pub mod tail;

pub use crate::clef::{
    clef_stage1, generate_candidates, prune_maximal, run_clef, DiscoveryReport, Executor, LevelFamily, Sequential,
};
pub use crate::data::{compute_ranks, DataMatrix, RankedData, TailParams, TiePolicy};
pub use crate::error::Error;
pub use crate::estimators::{Criterion, CriterionVerdict, Guard, TestConfig};
pub use crate::feature_set::FeatureSet;
