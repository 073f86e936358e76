//! IO, parallel execution and the command line on top of `clef-core`.

pub mod cli;
pub mod io;
pub mod parallel;

pub use parallel::{worker_count, ParallelExecutor};
