//! Decision-tree and random-forest induction for tabular data, with three
//! interchangeable ways to split on a continuous attribute:
//!
//! - `exhaustive`: classic binary threshold search over every candidate
//!   midpoint, O(N log N) per attribute per node;
//! - `msd`: a four-way split at the fixed cut points mean +/- stddev,
//!   O(N) per attribute per node;
//! - `amsd`: the same four-way split with the cut points shifted by sample
//!   skewness, so the bins follow the attribute's tail.
//!
//! The [`data`] module loads CSV/ARFF files into columnar datasets,
//! [`stats`] computes the single-pass moments the binned splitters need,
//! [`splitters`] scores candidate splits, [`tree`] and [`forest`] grow
//! models, and [`eval`] cross-validates and benchmarks them.
//!
//! Everything that consumes randomness is seeded and deterministic:
//! retraining with the same seed reproduces models byte for byte, on any
//! worker count.

pub mod data;
pub mod eval;
pub mod forest;
pub mod splitters;
pub mod stats;
pub mod tree;
