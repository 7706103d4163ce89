//! Space-time adaptive processing for coprime arrays.
//!
//! Builds the difference-coarray virtual domain of a coprime array,
//! reduces the slow-time dimension to a few Doppler channels around the
//! target, models the clutter sparsely with a knowledge-aided dictionary,
//! recovers the clutter subspace with a greedy pursuit sized by a robust
//! clutter-rank rule, and designs the eigenanalysis-style filter weight.
//!
//! Modules mirror the processing chain:
//!
//! * [`geometry`]  - array layout, coarray, and the `P`/`T`/`J`/`F` maps
//! * [`signal`]    - scenario description, steering, covariances, snapshots
//! * [`rd`]        - Doppler-reduced virtual snapshot (`D`, `G`)
//! * [`dictionary`] - uncertainty-aware angle/Doppler atom grid
//! * [`rank`]      - clutter-rank estimation under prior-knowledge errors
//! * [`solver`]    - subspace pursuit, filter weights, SINR evaluation
//! * [`stats`]     - virtual-snapshot estimation-error statistics

pub mod dictionary;
pub mod error;
pub mod geometry;
pub mod rank;
pub mod rd;
pub mod signal;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
