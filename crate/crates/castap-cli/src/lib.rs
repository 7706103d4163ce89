//! Experiment harness around the coprime-array STAP library: TOML
//! configuration, named presets for the desk scenarios, Monte Carlo
//! orchestration, and CSV emission.

pub mod config;
pub mod presets;
pub mod report;
pub mod runner;
