//! Experiment harness: configuration, orchestration of cross-validated runs,
//! result persistence, summaries and statistical comparison.

pub mod config;
pub mod presets;
pub mod report;
pub mod results;
pub mod runner;
pub mod stats;
