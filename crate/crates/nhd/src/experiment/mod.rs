//! Experiment layer: configuration, sweep runner, file emission.

pub mod config;
pub mod figures;
pub mod report;
pub mod runner;
pub mod svg;

pub use config::{ExperimentConfig, Scheme};
pub use figures::{figure2, figure3, run_to_files};
pub use runner::{run, RunReport};
