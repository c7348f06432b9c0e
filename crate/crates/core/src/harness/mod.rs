//! Experiment configuration, execution and reporting.

pub mod config;
pub mod output;
pub mod runner;
pub mod seed;

pub use config::{Copies, ExperimentConfig, Op, OutputFormat, Script};
pub use output::{write_outputs, CsvRow};
pub use runner::{run_experiment, Aggregate, AnalyticSummary, ExperimentResult, Rate};
pub use seed::{derive_trial_seed, trial_rng};
