//! Experiment runner for `cesaro-core`: sequence files, validated configs
//! and deterministic report bundles.

// `!(x > 0.0)` style guards are how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod table;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::{CliError, ConfigError, Result};
pub use run::{run_experiment, RunBundle};
