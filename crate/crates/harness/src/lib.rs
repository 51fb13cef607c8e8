//! Experiment runner, result files and the interactive session service for
//! the `april` policy-search library.

pub mod config;
pub mod error;
pub mod plots;
pub mod runlog;
pub mod runner;
pub mod server;
pub mod session;
pub mod stats;
pub mod synthetic;

pub use config::{ExperimentConfig, SCHEMA_VERSION};
pub use error::{HarnessError, Result};
