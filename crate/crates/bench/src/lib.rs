//! Batch orchestration for noisy VQE optimizer benchmarks.
//!
//! [`commands`] holds one function per CLI subcommand; the binary only parses
//! arguments and maps errors to exit codes.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use config::{Experiment, ExperimentConfig};
pub use error::BenchError;
