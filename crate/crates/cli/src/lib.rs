//! Experiment runner for band-wise GCN seizure detection.

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;

pub use config::ExperimentConfig;
pub use error::CliError;
