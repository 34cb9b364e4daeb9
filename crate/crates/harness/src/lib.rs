//! Experiment harness: configuration, runs, trace files and the `strop`
//! command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod instance;
pub mod output;
pub mod replay;

pub use config::ExperimentConfig;
pub use error::HarnessError;
pub use experiment::{execute, RunOutput};
pub use instance::Instance;
