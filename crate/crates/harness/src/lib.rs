//! Experiment matrix, result files and reports for `newsvendor-core`.

pub mod config;
pub mod experiment;
pub mod io;
pub mod report;

pub use config::{generate_instances, ExperimentConfig, InstanceSpec};
pub use experiment::{run_instance, run_matrix, InstanceResult, MatrixOutput};
