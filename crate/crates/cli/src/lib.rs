//! Experiment runner: configuration, execution and result files.

pub mod config;
pub mod output;
pub mod run;

pub use config::{Command, ConfigError, ExperimentConfig, Overrides, OUTPUT_DIR_ENV};
pub use output::{write_outputs, Manifest, Row, SCHEMA_VERSION};
pub use run::{run, RunOutput};
