//! Experiment configuration and orchestration behind the `critnet` binary.

pub mod config;
pub mod experiment;

pub use config::{parse_config, ConfigError, ExperimentConfig, Preset};
pub use experiment::{emit_plotdata, ks_summary, run_experiment, CliError, RunReport};
