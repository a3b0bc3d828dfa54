//! File formats, experiment configs and the subcommands of the
//! `nonlocal-flow` binary. The numerics live in `nonlocal_flow_core`.

pub mod config;
pub mod experiments;
pub mod io;
pub mod threads;

pub use config::{load_config, parse_config, ConfigError, Experiment, ExperimentConfig};
pub use experiments::{execute, exit_code, CliError, Outcome};
