//! Configuration, job orchestration and artifact emission for `nhtrap`.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, Command, ConfigError, RunConfig};
pub use run::{compute, execute, Check, Outcome, RunError, EXIT_CHECK, EXIT_NUMERICAL, EXIT_PASS, EXIT_USAGE};
