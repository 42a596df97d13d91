//! Scenario files, batch runs, figure data and the validation suite for
//! the `matterwave` binary.

pub mod config;
pub mod figures;
pub mod scenario;
pub mod validate;

pub use config::{parse_config, ConfigError, ConfigErrors, OutputSpec, ScenarioConfig, SliceOffset};
pub use scenario::{run_scenario, Check, OutputFormat, RunOptions, RunOutcome};
