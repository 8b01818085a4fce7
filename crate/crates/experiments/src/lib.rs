//! Experiment harness: run configurations, parameter studies and output
//! writers for the `pnpsim` command line tool.

pub mod config;
pub mod error;
pub mod model;
pub mod output;
pub mod presets;
pub mod simulate;
pub mod studies;

pub use config::{ModelConfig, RunConfig, StepperMode};
pub use error::ExperimentError;
pub use model::Model;
pub use simulate::{run_config, simulate, RunOutcome};
