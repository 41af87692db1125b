//! JSON scenario configs, command dispatch and CSV/JSON result files.

mod config;
mod output;
mod run;

pub use config::{parse_config, GrowthConfig, ScenarioConfig, ScenarioParams};
pub use output::{format_float, write_bundle, SUMMARY_SCHEMA};
pub use run::{run_command, Command, ResultBundle, Table};

use crate::bio_model::ModelError;
use crate::hjb::HjbError;
use crate::strategies::StrategyError;
use crate::tax_engine::TaxError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("config field `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid config, {} problem(s):{}", .0.len(), bullet_list(.0))]
    Validation(Vec<String>),
    #[error("{command}: {message}")]
    Scenario { command: &'static str, message: String },
    #[error("{command}: {source}")]
    Model { command: &'static str, source: ModelError },
    #[error("{command}: {source}")]
    Hjb { command: &'static str, source: HjbError },
    #[error("{command}: {source}")]
    Strategy { command: &'static str, source: StrategyError },
    #[error("{command}: {source}")]
    Tax { command: &'static str, source: TaxError },
}

fn bullet_list(items: &[String]) -> String {
    items.iter().map(|s| format!("\n  - {s}")).collect()
}

impl CliError {
    /// 2 for bad input, 1 for failures inside a pipeline.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation(_) | CliError::Scenario { .. } => 2,
            _ => 1,
        }
    }
}
