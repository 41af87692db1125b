use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::bio_model::{
    validate_community, AgentSpec, Community, GrowthModel, ModelError, ValidatedCommunity, DEFAULT_CELLS_PER_UNIT,
};
use crate::hjb::SolverOptions;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub r: f64,
}

/// Command-specific knobs. Unused ones are ignored by the other commands.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub x0: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    /// Prefix sizes for `critical-tax`; every size from 1 to `n` when absent.
    pub community_nesting: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub growth: GrowthConfig,
    pub beta: f64,
    pub agents: Vec<AgentSpec>,
    /// Lattice cells per unit of harvesting intensity.
    #[serde(default = "default_cells")]
    pub cells_per_unit: usize,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub scenario: ScenarioParams,
}

fn default_cells() -> usize {
    DEFAULT_CELLS_PER_UNIT
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let mut path = e.path().to_string();
            let message = e.into_inner().to_string();
            // serde reports a missing field against its parent
            if let Some(field) = message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
                path = if path == "." { field.to_string() } else { format!("{path}.{field}") };
            }
            CliError::Parse { path, message }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn model(&self) -> GrowthModel {
        GrowthModel::verhulst(self.growth.r)
    }

    pub fn community(&self) -> Community {
        Community::new(self.agents.clone(), self.beta).with_resolution(self.cells_per_unit)
    }

    /// Every violated invariant of the config, in one pass.
    pub fn validate(&self) -> Result<ValidatedCommunity, CliError> {
        let mut issues = vec![];
        if let Err(e) = self.solver.validate() {
            issues.push(format!("solver: {e}"));
        }
        issues.extend(self.scenario_issues());
        let validated = match validate_community(&self.community(), &self.model()) {
            Ok(v) => Some(v),
            Err(ModelError::Validation(errs)) => {
                issues.extend(errs.issues().iter().map(|e| e.to_string()));
                None
            }
            Err(e) => {
                issues.push(e.to_string());
                None
            }
        };
        match validated {
            Some(v) if issues.is_empty() => Ok(v),
            _ => Err(CliError::Validation(issues)),
        }
    }

    fn scenario_issues(&self) -> Vec<String> {
        let s = &self.scenario;
        let mut out = vec![];
        let positive = [("epsilon", s.epsilon), ("delta", s.delta), ("horizon", s.horizon), ("dt", s.dt)];
        for (name, value) in positive {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    out.push(format!("scenario.{name} = {v} must be positive and finite"));
                }
            }
        }
        if let Some(x0) = s.x0 {
            if !(x0 > 0.0 && x0 < 1.0) {
                out.push(format!("scenario.x0 = {x0} must lie in (0, 1)"));
            }
        }
        if let Some(sizes) = &s.community_nesting {
            let n = self.agents.len();
            if sizes.is_empty() {
                out.push("scenario.community_nesting is empty".into());
            }
            if sizes.iter().any(|&k| k == 0 || k > n) {
                out.push(format!("scenario.community_nesting sizes must lie in 1..={n}"));
            }
            if sizes.windows(2).any(|w| w[1] <= w[0]) {
                out.push("scenario.community_nesting must be strictly increasing".into());
            }
        }
        out
    }
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    ScenarioConfig::from_json(&text)
}
