use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::PddlError;
use crate::model::{InputLabel, ModelError, PredicateAtom};
use crate::select::OrderKey;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{line}:{column}: invalid scenario JSON: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("unsupported scenario format {0} (expected {FORMAT_VERSION})")]
    Format(u32),
    #[error("{context} refers to unknown state `{id}`")]
    DanglingState { context: String, id: String },
    #[error("desirability {value} of `{state}` is outside [0, 1]")]
    DesOutOfRange { state: String, value: f64 },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("goal `{0}` has no atoms")]
    EmptyGoal(String),
    #[error("invalid engine parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{file}:{source}")]
    Pddl {
        file: String,
        #[source]
        source: PddlError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Where a PDDL text comes from: a path relative to the scenario file, or
/// the text itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum PddlSource {
    Path(String),
    Inline(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FreeRunMode {
    /// ⊥-edges come from the `edges` list.
    #[default]
    Explicit,
    /// ⊥-edges are the closure of the problem's initial state under
    /// human-capable actions.
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub id: String,
    pub atoms: Vec<PredicateAtom>,
    pub des: f64,
    /// Marks a robot-modified variant of another listed state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant_of: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Layout hint for graph views.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub from: String,
    pub to: String,
    #[serde(default = "null_label")]
    pub label: InputLabel,
}

fn null_label() -> InputLabel {
    InputLabel::Null
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalEntry {
    pub name: String,
    pub atoms: Vec<PredicateAtom>,
}

/// A human-only action and the robot action that stands in for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstitutionEntry {
    pub human_action: String,
    pub robot_action: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineParams {
    #[serde(rename = "K")]
    pub horizon: usize,
    pub start: String,
    #[serde(default = "half")]
    pub decrease_factor: f64,
    #[serde(default = "half")]
    pub increase_factor: f64,
    #[serde(default = "default_order")]
    pub choose_order: Vec<OrderKey>,
    #[serde(default = "one")]
    pub default_des: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub trajectory: Vec<String>,
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

fn default_order() -> Vec<OrderKey> {
    OrderKey::DEFAULT.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub domain: PddlSource,
    pub problem: PddlSource,
    #[serde(default)]
    pub free_run: FreeRunMode,
    pub states: Vec<StateEntry>,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
    pub goals: Vec<GoalEntry>,
    #[serde(default)]
    pub substitutions: Vec<SubstitutionEntry>,
    /// Robot actions that only inform the human; their effects do not mark
    /// a state as robot-modified.
    #[serde(default)]
    pub communicative: Vec<String>,
    pub engine: EngineParams,
}

impl ScenarioFile {
    pub fn state(&self, id: &str) -> Option<&StateEntry> {
        self.states.iter().find(|s| s.id == id)
    }

    /// Structural checks that need no PDDL.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.format != FORMAT_VERSION {
            return Err(ScenarioError::Format(self.format));
        }
        if self.states.is_empty() {
            return Err(ScenarioError::InvalidParameter("scenario lists no states".into()));
        }
        let mut ids = BTreeSet::new();
        for s in &self.states {
            if !ids.insert(s.id.as_str()) {
                return Err(ScenarioError::Duplicate {
                    kind: "state",
                    name: s.id.clone(),
                });
            }
            check_des(&s.id, s.des)?;
        }
        check_des("<default>", self.engine.default_des)?;
        let dangling = |context: &str, id: &str| -> Result<(), ScenarioError> {
            if ids.contains(id) {
                Ok(())
            } else {
                Err(ScenarioError::DanglingState {
                    context: context.to_string(),
                    id: id.to_string(),
                })
            }
        };
        for s in &self.states {
            if let Some(anchor) = &s.variant_of {
                dangling(&format!("variant `{}`", s.id), anchor)?;
                if self.state(anchor).and_then(|a| a.variant_of.as_ref()).is_some() {
                    return Err(ScenarioError::InvalidParameter(format!(
                        "`{}` is a variant of another variant",
                        s.id
                    )));
                }
            }
        }
        for e in &self.edges {
            dangling("edge", &e.from)?;
            dangling("edge", &e.to)?;
        }
        dangling("engine.start", &self.engine.start)?;
        for t in &self.engine.trajectory {
            dangling("engine.trajectory", t)?;
        }
        let mut goal_names = BTreeSet::new();
        for g in &self.goals {
            if !goal_names.insert(g.name.as_str()) {
                return Err(ScenarioError::Duplicate {
                    kind: "goal",
                    name: g.name.clone(),
                });
            }
            if g.atoms.is_empty() {
                return Err(ScenarioError::EmptyGoal(g.name.clone()));
            }
        }
        let e = &self.engine;
        if !(0.0..1.0).contains(&e.decrease_factor) {
            return Err(ScenarioError::InvalidParameter(format!(
                "decrease_factor {} is outside [0, 1)",
                e.decrease_factor
            )));
        }
        if !(e.increase_factor > 0.0 && e.increase_factor <= 1.0) {
            return Err(ScenarioError::InvalidParameter(format!(
                "increase_factor {} is outside (0, 1]",
                e.increase_factor
            )));
        }
        let keys: BTreeSet<_> = e.choose_order.iter().collect();
        if keys.len() != e.choose_order.len() {
            return Err(ScenarioError::InvalidParameter("choose_order repeats a key".into()));
        }
        Ok(())
    }
}

fn check_des(state: &str, value: f64) -> Result<(), ScenarioError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ScenarioError::DesOutOfRange {
            state: state.to_string(),
            value,
        })
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.validate()?;
    Ok(file)
}

/// Canonical text: pretty JSON with a trailing newline.
pub fn render_scenario(file: &ScenarioFile) -> String {
    let mut text = serde_json::to_string_pretty(file).expect("scenario serializes");
    text.push('\n');
    text
}
