//! Human intention recognition by inverse planning.
//!
//! For every candidate goal we plan from the observed state with the actions
//! a human could take. The intention is the goal with the strictly shortest
//! residual plan; goals that are unreachable or already satisfied take no
//! part in the comparison.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AtomSet, Goal, GroundAction, WorldState};
use crate::planner::{Plan, Planner, HUMAN_CAPABLE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intention {
    pub goal: Goal,
    pub plan: Plan,
}

/// Goals tied at the minimal residual length.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntentionSet {
    pub candidates: Vec<Intention>,
}

impl IntentionSet {
    pub fn unique(&self) -> Option<&Intention> {
        match self.candidates.as_slice() {
            [only] => Some(only),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HirError {
    #[error("`{0}` is human-only and has no robot substitute")]
    NoSubstitution(String),
    #[error("substitute `{robot}` for `{human}` is not a robot-capable ground action")]
    BadSubstitute { human: String, robot: String },
    #[error("intention has an empty residual plan")]
    EmptyPlan,
}

/// Maps a human-only action name to a robot action name and the message the
/// robot delivers instead.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub human_action: String,
    pub robot_action: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobotStep {
    pub action: GroundAction,
    pub message: Option<String>,
}

/// Residual plan per goal, in goal order.
pub fn residual_plans<'g>(planner: &Planner, s: &WorldState, goals: &'g [Goal]) -> Vec<(&'g Goal, Option<Plan>)> {
    let atoms: Vec<&AtomSet> = goals.iter().map(|g| &g.atoms).collect();
    goals.iter().zip(planner.plans(s, &atoms)).collect()
}

/// The argmin set over goals with a nonempty residual plan.
pub fn candidates(planner: &Planner, s: &WorldState, goals: &[Goal]) -> IntentionSet {
    let plans = residual_plans(planner, s, goals);
    let best = plans
        .iter()
        .filter_map(|(_, p)| p.as_ref().map(Plan::len))
        .filter(|&len| len > 0)
        .min();
    let Some(best) = best else {
        return IntentionSet::default();
    };
    IntentionSet {
        candidates: plans
            .into_iter()
            .filter_map(|(g, p)| match p {
                Some(plan) if plan.len() == best => Some(Intention { goal: g.clone(), plan }),
                _ => None,
            })
            .collect(),
    }
}

pub fn recognize(planner: &Planner, s: &WorldState, goals: &[Goal]) -> Option<Intention> {
    candidates(planner, s, goals).unique().cloned()
}

/// The first residual step, or its robot stand-in when the human has to do
/// it.
pub fn next_robot_step(
    intent: &Intention,
    substitutions: &[Substitution],
    actions: &[GroundAction],
) -> Result<RobotStep, HirError> {
    let first = intent.plan.first().ok_or(HirError::EmptyPlan)?;
    if first.agent.robot_capable() {
        return Ok(RobotStep {
            action: first.clone(),
            message: None,
        });
    }
    let sub = substitutions
        .iter()
        .find(|s| s.human_action == first.name)
        .ok_or_else(|| HirError::NoSubstitution(first.label()))?;
    let action = actions
        .iter()
        .find(|a| a.name == sub.robot_action && a.args == first.args && a.agent.robot_capable())
        .ok_or_else(|| HirError::BadSubstitute {
            human: first.label(),
            robot: sub.robot_action.clone(),
        })?;
    Ok(RobotStep {
        action: action.clone(),
        message: Some(sub.message.clone()),
    })
}

/// Recognition over a fixed goal set and action set, memoized per atom set.
#[derive(Debug)]
pub struct Recognizer {
    planner: Planner,
    goals: Vec<Goal>,
    cache: Mutex<HashMap<AtomSet, IntentionSet>>,
}

impl Recognizer {
    pub fn new(actions: &[GroundAction], goals: Vec<Goal>) -> Self {
        Recognizer {
            planner: Planner::new(actions, HUMAN_CAPABLE),
            goals,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn goals(&self) -> &[Goal] {
        &self.goals
    }

    pub fn planner(&self) -> &Planner {
        &self.planner
    }

    pub fn candidates(&self, s: &WorldState) -> IntentionSet {
        let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(hit) = cache.get(&s.atoms) {
            return hit.clone();
        }
        let set = candidates(&self.planner, s, &self.goals);
        cache.insert(s.atoms.clone(), set.clone());
        set
    }

    pub fn recognize(&self, s: &WorldState) -> Option<Intention> {
        self.candidates(s).unique().cloned()
    }

    pub fn residual_plans(&self, s: &WorldState) -> Vec<(&Goal, Option<Plan>)> {
        residual_plans(&self.planner, s, &self.goals)
    }
}
