//! Proactive assistance engine: intention recognition, equilibrium
//! maintenance and a simulator over authored state graphs.

pub mod dot;
pub mod eqm;
pub mod hir;
pub mod model;
pub mod pddl;
pub mod planner;
pub mod scenario;
pub mod select;
pub mod sim;
pub mod world;

pub use eqm::{
    benefit, equilibrium, free_run, Opportunity, EquilibriumReport, FreeRun, GraphSystem, Scheme, TableScheme,
};
pub use hir::{Intention, IntentionSet, Recognizer, Substitution};
pub use model::{
    apply, AgentKind, AtomSet, DesirabilityMap, DynamicSystem, Effect, Formula, Goal, GroundAction, GroundActionScheme,
    InputLabel, ModelError, PredicateAtom, WorldState,
};
pub use pddl::{parse_domain, parse_problem, parse_scenario, PddlError, ScenarioError, ScenarioFile};
pub use planner::{Plan, Planner};
pub use scenario::{EngineConfig, Scenario};
pub use select::{Candidate, ChooseOrder, Decision, OrderKey, ScalingConfig, Source};
pub use sim::{replay, render_table, Pick, RunMode, Session, SessionInfo, SimError, TraceEvent};
pub use world::{GraphView, World};
