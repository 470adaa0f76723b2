//! A scenario file resolved into ready-to-run engine parts.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::hir::{Recognizer, Substitution};
use crate::model::{
    DesirabilityMap, DynamicSystem, Goal, GroundAction, GroundActionScheme, PredicateAtom, WorldState,
};
use crate::pddl::{
    ground, parse_domain, parse_problem, parse_scenario, DomainModel, FreeRunMode, PddlSource, ProblemModel,
    ScenarioError, ScenarioFile,
};
use crate::select::{ChooseOrder, HirContext, ScalingConfig};
use crate::world::World;

/// Cap on the state space built by the derived free-run mode.
pub const MAX_DERIVED_STATES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub horizon: usize,
    pub scaling: ScalingConfig,
    pub order: ChooseOrder,
    pub start: String,
    pub seed: u64,
    pub trajectory: Vec<String>,
}

#[derive(Debug)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub domain: DomainModel,
    pub problem: ProblemModel,
    /// Every ground action, in grounding order.
    pub actions: Vec<GroundAction>,
    /// The robot-capable ground actions.
    pub schemes: Vec<GroundActionScheme>,
    pub world: World,
    pub goals: Vec<Goal>,
    pub recognizer: Recognizer,
    pub substitutions: Vec<Substitution>,
    pub communicative: BTreeSet<String>,
    pub config: EngineConfig,
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn source_text(src: &PddlSource, base: &Path) -> Result<(String, String), ScenarioError> {
    match src {
        PddlSource::Inline(text) => Ok(("<inline>".to_string(), text.clone())),
        PddlSource::Path(p) => {
            let path = base.join(p);
            Ok((path.display().to_string(), read(&path)?))
        }
    }
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = read(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Self::from_text(&text, &base)
    }

    /// `base` resolves relative PDDL paths.
    pub fn from_text(text: &str, base: &Path) -> Result<Self, ScenarioError> {
        Self::from_file(parse_scenario(text)?, base)
    }

    pub fn from_file(file: ScenarioFile, base: &Path) -> Result<Self, ScenarioError> {
        file.validate()?;
        let (dname, dtext) = source_text(&file.domain, base)?;
        let domain = parse_domain(&dtext).map_err(|source| ScenarioError::Pddl { file: dname, source })?;
        let (pname, ptext) = source_text(&file.problem, base)?;
        let problem = parse_problem(&ptext, &domain).map_err(|source| ScenarioError::Pddl { file: pname, source })?;
        let actions = ground(&domain, &problem.objects);

        let check_atom = |context: &str, a: &PredicateAtom| -> Result<(), ScenarioError> {
            let ok = domain.predicate(&a.name).is_some_and(|p| p.arity() == a.args.len())
                && a.args.iter().all(|o| problem.objects.contains(o));
            if ok {
                Ok(())
            } else {
                Err(ScenarioError::InvalidParameter(format!(
                    "{context}: atom {a} does not match the domain and problem"
                )))
            }
        };
        for s in &file.states {
            for a in &s.atoms {
                check_atom(&format!("state `{}`", s.id), a)?;
            }
        }
        let mut goals = Vec::with_capacity(file.goals.len());
        for g in &file.goals {
            for a in &g.atoms {
                check_atom(&format!("goal `{}`", g.name), a)?;
            }
            goals.push(Goal::new(g.name.clone(), g.atoms.iter().cloned())?);
        }

        let action_named = |name: &str| domain.action(name).ok_or_else(|| ScenarioError::UnknownAction(name.to_string()));
        let mut substitutions = Vec::with_capacity(file.substitutions.len());
        for s in &file.substitutions {
            action_named(&s.human_action)?;
            if !action_named(&s.robot_action)?.agent.robot_capable() {
                return Err(ScenarioError::InvalidParameter(format!(
                    "substitute `{}` is not robot-capable",
                    s.robot_action
                )));
            }
            substitutions.push(Substitution {
                human_action: s.human_action.clone(),
                robot_action: s.robot_action.clone(),
                message: s.message.clone(),
            });
        }
        let mut communicative = BTreeSet::new();
        for c in &file.communicative {
            action_named(c)?;
            communicative.insert(c.clone());
        }

        let des_entries: BTreeMap<String, f64> = file.states.iter().map(|s| (s.id.clone(), s.des)).collect();
        let world = match file.free_run {
            FreeRunMode::Explicit => {
                let mut sys = DynamicSystem::new(
                    file.states
                        .iter()
                        .map(|s| WorldState::labelled(s.id.clone(), s.atoms.iter().cloned()))
                        .collect(),
                )?;
                for e in &file.edges {
                    sys.add_transition(&e.from, e.label.clone(), &e.to)?;
                }
                let anchors = file
                    .states
                    .iter()
                    .map(|s| s.variant_of.as_ref().map(|a| sys.index_of_id(a)).transpose())
                    .collect::<Result<Vec<_>, _>>()?;
                World::new(sys, DesirabilityMap::new(des_entries, file.engine.default_des)?, anchors)?
            }
            FreeRunMode::Derived => {
                let start = file.state(&file.engine.start).expect("validated start");
                let init = WorldState::new(start.atoms.iter().cloned());
                let raw = DynamicSystem::derive_free_run(&init, &actions, MAX_DERIVED_STATES)?;
                // listed entries lend their ids and des to matching states
                let by_atoms: BTreeMap<BTreeSet<PredicateAtom>, &str> = file
                    .states
                    .iter()
                    .map(|s| (s.atoms.iter().cloned().collect(), s.id.as_str()))
                    .collect();
                let mut des = BTreeMap::new();
                let states: Vec<WorldState> = raw
                    .states()
                    .iter()
                    .map(|s| {
                        let id = by_atoms.get(&s.atoms).map(|i| i.to_string()).unwrap_or_else(|| s.label().to_string());
                        des.insert(id.clone(), des_entries.get(&id).copied().unwrap_or(file.engine.default_des));
                        WorldState::labelled(id, s.atoms.iter().cloned())
                    })
                    .collect();
                let mut sys = DynamicSystem::new(states)?;
                for t in raw.transitions() {
                    let from = sys.state(t.from).label().to_string();
                    let to = sys.state(t.to).label().to_string();
                    sys.add_transition(&from, t.label.clone(), &to)?;
                }
                let n = sys.states().len();
                World::new(sys, DesirabilityMap::new(des, file.engine.default_des)?, vec![None; n])?
            }
        };

        let schemes = actions
            .iter()
            .filter(|a| a.agent.robot_capable())
            .map(|a| GroundActionScheme::new(a.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let recognizer = Recognizer::new(&actions, goals.clone());
        let e = &file.engine;
        let config = EngineConfig {
            horizon: e.horizon,
            scaling: ScalingConfig::new(e.decrease_factor, e.increase_factor)
                .map_err(|err| ScenarioError::InvalidParameter(err.to_string()))?,
            order: ChooseOrder::new(&e.choose_order),
            start: e.start.clone(),
            seed: e.seed,
            trajectory: e.trajectory.clone(),
        };
        log::info!(
            "scenario `{}`: {} states, {} ground actions, {} goals",
            file.name,
            world.system().states().len(),
            actions.len(),
            goals.len()
        );
        Ok(Scenario {
            file,
            domain,
            problem,
            actions,
            schemes,
            world,
            goals,
            recognizer,
            substitutions,
            communicative,
            config,
        })
    }

    pub fn hir_context(&self) -> HirContext<'_> {
        HirContext {
            recognizer: &self.recognizer,
            substitutions: &self.substitutions,
            actions: &self.actions,
        }
    }

    pub fn is_communicative(&self, action: &GroundAction) -> bool {
        self.communicative.contains(&action.name)
    }

    pub fn action(&self, label: &str) -> Option<&GroundAction> {
        self.actions.iter().find(|a| a.label() == label)
    }

    pub fn state(&self, id: &str) -> Result<WorldState, ScenarioError> {
        Ok(self.world.state(id)?)
    }
}
