//! Symbolic world model.
//!
//! A state is a finite set of ground predicate atoms; everything else in the
//! engine (planning, free-run prediction, desirability) is defined over these
//! sets. The [`DynamicSystem`] holds the authored state graph, where edges
//! labelled with the null input make up the free-run relation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid atom `{0}`")]
    InvalidAtom(String),
    #[error("precondition of `{action}` does not hold")]
    PreconditionViolated { action: String },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("states `{0}` and `{1}` have identical atom sets")]
    DuplicateState(String, String),
    #[error("desirability {value} of `{state}` is outside [0, 1]")]
    DesOutOfRange { state: String, value: f64 },
    #[error("goal `{0}` has no atoms")]
    EmptyGoal(String),
    #[error("action `{0}` is not executable by the robot")]
    NotRobotCapable(String),
    #[error("action `{0}` declares no effect alternative")]
    NoEffects(String),
    #[error("state space exceeds {0} states")]
    TooManyStates(usize),
}

/// A ground predicate such as `(gathered backpack)`.
///
/// Atoms order lexicographically on name, then arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateAtom {
    pub name: String,
    pub args: Vec<String>,
}

impl PredicateAtom {
    pub fn new<I, S>(name: impl Into<String>, args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let name = name.into();
        assert!(!name.is_empty(), "predicate name must be nonempty");
        PredicateAtom {
            name,
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn nullary(name: impl Into<String>) -> Self {
        Self::new(name, std::iter::empty::<String>())
    }
}

impl fmt::Display for PredicateAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for arg in &self.args {
            write!(f, " {arg}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for PredicateAtom {
    type Err = ModelError;

    /// Accepts `(name arg ...)` or the bare `name arg ...` form.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let inner = match (trimmed.strip_prefix('('), trimmed.strip_suffix(')')) {
            (Some(_), Some(_)) => &trimmed[1..trimmed.len() - 1],
            (None, None) => trimmed,
            _ => return Err(ModelError::InvalidAtom(s.to_string())),
        };
        let mut parts = inner.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| ModelError::InvalidAtom(s.to_string()))?;
        let valid = |t: &str| !t.contains(['(', ')', '?', ';']);
        if !valid(name) {
            return Err(ModelError::InvalidAtom(s.to_string()));
        }
        let args: Vec<String> = parts.map(str::to_ascii_lowercase).collect();
        if !args.iter().all(|a| valid(a)) {
            return Err(ModelError::InvalidAtom(s.to_string()));
        }
        Ok(PredicateAtom {
            name: name.to_ascii_lowercase(),
            args,
        })
    }
}

impl Serialize for PredicateAtom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PredicateAtom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub type AtomSet = BTreeSet<PredicateAtom>;

/// A world state. Equality, ordering and hashing look at the atom set only;
/// the id is a display label.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct WorldState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub atoms: AtomSet,
}

impl WorldState {
    pub fn new(atoms: impl IntoIterator<Item = PredicateAtom>) -> Self {
        WorldState {
            id: None,
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn labelled(id: impl Into<String>, atoms: impl IntoIterator<Item = PredicateAtom>) -> Self {
        WorldState {
            id: Some(id.into()),
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn holds(&self, atom: &PredicateAtom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn without_label(&self) -> Self {
        WorldState {
            id: None,
            atoms: self.atoms.clone(),
        }
    }

    pub fn label(&self) -> &str {
        self.id.as_deref().unwrap_or("?")
    }
}

impl PartialEq for WorldState {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

impl Eq for WorldState {}

impl PartialOrd for WorldState {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WorldState {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.atoms.cmp(&other.atoms)
    }
}

impl std::hash::Hash for WorldState {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.atoms.hash(state);
    }
}

impl fmt::Display for WorldState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(id) = &self.id {
            write!(f, "{id} ")?;
        }
        f.write_str("{")?;
        for (i, atom) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{atom}")?;
        }
        f.write_str("}")
    }
}

/// External input driving a transition. `Null` is the ⊥ input of the
/// free-run.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InputLabel {
    Null,
    Human(String),
    Robot(String),
    Environment(String),
}

impl InputLabel {
    pub fn is_null(&self) -> bool {
        matches!(self, InputLabel::Null)
    }
}

impl fmt::Display for InputLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputLabel::Null => f.write_str("null"),
            InputLabel::Human(n) => write!(f, "human:{n}"),
            InputLabel::Robot(n) => write!(f, "robot:{n}"),
            InputLabel::Environment(n) => write!(f, "env:{n}"),
        }
    }
}

impl FromStr for InputLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "null" {
            return Ok(InputLabel::Null);
        }
        let (kind, name) = s
            .split_once(':')
            .ok_or_else(|| format!("invalid input label `{s}`"))?;
        if name.is_empty() {
            return Err(format!("invalid input label `{s}`"));
        }
        match kind {
            "human" => Ok(InputLabel::Human(name.to_string())),
            "robot" => Ok(InputLabel::Robot(name.to_string())),
            "env" => Ok(InputLabel::Environment(name.to_string())),
            _ => Err(format!("invalid input label `{s}`")),
        }
    }
}

impl Serialize for InputLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InputLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Human,
    Robot,
    Both,
}

impl AgentKind {
    pub fn human_capable(self) -> bool {
        matches!(self, AgentKind::Human | AgentKind::Both)
    }

    pub fn robot_capable(self) -> bool {
        matches!(self, AgentKind::Robot | AgentKind::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Human => "human",
            AgentKind::Robot => "robot",
            AgentKind::Both => "both",
        }
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "human" => Ok(AgentKind::Human),
            "robot" => Ok(AgentKind::Robot),
            "both" => Ok(AgentKind::Both),
            other => Err(format!("unknown agent `{other}`")),
        }
    }
}

/// Boolean formula over atoms. Generic so the same shape serves lifted
/// (variable-bearing) and ground preconditions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula<A = PredicateAtom> {
    Atom(A),
    And(Vec<Formula<A>>),
    Or(Vec<Formula<A>>),
    Not(Box<Formula<A>>),
}

impl<A> Formula<A> {
    pub fn truth() -> Self {
        Formula::And(Vec::new())
    }

    pub fn map<B, E>(&self, f: &mut impl FnMut(&A) -> Result<B, E>) -> Result<Formula<B>, E> {
        Ok(match self {
            Formula::Atom(a) => Formula::Atom(f(a)?),
            Formula::And(fs) => Formula::And(fs.iter().map(|x| x.map(f)).collect::<Result<_, _>>()?),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|x| x.map(f)).collect::<Result<_, _>>()?),
            Formula::Not(x) => Formula::Not(Box::new(x.map(f)?)),
        })
    }

    pub fn atoms(&self) -> Vec<&A> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a A>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|x| x.collect_atoms(out)),
            Formula::Not(x) => x.collect_atoms(out),
        }
    }

    /// Evaluates with a caller-supplied atom valuation.
    pub fn eval_with(&self, holds: &impl Fn(&A) -> bool) -> bool {
        match self {
            Formula::Atom(a) => holds(a),
            Formula::And(fs) => fs.iter().all(|x| x.eval_with(holds)),
            Formula::Or(fs) => fs.iter().any(|x| x.eval_with(holds)),
            Formula::Not(x) => !x.eval_with(holds),
        }
    }
}

/// Closed-world evaluation: an atom is true iff it is in the state.
pub fn satisfies(state: &WorldState, formula: &Formula) -> bool {
    formula.eval_with(&|a| state.holds(a))
}

/// One effect alternative: delete then add.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Effect {
    pub add: AtomSet,
    pub del: AtomSet,
}

impl Effect {
    pub fn new(add: impl IntoIterator<Item = PredicateAtom>, del: impl IntoIterator<Item = PredicateAtom>) -> Self {
        let add: AtomSet = add.into_iter().collect();
        let del = del.into_iter().filter(|a| !add.contains(a)).collect();
        Effect { add, del }
    }

    pub fn apply_to(&self, atoms: &AtomSet) -> AtomSet {
        atoms
            .iter()
            .filter(|a| !self.del.contains(*a))
            .chain(self.add.iter())
            .cloned()
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.add.is_empty() && self.del.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundAction {
    pub name: String,
    pub args: Vec<String>,
    pub agent: AgentKind,
    pub precondition: Formula,
    /// Alternative outcomes; more than one means the action is
    /// non-deterministic.
    pub effects: Vec<Effect>,
}

impl GroundAction {
    /// Display name, e.g. `gather(water-bottle)` or `leave-home`.
    pub fn label(&self) -> String {
        if self.args.is_empty() {
            self.name.clone()
        } else {
            format!("{}({})", self.name, self.args.join(","))
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.effects.len() == 1
    }

    pub fn applicable(&self, state: &WorldState) -> bool {
        satisfies(state, &self.precondition)
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Successor states of `state` under `action`, one per effect alternative
/// (duplicates collapsed, declaration order kept).
pub fn apply(state: &WorldState, action: &GroundAction) -> Result<Vec<WorldState>, ModelError> {
    if action.effects.is_empty() {
        return Err(ModelError::NoEffects(action.label()));
    }
    if !action.applicable(state) {
        return Err(ModelError::PreconditionViolated {
            action: action.label(),
        });
    }
    let mut out: Vec<WorldState> = Vec::with_capacity(action.effects.len());
    for effect in &action.effects {
        let next = WorldState {
            id: None,
            atoms: effect.apply_to(&state.atoms),
        };
        if !out.contains(&next) {
            out.push(next);
        }
    }
    Ok(out)
}

/// A robot capability viewed as an action scheme: maps `{s}` to the set of
/// outcome states whenever `s` satisfies the precondition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundActionScheme {
    action: GroundAction,
}

impl GroundActionScheme {
    pub fn new(action: GroundAction) -> Result<Self, ModelError> {
        if !action.agent.robot_capable() {
            return Err(ModelError::NotRobotCapable(action.label()));
        }
        if action.effects.is_empty() {
            return Err(ModelError::NoEffects(action.label()));
        }
        Ok(GroundActionScheme { action })
    }

    pub fn action(&self) -> &GroundAction {
        &self.action
    }

    pub fn outcomes(&self, state: &WorldState) -> Option<Vec<WorldState>> {
        apply(state, &self.action).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub name: String,
    pub atoms: AtomSet,
}

impl Goal {
    pub fn new(name: impl Into<String>, atoms: impl IntoIterator<Item = PredicateAtom>) -> Result<Self, ModelError> {
        let name = name.into();
        let atoms: AtomSet = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(ModelError::EmptyGoal(name));
        }
        Ok(Goal { name, atoms })
    }

    pub fn satisfied_by(&self, state: &WorldState) -> bool {
        self.atoms.is_subset(&state.atoms)
    }
}

/// Degree of desirability per state id, with a fallback for ids not listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesirabilityMap {
    entries: BTreeMap<String, f64>,
    default: f64,
}

impl DesirabilityMap {
    pub fn new(entries: BTreeMap<String, f64>, default: f64) -> Result<Self, ModelError> {
        check_degree("<default>", default)?;
        for (id, v) in &entries {
            check_degree(id, *v)?;
        }
        Ok(DesirabilityMap { entries, default })
    }

    pub fn degree(&self, id: &str) -> f64 {
        self.entries.get(id).copied().unwrap_or(self.default)
    }

    pub fn default_degree(&self) -> f64 {
        self.default
    }

    pub fn entries(&self) -> &BTreeMap<String, f64> {
        &self.entries
    }
}

fn check_degree(state: &str, value: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::DesOutOfRange {
            state: state.to_string(),
            value,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub label: InputLabel,
    pub to: usize,
}

/// Σ = ⟨S, U, f⟩ over an explicit, finite state list.
#[derive(Debug, Clone, Default)]
pub struct DynamicSystem {
    states: Vec<WorldState>,
    transitions: Vec<Transition>,
    by_atoms: HashMap<AtomSet, usize>,
    by_id: HashMap<String, usize>,
}

impl DynamicSystem {
    pub fn new(states: Vec<WorldState>) -> Result<Self, ModelError> {
        let mut sys = DynamicSystem::default();
        for state in states {
            sys.add_state(state)?;
        }
        Ok(sys)
    }

    pub fn add_state(&mut self, state: WorldState) -> Result<usize, ModelError> {
        let idx = self.states.len();
        if let Some(&other) = self.by_atoms.get(&state.atoms) {
            return Err(ModelError::DuplicateState(
                self.states[other].label().to_string(),
                state.label().to_string(),
            ));
        }
        if let Some(id) = &state.id {
            self.by_id.insert(id.clone(), idx);
        }
        self.by_atoms.insert(state.atoms.clone(), idx);
        self.states.push(state);
        Ok(idx)
    }

    pub fn add_transition(&mut self, from: &str, label: InputLabel, to: &str) -> Result<(), ModelError> {
        let from = self.index_of_id(from)?;
        let to = self.index_of_id(to)?;
        let t = Transition { from, label, to };
        if !self.transitions.contains(&t) {
            self.transitions.push(t);
        }
        Ok(())
    }

    pub fn states(&self) -> &[WorldState] {
        &self.states
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn index_of_id(&self, id: &str) -> Result<usize, ModelError> {
        self.by_id
            .get(id)
            .copied()
            .ok_or_else(|| ModelError::UnknownState(id.to_string()))
    }

    pub fn index_of(&self, state: &WorldState) -> Option<usize> {
        self.by_atoms.get(&state.atoms).copied()
    }

    pub fn state(&self, idx: usize) -> &WorldState {
        &self.states[idx]
    }

    pub fn by_id(&self, id: &str) -> Result<&WorldState, ModelError> {
        self.index_of_id(id).map(|i| &self.states[i])
    }

    /// Indices of explicit ⊥-successors, without sink completion.
    pub fn explicit_free_successors(&self, idx: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .transitions
            .iter()
            .filter(|t| t.from == idx && t.label.is_null())
            .map(|t| t.to)
            .collect();
        out.sort_by(|a, b| self.states[*a].cmp(&self.states[*b]));
        out.dedup();
        out
    }

    /// ⊥-successors of a listed state. A state without any gets an implicit
    /// self-loop.
    pub fn free_successor_indices(&self, idx: usize) -> Vec<usize> {
        let out = self.explicit_free_successors(idx);
        if out.is_empty() {
            vec![idx]
        } else {
            out
        }
    }

    pub fn free_successors(&self, state: &WorldState) -> Result<Vec<WorldState>, ModelError> {
        let idx = self
            .index_of(state)
            .ok_or_else(|| ModelError::UnknownState(state.to_string()))?;
        Ok(self
            .free_successor_indices(idx)
            .into_iter()
            .map(|i| self.states[i].clone())
            .collect())
    }

    pub fn has_free_edge(&self, from: usize, to: usize) -> bool {
        self.free_successor_indices(from).contains(&to)
    }

    /// Builds a free-run graph by closing `initial` under the human-capable
    /// actions: every human move becomes a ⊥-edge. States are named `d0`,
    /// `d1`, ... in breadth-first order.
    pub fn derive_free_run(
        initial: &WorldState,
        actions: &[GroundAction],
        max_states: usize,
    ) -> Result<Self, ModelError> {
        let human: Vec<&GroundAction> = actions.iter().filter(|a| a.agent.human_capable()).collect();
        let mut sys = DynamicSystem::default();
        let mut queue = VecDeque::new();
        let root = WorldState {
            id: Some("d0".into()),
            atoms: initial.atoms.clone(),
        };
        queue.push_back(sys.add_state(root)?);
        let mut edges = Vec::new();
        while let Some(idx) = queue.pop_front() {
            let state = sys.states[idx].clone();
            for action in &human {
                let Ok(next) = apply(&state, action) else { continue };
                for succ in next {
                    let to = match sys.index_of(&succ) {
                        Some(i) => i,
                        None => {
                            if sys.states.len() >= max_states {
                                return Err(ModelError::TooManyStates(max_states));
                            }
                            let id = format!("d{}", sys.states.len());
                            let i = sys.add_state(WorldState {
                                id: Some(id),
                                atoms: succ.atoms,
                            })?;
                            queue.push_back(i);
                            i
                        }
                    };
                    if to != idx {
                        edges.push(Transition {
                            from: idx,
                            label: InputLabel::Null,
                            to,
                        });
                    }
                }
            }
        }
        for e in edges {
            if !sys.transitions.contains(&e) {
                sys.transitions.push(e);
            }
        }
        Ok(sys)
    }
}
