//! Scripted and interactive runs over a scenario.
//!
//! A session tracks the authored state it is "at" (the anchor) and the
//! actual atom set, which differs from the anchor once the robot or a
//! hand-picked human action has changed something. Moving along a ⊥-edge
//! carries those differences over, except for atoms the edge itself
//! decides.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{apply, AtomSet, WorldState};
use crate::scenario::Scenario;
use crate::select::{decide, Candidate, Selector, Source, Sources};
use crate::world::transport;

pub const TRACE_SCHEMA: u32 = 1;

/// Marks a state changed by something other than the free-run.
pub const PRIME: char = '′';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    HirOnly,
    EqmOnly,
    Combined,
}

impl RunMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::HirOnly => "hir-only",
            RunMode::EqmOnly => "eqm-only",
            RunMode::Combined => "combined",
        }
    }

    pub fn uses_hir(self) -> bool {
        self != RunMode::EqmOnly
    }

    pub fn uses_eqm(self) -> bool {
        self != RunMode::HirOnly
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hir" | "hir-only" => Ok(RunMode::HirOnly),
            "eqm" | "eqm-only" => Ok(RunMode::EqmOnly),
            "combined" | "both" => Ok(RunMode::Combined),
            other => Err(format!("unknown mode `{other}` (expected hir, eqm or combined)")),
        }
    }
}

/// A user-chosen transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pick {
    /// Follow the ⊥-edge to the listed state with this id.
    To(String),
    /// Apply a human-capable ground action, by label.
    HumanAction(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("trajectory step {step}: `{to}` is not a free-run successor of `{from}`")]
    NotAPath { step: usize, from: String, to: String },
    #[error("illegal pick: {0}")]
    IllegalPick(String),
    #[error("outcome {index} out of range for {count} alternative(s)")]
    IllegalOutcome { index: usize, count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentionView {
    pub goal: String,
    pub plan: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OppEntry {
    pub source: Source,
    pub scheme: String,
    #[serde(rename = "type")]
    pub type_index: u8,
    pub k: usize,
    pub degree: f64,
    pub benefit: f64,
    pub acting_state: String,
    pub deferred: bool,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dispatch {
    pub action: String,
    pub message: Option<String>,
    /// Index of the realized effect alternative.
    pub outcome: usize,
    pub outcomes: usize,
}

/// One line of a JSONL trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub schema: u32,
    pub step: usize,
    pub pick: Option<Pick>,
    pub state: String,
    pub atoms: AtomSet,
    pub mode: RunMode,
    pub evaluated: bool,
    pub intention: Option<IntentionView>,
    /// Ranked best first.
    pub opportunities: Vec<OppEntry>,
    pub chosen: Option<OppEntry>,
    pub dispatched: Option<Dispatch>,
    pub deferred: bool,
    pub result_state: String,
    pub result_atoms: AtomSet,
    pub seed: u64,
    pub note: Option<String>,
}

impl TraceEvent {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace events serialize")
    }
}

pub fn trace_to_jsonl(events: &[TraceEvent]) -> String {
    events.iter().map(|e| e.to_json_line() + "\n").collect()
}

pub fn parse_jsonl(text: &str) -> Result<Vec<TraceEvent>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Current session summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub current_state: String,
    pub atoms: AtomSet,
    pub mode: RunMode,
    pub step: usize,
    #[serde(rename = "K")]
    pub horizon: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Session {
    scenario: Arc<Scenario>,
    mode: RunMode,
    seed: u64,
    rng: ChaCha8Rng,
    start: String,
    anchor: usize,
    atoms: AtomSet,
    /// Atoms changed off the free-run since they were last decided by an
    /// edge.
    touched: AtomSet,
    selector: Selector,
    trace: Vec<TraceEvent>,
}

struct Pending {
    anchor: usize,
    atoms: AtomSet,
    touched: AtomSet,
    note: Option<String>,
}

impl Session {
    /// Starts at the listed state `start` and runs the first decision.
    pub fn start(scenario: Arc<Scenario>, mode: RunMode, seed: u64, start: &str) -> Result<Self, SimError> {
        let mut session = Session {
            scenario,
            mode,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            start: start.to_string(),
            anchor: 0,
            atoms: AtomSet::new(),
            touched: AtomSet::new(),
            selector: Selector::new(),
            trace: Vec::new(),
        };
        let pending = session.initial(start)?;
        session.commit(None, pending, None)?;
        Ok(session)
    }

    fn initial(&self, id: &str) -> Result<Pending, SimError> {
        let sys = self.scenario.world.system();
        let idx = sys.index_of_id(id).map_err(|_| SimError::UnknownState(id.to_string()))?;
        let atoms = sys.state(idx).atoms.clone();
        let (anchor, touched) = match self.scenario.world.anchor(idx) {
            Some(base) => (base, atoms.symmetric_difference(&sys.state(base).atoms).cloned().collect()),
            None => (idx, AtomSet::new()),
        };
        Ok(Pending {
            anchor,
            atoms,
            touched,
            note: None,
        })
    }

    pub fn scenario(&self) -> &Arc<Scenario> {
        &self.scenario
    }

    pub fn mode(&self) -> RunMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn last_event(&self) -> &TraceEvent {
        self.trace.last().expect("a session always has its first event")
    }

    pub fn current_state(&self) -> WorldState {
        WorldState {
            id: Some(self.label()),
            atoms: self.atoms.clone(),
        }
    }

    pub fn info(&self) -> SessionInfo {
        SessionInfo {
            current_state: self.label(),
            atoms: self.atoms.clone(),
            mode: self.mode,
            step: self.trace.len().saturating_sub(1),
            horizon: self.scenario.config.horizon,
            seed: self.seed,
        }
    }

    /// Anchor id, primed when the state carries off-free-run changes.
    pub fn label(&self) -> String {
        label_for(&self.scenario, self.anchor, &self.atoms, &self.touched)
    }

    /// ⊥-successor ids of the anchor (the legal `to` picks).
    pub fn enabled(&self) -> Vec<String> {
        let sys = self.scenario.world.system();
        sys.free_successor_indices(self.anchor)
            .into_iter()
            .map(|i| sys.state(i).label().to_string())
            .collect()
    }

    /// Human-capable actions applicable in the current state.
    pub fn enabled_human_actions(&self) -> Vec<String> {
        let s = WorldState {
            id: None,
            atoms: self.atoms.clone(),
        };
        self.scenario
            .actions
            .iter()
            .filter(|a| a.agent.human_capable() && a.applicable(&s))
            .map(|a| a.label())
            .collect()
    }

    fn sources(&self) -> Sources<'_> {
        Sources {
            hir: self.mode.uses_hir().then(|| self.scenario.hir_context()),
            eqm: self.mode.uses_eqm().then_some(self.scenario.schemes.as_slice()),
        }
    }

    /// Ranked opportunities at the current state, without acting.
    pub fn opportunities(&self) -> Vec<OppEntry> {
        let s = WorldState {
            id: None,
            atoms: self.atoms.clone(),
        };
        let sc = &self.scenario;
        let d = decide(&s, &sc.world, sc.config.horizon, &self.sources(), &sc.config.scaling, &sc.config.order);
        d.candidates.iter().map(|c| self.entry(c, &s)).collect()
    }

    fn entry(&self, c: &Candidate, current: &WorldState) -> OppEntry {
        let o = &c.opportunity;
        OppEntry {
            source: c.source,
            scheme: o.name.clone(),
            type_index: o.type_index,
            k: o.lookahead,
            degree: o.degree,
            benefit: o.benefit,
            acting_state: if o.acting_state == *current {
                self.label()
            } else {
                self.scenario.world.label(&o.acting_state)
            },
            deferred: c.deferred_from(current),
            message: c.message.clone(),
        }
    }

    /// Follows a ⊥-edge from the anchor to `id`.
    pub fn advance_to(&mut self, id: &str, outcome: Option<usize>) -> Result<&TraceEvent, SimError> {
        let pending = self.along_edge(id)?;
        self.commit(Some(Pick::To(id.to_string())), pending, outcome)
    }

    pub fn step(&mut self, pick: &Pick, outcome: Option<usize>) -> Result<&TraceEvent, SimError> {
        match pick {
            Pick::To(id) => self.advance_to(id, outcome),
            Pick::HumanAction(label) => {
                let pending = self.by_human(label)?;
                self.commit(Some(pick.clone()), pending, outcome)
            }
        }
    }

    /// Switches mode; the next state change is evaluated under it. Returns
    /// the latest event.
    pub fn set_mode(&mut self, mode: RunMode) -> &TraceEvent {
        self.mode = mode;
        self.selector.reset();
        self.last_event()
    }

    /// Restarts from the original start state with a fresh seed.
    pub fn reset(&mut self, seed: u64) -> Result<&TraceEvent, SimError> {
        let start = self.start.clone();
        *self = Session::start(self.scenario.clone(), self.mode, seed, &start)?;
        Ok(self.last_event())
    }

    fn along_edge(&self, id: &str) -> Result<Pending, SimError> {
        let sys = self.scenario.world.system();
        let to = sys.index_of_id(id).map_err(|_| SimError::UnknownState(id.to_string()))?;
        if !sys.free_successor_indices(self.anchor).contains(&to) {
            return Err(SimError::IllegalPick(format!(
                "`{id}` is not a free-run successor of `{}`",
                sys.state(self.anchor).label()
            )));
        }
        let base = &sys.state(self.anchor).atoms;
        let target = &sys.state(to).atoms;
        let atoms = transport(&self.atoms, base, target);
        let decided: AtomSet = base.symmetric_difference(target).cloned().collect();
        let touched = self.touched.difference(&decided).cloned().collect();
        let note = (atoms == self.atoms && base != target)
            .then(|| format!("`{id}` already reached by earlier changes; no-op"));
        Ok(Pending {
            anchor: to,
            atoms,
            touched,
            note,
        })
    }

    fn by_human(&self, label: &str) -> Result<Pending, SimError> {
        let action = self
            .scenario
            .action(label)
            .filter(|a| a.agent.human_capable())
            .ok_or_else(|| SimError::IllegalPick(format!("no human action `{label}`")))?;
        let s = WorldState {
            id: None,
            atoms: self.atoms.clone(),
        };
        let outs = apply(&s, action).map_err(|e| SimError::IllegalPick(e.to_string()))?;
        if outs.len() != 1 {
            return Err(SimError::IllegalPick(format!(
                "`{label}` is non-deterministic; pick its outcome state instead"
            )));
        }
        let atoms = outs[0].atoms.clone();
        let mut touched = self.touched.clone();
        touched.extend(self.atoms.symmetric_difference(&atoms).cloned());
        Ok(Pending {
            anchor: self.anchor,
            atoms,
            touched,
            note: None,
        })
    }

    /// Runs the decision at the pending state and, if nothing fails, makes
    /// it current.
    fn commit(&mut self, pick: Option<Pick>, pending: Pending, outcome: Option<usize>) -> Result<&TraceEvent, SimError> {
        let sc = self.scenario.clone();
        let state = WorldState {
            id: None,
            atoms: pending.atoms.clone(),
        };
        let label = label_for(&sc, pending.anchor, &pending.atoms, &pending.touched);
        let mut rng = self.rng.clone();
        let mut atoms = pending.atoms.clone();
        let mut touched = pending.touched;
        let mut notes: Vec<String> = pending.note.into_iter().collect();

        let mut event = TraceEvent {
            schema: TRACE_SCHEMA,
            step: self.trace.len(),
            pick,
            state: label.clone(),
            atoms: pending.atoms.clone(),
            mode: self.mode,
            evaluated: false,
            intention: None,
            opportunities: Vec::new(),
            chosen: None,
            dispatched: None,
            deferred: false,
            result_state: String::new(),
            result_atoms: AtomSet::new(),
            seed: self.seed,
            note: None,
        };

        if self.selector.changed(&state) {
            let d = decide(&state, &sc.world, sc.config.horizon, &self.sources(), &sc.config.scaling, &sc.config.order);
            event.evaluated = true;
            event.intention = d.intention.as_ref().map(|i| IntentionView {
                goal: i.goal.name.clone(),
                plan: i.plan.labels(),
            });
            notes.extend(d.note.clone());
            // labels of the acting state refer to the pending state here
            let entry = |c: &Candidate| {
                let mut e = self.entry(c, &state);
                if c.opportunity.acting_state == state {
                    e.acting_state = label.clone();
                }
                e
            };
            event.opportunities = d.candidates.iter().map(entry).collect();
            event.chosen = event.opportunities.first().cloned();
            event.deferred = d.deferred;
            if d.deferred {
                let c = &d.candidates[0];
                notes.push(format!(
                    "{} deferred until {}",
                    c.opportunity.name,
                    sc.world.label(&c.opportunity.acting_state)
                ));
            }
            if let Some(i) = d.dispatch {
                let c = &d.candidates[i];
                match apply(&state, &c.action) {
                    Ok(outs) => {
                        let count = outs.len();
                        let idx = match outcome {
                            Some(k) if k >= count => return Err(SimError::IllegalOutcome { index: k, count }),
                            Some(k) => k,
                            None if count > 1 => rng.random_range(0..count),
                            None => 0,
                        };
                        let next = outs[idx].atoms.clone();
                        if !sc.is_communicative(&c.action) {
                            touched.extend(atoms.symmetric_difference(&next).cloned());
                        }
                        atoms = next;
                        event.dispatched = Some(Dispatch {
                            action: c.action.label(),
                            message: c.message.clone(),
                            outcome: idx,
                            outcomes: count,
                        });
                    }
                    Err(e) => notes.push(format!("dispatch failed: {e}")),
                }
            }
        } else {
            if outcome.is_some() {
                return Err(SimError::IllegalOutcome { index: outcome.unwrap_or(0), count: 0 });
            }
            notes.push("state unchanged; nothing evaluated".to_string());
        }

        self.selector.observe(&state);
        event.result_state = label_for(&sc, pending.anchor, &atoms, &touched);
        event.result_atoms = atoms.clone();
        event.note = (!notes.is_empty()).then(|| notes.join("; "));

        log::debug!(
            "step {}: {} -> {} ({})",
            event.step,
            event.state,
            event.result_state,
            event.dispatched.as_ref().map_or("no dispatch", |d| d.action.as_str())
        );
        self.rng = rng;
        self.anchor = pending.anchor;
        self.atoms = atoms;
        self.touched = touched;
        self.trace.push(event);
        Ok(self.trace.last().expect("just pushed"))
    }
}

fn label_for(sc: &Scenario, anchor: usize, atoms: &AtomSet, touched: &AtomSet) -> String {
    let base = sc.world.system().state(anchor);
    let primed = base.atoms.symmetric_difference(atoms).any(|a| touched.contains(a));
    let mut id = base.label().to_string();
    if primed {
        id.push(PRIME);
    }
    id
}

/// Replays a trajectory of listed state ids. The first id starts the run;
/// every later id must be a ⊥-successor of the previous one.
pub fn replay(scenario: &Arc<Scenario>, mode: RunMode, trajectory: &[String], seed: u64) -> Result<Vec<TraceEvent>, SimError> {
    let Some((first, rest)) = trajectory.split_first() else {
        return Ok(Vec::new());
    };
    let mut session = Session::start(scenario.clone(), mode, seed, first)?;
    for (i, id) in rest.iter().enumerate() {
        let from = session.scenario.world.id(session.anchor).to_string();
        session.advance_to(id, None).map_err(|e| match e {
            SimError::IllegalPick(_) => SimError::NotAPath {
                step: i + 1,
                from,
                to: id.clone(),
            },
            other => other,
        })?;
    }
    Ok(session.trace)
}

/// Fixed-layout table: state, intention, activity.
pub fn render_table(events: &[TraceEvent]) -> String {
    let rows: Vec<[String; 3]> = events
        .iter()
        .map(|e| {
            let intention = match (&e.intention, e.mode.uses_hir() && e.evaluated) {
                (Some(i), _) => i.goal.clone(),
                (None, true) => "?".to_string(),
                (None, false) => "-".to_string(),
            };
            let activity = match (&e.dispatched, &e.chosen) {
                (Some(d), _) => match &d.message {
                    Some(m) => format!("{} \"{m}\"", d.action),
                    None => d.action.clone(),
                },
                (None, Some(c)) if e.deferred => format!("({} deferred to {})", c.scheme, c.acting_state),
                _ => "---".to_string(),
            };
            [e.state.clone(), intention, activity]
        })
        .collect();
    let header = ["state".to_string(), "intention".to_string(), "activity".to_string()];
    let width = |col: usize| {
        rows.iter()
            .chain(std::iter::once(&header))
            .map(|r| r[col].chars().count())
            .max()
            .unwrap_or(0)
    };
    let (w0, w1) = (width(0), width(1));
    let line = |r: &[String; 3]| {
        let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w - s.chars().count()));
        format!("{}  {}  {}", pad(&r[0], w0), pad(&r[1], w1), r[2]).trim_end().to_string() + "\n"
    };
    std::iter::once(&header).chain(rows.iter()).map(line).collect()
}
