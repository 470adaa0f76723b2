//! The authored state graph extended to every atom set.
//!
//! Robot actions produce atom sets that the graph may not list. Such a state
//! takes its desirability from the nearest listed state (fewest differing
//! atoms, earlier listing wins ties) and evolves like its base state: along
//! each base edge the atoms the edge changes are taken from the target,
//! while the state's own differences from the base are carried over.

use serde::{Deserialize, Serialize};

use crate::eqm::FreeRun;
use crate::model::{AtomSet, DesirabilityMap, DynamicSystem, InputLabel, ModelError, PredicateAtom, WorldState};

#[derive(Debug, Clone)]
pub struct World {
    sys: DynamicSystem,
    des: DesirabilityMap,
    /// For each listed state, the state it is a variant of.
    anchors: Vec<Option<usize>>,
}

fn sym_diff_len(a: &AtomSet, b: &AtomSet) -> usize {
    a.len() + b.len() - 2 * a.intersection(b).count()
}

/// Moves `x` along the base edge `b → t`.
pub fn transport(x: &AtomSet, b: &AtomSet, t: &AtomSet) -> AtomSet {
    let changed: AtomSet = b.symmetric_difference(t).cloned().collect();
    let mut out: AtomSet = t
        .iter()
        .filter(|a| changed.contains(*a) || x.contains(*a) || !b.contains(*a))
        .cloned()
        .collect();
    out.extend(x.difference(b).filter(|a| !changed.contains(*a)).cloned());
    out
}

impl World {
    pub fn new(sys: DynamicSystem, des: DesirabilityMap, anchors: Vec<Option<usize>>) -> Result<Self, ModelError> {
        assert_eq!(anchors.len(), sys.states().len(), "one anchor slot per state");
        for s in sys.states() {
            if s.id.is_none() {
                return Err(ModelError::UnknownState(s.to_string()));
            }
        }
        Ok(World { sys, des, anchors })
    }

    pub fn system(&self) -> &DynamicSystem {
        &self.sys
    }

    pub fn desmap(&self) -> &DesirabilityMap {
        &self.des
    }

    pub fn anchor(&self, idx: usize) -> Option<usize> {
        self.anchors[idx]
    }

    pub fn listed(&self, s: &WorldState) -> Option<usize> {
        self.sys.index_of(s)
    }

    pub fn id(&self, idx: usize) -> &str {
        self.sys.state(idx).label()
    }

    /// Listed state closest to `atoms`.
    pub fn nearest(&self, atoms: &AtomSet) -> usize {
        if let Some(i) = self.sys.index_of(&WorldState { id: None, atoms: atoms.clone() }) {
            return i;
        }
        let mut best = 0;
        let mut best_d = usize::MAX;
        for (i, s) in self.sys.states().iter().enumerate() {
            let d = sym_diff_len(atoms, &s.atoms);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// The base state whose edges `atoms` follows.
    pub fn base_of(&self, atoms: &AtomSet) -> usize {
        let n = self.nearest(atoms);
        self.anchors[n].unwrap_or(n)
    }

    /// Display label: the listed id, or `~id` of the nearest listed state.
    pub fn label(&self, s: &WorldState) -> String {
        match self.sys.index_of(s) {
            Some(i) => self.id(i).to_string(),
            None => format!("~{}", self.id(self.nearest(&s.atoms))),
        }
    }

    fn named(&self, atoms: AtomSet) -> WorldState {
        let id = self.sys.index_of(&WorldState { id: None, atoms: atoms.clone() }).map(|i| self.id(i).to_string());
        WorldState { id, atoms }
    }

    /// Listed state by id.
    pub fn state(&self, id: &str) -> Result<WorldState, ModelError> {
        self.sys.by_id(id).cloned()
    }

    pub fn graph_view(&self) -> GraphView {
        GraphView {
            states: self
                .sys
                .states()
                .iter()
                .enumerate()
                .map(|(i, s)| StateView {
                    id: self.id(i).to_string(),
                    atoms: s.atoms.iter().cloned().collect(),
                    des: self.des.degree(self.id(i)),
                    variant_of: self.anchors[i].map(|a| self.id(a).to_string()),
                })
                .collect(),
            edges: self
                .sys
                .transitions()
                .iter()
                .map(|t| EdgeView {
                    from: self.id(t.from).to_string(),
                    label: t.label.clone(),
                    to: self.id(t.to).to_string(),
                })
                .collect(),
        }
    }
}

impl FreeRun for World {
    type State = WorldState;

    fn successors(&self, s: &WorldState) -> Vec<WorldState> {
        if let Some(i) = self.sys.index_of(s) {
            let explicit = self.sys.explicit_free_successors(i);
            if !explicit.is_empty() {
                return explicit.into_iter().map(|j| self.sys.state(j).clone()).collect();
            }
        }
        let b = self.base_of(&s.atoms);
        let edges = self.sys.explicit_free_successors(b);
        if edges.is_empty() {
            return vec![self.named(s.atoms.clone())];
        }
        let base = &self.sys.state(b).atoms;
        let mut out: Vec<WorldState> = edges
            .into_iter()
            .map(|t| self.named(transport(&s.atoms, base, &self.sys.state(t).atoms)))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn des(&self, s: &WorldState) -> f64 {
        self.des.degree(self.id(self.nearest(&s.atoms)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub id: String,
    pub atoms: Vec<PredicateAtom>,
    pub des: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant_of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeView {
    pub from: String,
    pub label: InputLabel,
    pub to: String,
}

/// The whole authored graph in serializable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphView {
    pub states: Vec<StateView>,
    pub edges: Vec<EdgeView>,
}
