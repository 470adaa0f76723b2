//! Exact shortest-plan distances on small STRIPS problems.

use std::collections::{BTreeMap, BTreeSet};

pub type State = BTreeSet<u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub pre: Vec<u32>,
    pub neg: Vec<u32>,
    pub add: Vec<u32>,
    pub del: Vec<u32>,
}

impl Action {
    pub fn applies(&self, s: &State) -> bool {
        self.pre.iter().all(|a| s.contains(a)) && self.neg.iter().all(|a| !s.contains(a))
    }

    pub fn apply(&self, s: &State) -> State {
        let mut t = s.clone();
        for a in &self.del {
            t.remove(a);
        }
        t.extend(self.add.iter().copied());
        t
    }
}

/// Every state reachable from `start`, with its successor list. `None` if
/// there are more than `cap`.
pub fn reachable(start: &State, actions: &[Action], cap: usize) -> Option<(Vec<State>, Vec<Vec<usize>>)> {
    let mut index: BTreeMap<State, usize> = BTreeMap::new();
    let mut states = vec![start.clone()];
    index.insert(start.clone(), 0);
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut stack = vec![0];
    let mut done = vec![false];
    while let Some(i) = stack.pop() {
        if done[i] {
            continue;
        }
        done[i] = true;
        let s = states[i].clone();
        let mut out = Vec::new();
        for a in actions.iter().filter(|a| a.applies(&s)) {
            let t = a.apply(&s);
            let j = match index.get(&t) {
                Some(&j) => j,
                None => {
                    let j = states.len();
                    if j >= cap {
                        return None;
                    }
                    index.insert(t.clone(), j);
                    states.push(t);
                    done.push(false);
                    stack.push(j);
                    j
                }
            };
            out.push(j);
        }
        if edges.len() <= i {
            edges.resize(i + 1, Vec::new());
        }
        edges[i] = out;
    }
    edges.resize(states.len(), Vec::new());
    Some((states, edges))
}

/// Bellman-Ford from the goal states backwards.
pub fn distance(start: &State, goal: &State, actions: &[Action], cap: usize) -> Option<Option<usize>> {
    let (states, edges) = reachable(start, actions, cap)?;
    let n = states.len();
    let mut dist: Vec<Option<usize>> = states.iter().map(|s| goal.is_subset(s).then_some(0)).collect();
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            for &v in &edges[u] {
                if let Some(dv) = dist[v] {
                    if dist[u].is_none_or(|du| dv + 1 < du) {
                        dist[u] = Some(dv + 1);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Some(dist[0])
}
