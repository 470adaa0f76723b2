//! Breadth-first forward search over ground STRIPS actions.
//!
//! States are compiled to bitsets over the atoms mentioned by the actions.
//! Every action costs one step. Among equally short plans the canonical one
//! is picked by walking back from the goal: each state remembers the parent
//! reached through the lexicographically smallest action label (ties on the
//! label go to the earlier-discovered parent), and among goal states at the
//! minimal depth the same rule picks the final step.

use std::collections::HashMap;

use crate::model::{AgentKind, AtomSet, Formula, Goal, GroundAction, PredicateAtom, WorldState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub steps: Vec<GroundAction>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn first(&self) -> Option<&GroundAction> {
        self.steps.first()
    }

    pub fn labels(&self) -> Vec<String> {
        self.steps.iter().map(GroundAction::label).collect()
    }
}

type Bits = Box<[u64]>;

#[derive(Debug, Clone)]
struct CompiledAction {
    source: GroundAction,
    pre: Formula<usize>,
    effects: Vec<(Bits, Bits)>,
}

#[derive(Debug, Clone)]
struct CompiledGoal {
    mask: Bits,
    /// Goal atoms no action mentions; they hold forever or never.
    constant_ok: bool,
}

struct Node {
    bits: Bits,
    depth: usize,
    /// (action index, parent node index)
    parent: Option<(usize, usize)>,
}

/// Search problem compiled once for a fixed action set.
#[derive(Debug, Clone)]
pub struct Planner {
    actions: Vec<CompiledAction>,
    index: HashMap<PredicateAtom, usize>,
    words: usize,
}

fn get(bits: &[u64], i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

fn set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

impl Planner {
    /// Keeps the actions whose agent tag is in `actors`.
    pub fn new(actions: &[GroundAction], actors: &[AgentKind]) -> Self {
        let mut kept: Vec<&GroundAction> = actions.iter().filter(|a| actors.contains(&a.agent)).collect();
        kept.sort_by_cached_key(|a| a.label());

        let mut index: HashMap<PredicateAtom, usize> = HashMap::new();
        let mut intern = |a: &PredicateAtom| {
            let next = index.len();
            *index.entry(a.clone()).or_insert(next)
        };
        let mut pre = Vec::with_capacity(kept.len());
        let mut effects_idx = Vec::with_capacity(kept.len());
        for a in &kept {
            pre.push(
                a.precondition
                    .map::<_, std::convert::Infallible>(&mut |atom| Ok(intern(atom)))
                    .unwrap_or_else(|e| match e {}),
            );
            let effs: Vec<(Vec<usize>, Vec<usize>)> = a
                .effects
                .iter()
                .map(|e| (e.add.iter().map(&mut intern).collect(), e.del.iter().map(&mut intern).collect()))
                .collect();
            effects_idx.push(effs);
        }
        let words = index.len().div_ceil(64).max(1);
        let mask_of = |ids: &[usize]| {
            let mut b = vec![0u64; words].into_boxed_slice();
            for &i in ids {
                set(&mut b, i);
            }
            b
        };
        let actions = kept
            .into_iter()
            .zip(pre)
            .zip(effects_idx)
            .map(|((a, pre), effs)| CompiledAction {
                source: a.clone(),
                pre,
                effects: effs.iter().map(|(add, del)| (mask_of(add), mask_of(del))).collect(),
            })
            .collect();
        Planner { actions, index, words }
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    fn encode(&self, atoms: &AtomSet) -> Bits {
        let mut b = vec![0u64; self.words].into_boxed_slice();
        for a in atoms {
            if let Some(&i) = self.index.get(a) {
                set(&mut b, i);
            }
        }
        b
    }

    fn compile_goal(&self, goal: &AtomSet, start: &AtomSet) -> CompiledGoal {
        let mut mask = vec![0u64; self.words].into_boxed_slice();
        let mut constant_ok = true;
        for a in goal {
            match self.index.get(a) {
                Some(&i) => set(&mut mask, i),
                None => constant_ok &= start.contains(a),
            }
        }
        CompiledGoal { mask, constant_ok }
    }

    fn satisfies(bits: &[u64], goal: &CompiledGoal) -> bool {
        goal.constant_ok && bits.iter().zip(goal.mask.iter()).all(|(b, m)| b & m == *m)
    }

    fn successor(bits: &[u64], (add, del): &(Bits, Bits)) -> Bits {
        bits.iter()
            .zip(add.iter())
            .zip(del.iter())
            .map(|((b, a), d)| (b & !d) | a)
            .collect()
    }

    /// Shortest plan to a single goal.
    pub fn shortest_plan(&self, start: &WorldState, goal: &Goal) -> Option<Plan> {
        self.plans(start, &[&goal.atoms]).pop().flatten()
    }

    /// Shortest plans from `start` to each goal, found in one search.
    pub fn plans(&self, start: &WorldState, goals: &[&AtomSet]) -> Vec<Option<Plan>> {
        let compiled: Vec<CompiledGoal> = goals.iter().map(|g| self.compile_goal(g, &start.atoms)).collect();
        let mut results: Vec<Option<Option<Plan>>> = vec![None; goals.len()];
        let mut unresolved = goals.len();

        let root = self.encode(&start.atoms);
        for (g, cg) in compiled.iter().enumerate() {
            if !cg.constant_ok {
                results[g] = Some(None);
                unresolved -= 1;
            } else if Self::satisfies(&root, cg) {
                results[g] = Some(Some(Plan { steps: Vec::new() }));
                unresolved -= 1;
            }
        }

        let mut nodes = vec![Node {
            bits: root.clone(),
            depth: 0,
            parent: None,
        }];
        let mut seen: HashMap<Bits, usize> = HashMap::from([(root, 0)]);
        let mut frontier = vec![0usize];
        let mut depth = 0;
        while unresolved > 0 && !frontier.is_empty() {
            let mut next = Vec::new();
            // (goal, action, parent) for non-deterministic final steps
            let mut finals: Vec<(usize, usize, usize)> = Vec::new();
            for &p in &frontier {
                for (ai, a) in self.actions.iter().enumerate() {
                    let bits = &nodes[p].bits;
                    if !a.pre.eval_with(&|&i| get(bits, i)) {
                        continue;
                    }
                    if a.effects.len() == 1 {
                        let succ = Self::successor(bits, &a.effects[0]);
                        match seen.get(&succ) {
                            None => {
                                let n = nodes.len();
                                seen.insert(succ.clone(), n);
                                nodes.push(Node {
                                    bits: succ,
                                    depth: depth + 1,
                                    parent: Some((ai, p)),
                                });
                                next.push(n);
                            }
                            Some(&n) if nodes[n].depth == depth + 1 => {
                                let cur = nodes[n].parent.expect("non-root has a parent");
                                if (ai, p) < cur {
                                    nodes[n].parent = Some((ai, p));
                                }
                            }
                            Some(_) => {}
                        }
                    } else {
                        let outcomes: Vec<Bits> = a.effects.iter().map(|e| Self::successor(bits, e)).collect();
                        for (g, cg) in compiled.iter().enumerate() {
                            if results[g].is_none() && outcomes.iter().all(|o| Self::satisfies(o, cg)) {
                                finals.push((g, ai, p));
                            }
                        }
                    }
                }
            }
            for (g, cg) in compiled.iter().enumerate() {
                if results[g].is_some() {
                    continue;
                }
                let mut best: Option<((usize, usize), Option<usize>)> = None;
                for &n in &next {
                    if Self::satisfies(&nodes[n].bits, cg) {
                        let key = nodes[n].parent.expect("non-root has a parent");
                        if best.is_none_or(|(k, _)| key < k) {
                            best = Some((key, Some(n)));
                        }
                    }
                }
                for &(fg, ai, p) in &finals {
                    if fg == g && best.is_none_or(|(k, _)| (ai, p) < k) {
                        best = Some(((ai, p), None));
                    }
                }
                if let Some(((ai, p), node)) = best {
                    let plan = match node {
                        Some(n) => self.backtrace(&nodes, n),
                        None => {
                            let mut steps = self.backtrace(&nodes, p).steps;
                            steps.push(self.actions[ai].source.clone());
                            Plan { steps }
                        }
                    };
                    results[g] = Some(Some(plan));
                    unresolved -= 1;
                }
            }
            frontier = next;
            depth += 1;
        }
        results.into_iter().map(Option::flatten).collect()
    }

    fn backtrace(&self, nodes: &[Node], mut n: usize) -> Plan {
        let mut steps = Vec::with_capacity(nodes[n].depth);
        while let Some((ai, p)) = nodes[n].parent {
            steps.push(self.actions[ai].source.clone());
            n = p;
        }
        steps.reverse();
        Plan { steps }
    }
}

/// One-shot convenience wrapper around [`Planner`].
pub fn shortest_plan(start: &WorldState, goal: &Goal, actions: &[GroundAction], actors: &[AgentKind]) -> Option<Plan> {
    Planner::new(actions, actors).shortest_plan(start, goal)
}

/// Agent tags whose actions a human could perform.
pub const HUMAN_CAPABLE: &[AgentKind] = &[AgentKind::Human, AgentKind::Both];

/// Every agent tag.
pub const ANY_AGENT: &[AgentKind] = &[AgentKind::Human, AgentKind::Robot, AgentKind::Both];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Effect;

    fn atom(s: &str) -> PredicateAtom {
        s.parse().unwrap()
    }

    fn act(name: &str, pre: &[&str], add: &[&str], del: &[&str]) -> GroundAction {
        GroundAction {
            name: name.into(),
            args: vec![],
            agent: AgentKind::Both,
            precondition: Formula::And(pre.iter().map(|p| Formula::Atom(atom(p))).collect()),
            effects: vec![Effect::new(add.iter().map(|a| atom(a)), del.iter().map(|a| atom(a)))],
        }
    }

    #[test]
    fn already_satisfied_is_empty_plan() {
        let s = WorldState::new([atom("(p)")]);
        let g = Goal::new("g", [atom("(p)")]).unwrap();
        assert_eq!(shortest_plan(&s, &g, &[], ANY_AGENT).unwrap().len(), 0);
    }

    #[test]
    fn unreachable_goal() {
        let s = WorldState::default();
        let g = Goal::new("g", [atom("(never)")]).unwrap();
        let acts = [act("a", &[], &["(p)"], &[])];
        assert_eq!(shortest_plan(&s, &g, &acts, ANY_AGENT), None);
    }

    #[test]
    fn chain_and_tie_break() {
        // two orders reach (a)(b); the last step is the smaller label among
        // the two final candidates
        let acts = [act("x", &[], &["(a)"], &[]), act("y", &[], &["(b)"], &[])];
        let g = Goal::new("g", [atom("(a)"), atom("(b)")]).unwrap();
        let plan = shortest_plan(&WorldState::default(), &g, &acts, ANY_AGENT).unwrap();
        assert_eq!(plan.labels(), vec!["y", "x"]);
    }

    #[test]
    fn actor_filter() {
        let mut robot_only = act("r", &[], &["(p)"], &[]);
        robot_only.agent = AgentKind::Robot;
        let g = Goal::new("g", [atom("(p)")]).unwrap();
        assert_eq!(shortest_plan(&WorldState::default(), &g, &[robot_only.clone()], HUMAN_CAPABLE), None);
        assert!(shortest_plan(&WorldState::default(), &g, &[robot_only], ANY_AGENT).is_some());
    }

    #[test]
    fn non_deterministic_only_as_last_step() {
        let mut coin = act("coin", &[], &[], &[]);
        coin.effects = vec![
            Effect::new([atom("(heads)"), atom("(done)")], []),
            Effect::new([atom("(tails)"), atom("(done)")], []),
        ];
        let s = WorldState::default();
        let done = Goal::new("g", [atom("(done)")]).unwrap();
        let plan = shortest_plan(&s, &done, &[coin.clone()], ANY_AGENT).unwrap();
        assert_eq!(plan.labels(), vec!["coin"]);
        let heads = Goal::new("h", [atom("(heads)")]).unwrap();
        assert_eq!(shortest_plan(&s, &heads, &[coin], ANY_AGENT), None);
    }

    #[test]
    fn multi_goal_search_matches_single() {
        let acts = [
            act("a", &[], &["(p)"], &[]),
            act("b", &["(p)"], &["(q)"], &[]),
            act("c", &["(q)"], &["(r)"], &["(p)"]),
        ];
        let planner = Planner::new(&acts, ANY_AGENT);
        let goals: Vec<AtomSet> = vec![
            [atom("(r)")].into_iter().collect(),
            [atom("(q)")].into_iter().collect(),
            [atom("(zz)")].into_iter().collect(),
        ];
        let refs: Vec<&AtomSet> = goals.iter().collect();
        let together = planner.plans(&WorldState::default(), &refs);
        for (g, plan) in goals.iter().zip(&together) {
            let single = planner.plans(&WorldState::default(), &[g]).pop().unwrap();
            assert_eq!(&single, plan);
        }
        assert_eq!(together[0].as_ref().unwrap().len(), 3);
        assert_eq!(together[2], None);
    }
}
