#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use proactive_core::eqm::{GraphSystem, TableScheme};
use proactive_core::{AgentKind, Effect, Formula, GroundAction, PredicateAtom, Scenario};
use proactive_oracle::{eqm, strips};

pub fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn domestic() -> Arc<Scenario> {
    Arc::new(Scenario::load(repo().join("scenarios/domestic/domestic.scenario.json")).unwrap())
}

pub fn system(g: &eqm::Graph) -> GraphSystem {
    GraphSystem {
        succ: g.succ.clone(),
        des: g.des.clone(),
    }
}

pub fn schemes(s: &[eqm::Scheme]) -> Vec<TableScheme> {
    s.iter()
        .enumerate()
        .map(|(i, a)| TableScheme {
            name: format!("a{i}"),
            outcomes: a.dom.clone(),
        })
        .collect()
}

pub fn atom(i: u32) -> PredicateAtom {
    PredicateAtom::nullary(format!("p{i}"))
}

pub fn ground(actions: &[strips::Action]) -> Vec<GroundAction> {
    actions
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut pre: Vec<Formula> = a.pre.iter().map(|&p| Formula::Atom(atom(p))).collect();
            pre.extend(a.neg.iter().map(|&p| Formula::Not(Box::new(Formula::Atom(atom(p))))));
            GroundAction {
                name: format!("act{i:02}"),
                args: vec![],
                agent: AgentKind::Human,
                precondition: Formula::And(pre),
                effects: vec![Effect::new(
                    a.add.iter().map(|&p| atom(p)),
                    a.del.iter().map(|&p| atom(p)),
                )],
            }
        })
        .collect()
}
