mod common;

use proactive_core::pddl::ground;
use proactive_core::{parse_domain, parse_problem, Goal, PredicateAtom, Recognizer, WorldState};
use serde::Deserialize;

#[derive(Deserialize)]
struct GoalCase {
    name: String,
    atoms: Vec<PredicateAtom>,
}

#[derive(Deserialize)]
struct Case {
    name: String,
    state: Vec<PredicateAtom>,
    goals: Vec<GoalCase>,
    expect: Option<String>,
}

#[derive(Deserialize)]
struct Fixture {
    domain: String,
    problem: String,
    cases: Vec<Case>,
}

#[test]
fn fixture_set() {
    let dir = common::repo().join("scenarios/fixtures");
    let fx: Fixture = serde_json::from_str(&std::fs::read_to_string(dir.join("hir_cases.json")).unwrap()).unwrap();
    let domain = parse_domain(&std::fs::read_to_string(dir.join(&fx.domain)).unwrap()).unwrap();
    let problem = parse_problem(&std::fs::read_to_string(dir.join(&fx.problem)).unwrap(), &domain).unwrap();
    let actions = ground(&domain, &problem.objects);
    assert_eq!(fx.cases.len(), 20);
    for c in &fx.cases {
        let goals = c
            .goals
            .iter()
            .map(|g| Goal::new(g.name.clone(), g.atoms.iter().cloned()).unwrap())
            .collect();
        let r = Recognizer::new(&actions, goals);
        let got = r.recognize(&WorldState::new(c.state.iter().cloned())).map(|i| i.goal.name.clone());
        assert_eq!(got, c.expect, "case `{}`", c.name);
    }
}
