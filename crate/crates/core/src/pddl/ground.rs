use std::collections::HashMap;

use super::domain::{DomainModel, LiftedAction, LiftedAtom, Term};
use crate::model::{Effect, GroundAction, PredicateAtom};

/// Instantiates every action over every binding of its parameters to
/// `objects`. Bindings are enumerated in object order, first parameter
/// slowest, so the output order is stable.
pub fn ground(domain: &DomainModel, objects: &[String]) -> Vec<GroundAction> {
    let mut out = Vec::new();
    for action in &domain.actions {
        let arity = action.parameters.len();
        let n = objects.len();
        let total = n.pow(arity as u32);
        for code in 0..total {
            let mut binding: HashMap<&str, &str> = HashMap::with_capacity(arity);
            let mut rest = code;
            for p in action.parameters.iter().rev() {
                binding.insert(p.as_str(), objects[rest % n].as_str());
                rest /= n;
            }
            out.push(instantiate(action, &binding));
        }
    }
    out
}

fn bind(atom: &LiftedAtom, binding: &HashMap<&str, &str>) -> PredicateAtom {
    PredicateAtom::new(
        atom.predicate.clone(),
        atom.terms.iter().map(|t| match t {
            Term::Var(v) => binding[v.as_str()].to_string(),
            Term::Const(c) => c.clone(),
        }),
    )
}

fn instantiate(action: &LiftedAction, binding: &HashMap<&str, &str>) -> GroundAction {
    let precondition = action
        .precondition
        .map::<_, std::convert::Infallible>(&mut |a| Ok(bind(a, binding)))
        .unwrap_or_else(|e| match e {});
    let effects = action
        .effects
        .iter()
        .map(|e| {
            Effect::new(
                e.add.iter().map(|a| bind(a, binding)),
                e.del.iter().map(|a| bind(a, binding)),
            )
        })
        .collect();
    GroundAction {
        name: action.name.clone(),
        args: action
            .parameters
            .iter()
            .map(|p| binding[p.as_str()].to_string())
            .collect(),
        agent: action.agent,
        precondition,
        effects,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::parse_domain;

    const DOMAIN: &str = "(define (domain d)
      (:predicates (gathered ?o) (human-at-home) (near ?a ?b))
      (:action gather :parameters (?o) :precondition (human-at-home) :effect (gathered ?o))
      (:action leave-home :agent human :precondition (human-at-home) :effect (not (human-at-home)))
      (:action pair :parameters (?a ?b) :effect (near ?a ?b)))";

    fn objects(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("o{i}")).collect()
    }

    #[test]
    fn counts_follow_arity() {
        let d = parse_domain(DOMAIN).unwrap();
        let ground = ground(&d, &objects(10));
        assert_eq!(ground.iter().filter(|a| a.name == "gather").count(), 10);
        assert_eq!(ground.iter().filter(|a| a.name == "leave-home").count(), 1);
        assert_eq!(ground.iter().filter(|a| a.name == "pair").count(), 100);
    }

    #[test]
    fn no_objects() {
        let d = parse_domain(DOMAIN).unwrap();
        let ground = ground(&d, &[]);
        assert_eq!(ground.len(), 1);
        assert_eq!(ground[0].label(), "leave-home");
    }

    #[test]
    fn binding_order_is_stable() {
        let d = parse_domain(DOMAIN).unwrap();
        let labels: Vec<String> = ground(&d, &objects(2)).iter().map(GroundAction::label).collect();
        assert_eq!(
            labels,
            vec![
                "gather(o0)",
                "gather(o1)",
                "leave-home",
                "pair(o0,o0)",
                "pair(o0,o1)",
                "pair(o1,o0)",
                "pair(o1,o1)"
            ]
        );
    }
}
