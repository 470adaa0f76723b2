use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::domain::DomainModel;
use super::sexpr::{self, SExpr};
use super::{syntax, ErrorKind, PddlError};
use crate::model::{AtomSet, PredicateAtom, WorldState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemModel {
    pub name: String,
    pub domain: String,
    pub objects: Vec<String>,
    pub init: AtomSet,
    /// Positive conjunction; `None` when the problem has no `:goal` section.
    pub goal: Option<AtomSet>,
}

impl ProblemModel {
    pub fn initial_state(&self) -> WorldState {
        WorldState::new(self.init.iter().cloned())
    }
}

/// Parses a problem against its (already parsed) domain.
pub fn parse_problem(text: &str, domain: &DomainModel) -> Result<ProblemModel, PddlError> {
    let root = sexpr::read_one(text)?;
    let items = root.expect_list("`(define (problem ...) ...)`")?;
    if root.head() != Some("define") {
        return Err(syntax("expected `define`", root.pos()));
    }
    let header = items
        .get(1)
        .ok_or_else(|| syntax("missing `(problem NAME)`", root.pos()))?;
    let name = match header.as_list() {
        Some([kw, name]) if kw.as_symbol() == Some("problem") => name.expect_symbol("problem name")?.to_string(),
        _ => return Err(syntax("expected `(problem NAME)`", header.pos())),
    };

    let mut domain_name = None;
    let mut objects: Vec<String> = Vec::new();
    let mut init_section = None;
    let mut goal_section = None;
    let mut seen = BTreeSet::new();
    for section in &items[2..] {
        let list = section.expect_list("a problem section")?;
        let head = section.head().ok_or_else(|| syntax("empty section", section.pos()))?;
        if !seen.insert(head.to_string()) {
            return Err(PddlError::new(ErrorKind::Duplicate(head.to_string()), section.pos()));
        }
        match head {
            ":domain" => match list {
                [_, d] => domain_name = Some(d.expect_symbol("domain name")?.to_string()),
                _ => return Err(syntax("expected `(:domain NAME)`", section.pos())),
            },
            ":objects" => {
                let mut i = 1;
                while i < list.len() {
                    let sym = list[i].expect_symbol("an object name")?;
                    if sym == "-" {
                        let ty = list
                            .get(i + 1)
                            .ok_or_else(|| syntax("missing type after `-`", list[i].pos()))?;
                        let ty_text = ty.expect_symbol("type name")?;
                        if ty_text != "object" {
                            return Err(PddlError::new(
                                ErrorKind::UnknownConstruct(format!("type {ty_text}")),
                                ty.pos(),
                            ));
                        }
                        i += 2;
                        continue;
                    }
                    if objects.iter().any(|o| o == sym) {
                        return Err(PddlError::new(ErrorKind::Duplicate(sym.to_string()), list[i].pos()));
                    }
                    objects.push(sym.to_string());
                    i += 1;
                }
            }
            ":init" => init_section = Some(&list[1..]),
            ":goal" => match list {
                [_, g] => goal_section = Some(g),
                _ => return Err(syntax("expected `(:goal FORMULA)`", section.pos())),
            },
            other => {
                return Err(PddlError::new(ErrorKind::UnknownConstruct(other.to_string()), section.pos()));
            }
        }
    }
    let domain_name = domain_name.ok_or_else(|| syntax("missing `(:domain NAME)`", root.pos()))?;
    if domain_name != domain.name {
        return Err(syntax(
            format!("problem targets domain `{domain_name}`, not `{}`", domain.name),
            root.pos(),
        ));
    }

    let ctx = GroundCtx { domain, objects: &objects };
    let mut init = AtomSet::new();
    for e in init_section.unwrap_or(&[]) {
        init.insert(ctx.atom(e)?);
    }
    let goal = match goal_section {
        Some(g) => {
            let mut atoms = AtomSet::new();
            ctx.conjunction(g, &mut atoms)?;
            if atoms.is_empty() {
                return Err(PddlError::new(ErrorKind::EmptyGoal, g.pos()));
            }
            Some(atoms)
        }
        None => None,
    };

    Ok(ProblemModel {
        name,
        domain: domain_name,
        objects,
        init,
        goal,
    })
}

struct GroundCtx<'a> {
    domain: &'a DomainModel,
    objects: &'a [String],
}

impl GroundCtx<'_> {
    fn atom(&self, expr: &SExpr) -> Result<PredicateAtom, PddlError> {
        let list = expr.expect_list("a ground atom")?;
        let head = list.first().ok_or_else(|| syntax("empty atom", expr.pos()))?;
        let name = head.expect_symbol("predicate name")?;
        let sig = self
            .domain
            .predicate(name)
            .ok_or_else(|| PddlError::new(ErrorKind::UndeclaredPredicate(name.to_string()), head.pos()))?;
        if sig.arity() != list.len() - 1 {
            return Err(PddlError::new(
                ErrorKind::ArityMismatch {
                    predicate: name.to_string(),
                    expected: sig.arity(),
                    found: list.len() - 1,
                },
                expr.pos(),
            ));
        }
        let mut args = Vec::with_capacity(sig.arity());
        for a in &list[1..] {
            let obj = a.expect_symbol("an object")?;
            if !self.objects.iter().any(|o| o == obj) {
                return Err(PddlError::new(ErrorKind::UndeclaredObject(obj.to_string()), a.pos()));
            }
            args.push(obj.to_string());
        }
        Ok(PredicateAtom::new(name, args))
    }

    fn conjunction(&self, expr: &SExpr, out: &mut AtomSet) -> Result<(), PddlError> {
        match expr.head() {
            Some("and") => {
                for e in &expr.expect_list("a goal")?[1..] {
                    self.conjunction(e, out)?;
                }
                Ok(())
            }
            Some(kw @ ("or" | "not" | "imply" | "forall" | "exists")) => Err(PddlError::new(
                ErrorKind::UnknownConstruct(format!("{kw} in goal")),
                expr.pos(),
            )),
            _ => {
                out.insert(self.atom(expr)?);
                Ok(())
            }
        }
    }
}

/// Canonical text of a problem. Atoms are written in their set order.
pub fn render_problem(p: &ProblemModel) -> String {
    let mut out = format!("(define (problem {})\n  (:domain {})\n", p.name, p.domain);
    out.push_str("  (:objects");
    for o in &p.objects {
        let _ = write!(out, " {o}");
    }
    out.push_str(")\n  (:init");
    for a in &p.init {
        let _ = write!(out, "\n    {a}");
    }
    out.push_str(")\n");
    if let Some(goal) = &p.goal {
        out.push_str("  (:goal (and");
        for a in goal {
            let _ = write!(out, "\n    {a}");
        }
        out.push_str("))\n");
    }
    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::parse_domain;

    const DOMAIN: &str = "(define (domain d)
      (:predicates (gathered ?o) (human-outside) (human-at-home)))";

    fn domain() -> DomainModel {
        parse_domain(DOMAIN).unwrap()
    }

    #[test]
    fn hiking_goal_block() {
        let p = parse_problem(
            "(define (problem hike) (:domain d)
               (:objects backpack compass water-bottle - object)
               (:init (human-at-home))
               (:goal (and (gathered backpack) (gathered compass) (gathered water-bottle) (human-outside))))",
            &domain(),
        )
        .unwrap();
        let goal = p.goal.unwrap();
        assert_eq!(goal.len(), 4);
        assert!(goal.contains(&PredicateAtom::new("gathered", ["water-bottle"])));
        assert!(goal.contains(&PredicateAtom::nullary("human-outside")));
    }

    #[test]
    fn empty_init() {
        let p = parse_problem("(define (problem p) (:domain d) (:objects) (:init))", &domain()).unwrap();
        assert!(p.initial_state().atoms.is_empty());
        assert_eq!(p.goal, None);
    }

    #[test]
    fn undeclared_names_are_positioned() {
        let err = parse_problem(
            "(define (problem p) (:domain d)\n (:objects a)\n (:init (gathered b)))",
            &domain(),
        )
        .unwrap_err();
        assert_eq!(err.kind, ErrorKind::UndeclaredObject("b".into()));
        assert_eq!(err.pos.line, 3);
        let err = parse_problem("(define (problem p) (:domain d) (:init (rain)))", &domain()).unwrap_err();
        assert_eq!(err.kind, ErrorKind::UndeclaredPredicate("rain".into()));
    }

    #[test]
    fn render_is_a_fixpoint() {
        let p = parse_problem(
            "(define (problem p) (:domain d) (:objects hat dog) (:init (human-at-home) (gathered dog))
               (:goal (and (gathered hat) (human-outside))))",
            &domain(),
        )
        .unwrap();
        let text = render_problem(&p);
        let again = parse_problem(&text, &domain()).unwrap();
        assert_eq!(again, p);
        assert_eq!(render_problem(&again), text);
    }
}
