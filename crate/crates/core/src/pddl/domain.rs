use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use super::sexpr::{self, SExpr};
use super::{syntax, ErrorKind, PddlError};
use crate::model::{AgentKind, Formula};

const REQUIREMENTS: &[&str] = &[
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":disjunctive-preconditions",
    ":non-deterministic",
];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LiftedAtom {
    pub predicate: String,
    pub terms: Vec<Term>,
}

impl fmt::Display for LiftedAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for t in &self.terms {
            write!(f, " {t}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LiftedEffect {
    pub add: Vec<LiftedAtom>,
    pub del: Vec<LiftedAtom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedAction {
    pub name: String,
    pub parameters: Vec<String>,
    pub agent: AgentKind,
    pub precondition: Formula<LiftedAtom>,
    pub effects: Vec<LiftedEffect>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSig {
    pub name: String,
    pub params: Vec<String>,
}

impl PredicateSig {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainModel {
    pub name: String,
    pub requirements: Vec<String>,
    pub predicates: Vec<PredicateSig>,
    pub actions: Vec<LiftedAction>,
}

impl DomainModel {
    pub fn predicate(&self, name: &str) -> Option<&PredicateSig> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&LiftedAction> {
        self.actions.iter().find(|a| a.name == name)
    }
}

pub fn parse_domain(text: &str) -> Result<DomainModel, PddlError> {
    let root = sexpr::read_one(text)?;
    let items = root.expect_list("`(define (domain ...) ...)`")?;
    if root.head() != Some("define") {
        return Err(syntax("expected `define`", root.pos()));
    }
    let header = items
        .get(1)
        .ok_or_else(|| syntax("missing `(domain NAME)`", root.pos()))?;
    let name = match header.as_list() {
        Some([kw, name]) if kw.as_symbol() == Some("domain") => name.expect_symbol("domain name")?.to_string(),
        _ => return Err(syntax("expected `(domain NAME)`", header.pos())),
    };

    let mut requirements = Vec::new();
    let mut predicate_section = None;
    let mut action_sections = Vec::new();
    let mut seen = BTreeSet::new();
    for section in &items[2..] {
        let list = section.expect_list("a domain section")?;
        let head = section.head().ok_or_else(|| syntax("empty section", section.pos()))?;
        if head != ":action" && !seen.insert(head.to_string()) {
            return Err(PddlError::new(ErrorKind::Duplicate(head.to_string()), section.pos()));
        }
        match head {
            ":requirements" => {
                for r in &list[1..] {
                    let r_text = r.expect_symbol("requirement flag")?;
                    if !REQUIREMENTS.contains(&r_text) {
                        return Err(PddlError::new(ErrorKind::UnknownConstruct(r_text.to_string()), r.pos()));
                    }
                    requirements.push(r_text.to_string());
                }
            }
            ":types" => {
                for t in &list[1..] {
                    let t_text = t.expect_symbol("type name")?;
                    if t_text != "object" {
                        return Err(PddlError::new(
                            ErrorKind::UnknownConstruct(format!("type {t_text}")),
                            t.pos(),
                        ));
                    }
                }
            }
            ":predicates" => predicate_section = Some(&list[1..]),
            ":action" => action_sections.push(section),
            other => {
                return Err(PddlError::new(ErrorKind::UnknownConstruct(other.to_string()), section.pos()));
            }
        }
    }

    let mut predicates: Vec<PredicateSig> = Vec::new();
    for p in predicate_section.unwrap_or(&[]) {
        let list = p.expect_list("predicate signature")?;
        let pname = list
            .first()
            .ok_or_else(|| syntax("empty predicate signature", p.pos()))?
            .expect_symbol("predicate name")?;
        if predicates.iter().any(|q| q.name == pname) {
            return Err(PddlError::new(ErrorKind::Duplicate(pname.to_string()), p.pos()));
        }
        let params = parse_parameters(&list[1..])?;
        predicates.push(PredicateSig {
            name: pname.to_string(),
            params,
        });
    }
    let arities: BTreeMap<&str, usize> = predicates.iter().map(|p| (p.name.as_str(), p.arity())).collect();

    let mut actions: Vec<LiftedAction> = Vec::new();
    for section in action_sections {
        let action = parse_action(section, &arities)?;
        if actions.iter().any(|a| a.name == action.name) {
            return Err(PddlError::new(ErrorKind::Duplicate(action.name), section.pos()));
        }
        actions.push(action);
    }

    Ok(DomainModel {
        name,
        requirements,
        predicates,
        actions,
    })
}

/// `?a ?b - object ?c` → `[a, b, c]`.
fn parse_parameters(items: &[SExpr]) -> Result<Vec<String>, PddlError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let sym = items[i].expect_symbol("parameter")?;
        if sym == "-" {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| syntax("missing type after `-`", items[i].pos()))?;
            let ty_text = ty.expect_symbol("type name")?;
            if ty_text != "object" {
                return Err(PddlError::new(ErrorKind::UnknownConstruct(format!("type {ty_text}")), ty.pos()));
            }
            i += 2;
            continue;
        }
        let var = sym
            .strip_prefix('?')
            .filter(|v| !v.is_empty())
            .ok_or_else(|| syntax(format!("expected a `?variable`, found `{sym}`"), items[i].pos()))?;
        if out.iter().any(|v| v == var) {
            return Err(PddlError::new(ErrorKind::Duplicate(format!("?{var}")), items[i].pos()));
        }
        out.push(var.to_string());
        i += 1;
    }
    Ok(out)
}

struct ActionCtx<'a> {
    arities: &'a BTreeMap<&'a str, usize>,
    params: &'a [String],
}

impl ActionCtx<'_> {
    fn atom(&self, expr: &SExpr) -> Result<LiftedAtom, PddlError> {
        let list = expr.expect_list("an atom")?;
        let head = list.first().ok_or_else(|| syntax("empty atom", expr.pos()))?;
        let predicate = head.expect_symbol("predicate name")?;
        let expected = *self
            .arities
            .get(predicate)
            .ok_or_else(|| PddlError::new(ErrorKind::UndeclaredPredicate(predicate.to_string()), head.pos()))?;
        if expected != list.len() - 1 {
            return Err(PddlError::new(
                ErrorKind::ArityMismatch {
                    predicate: predicate.to_string(),
                    expected,
                    found: list.len() - 1,
                },
                expr.pos(),
            ));
        }
        let mut terms = Vec::with_capacity(expected);
        for t in &list[1..] {
            let text = t.expect_symbol("a term")?;
            match text.strip_prefix('?') {
                Some(v) => {
                    if !self.params.iter().any(|p| p == v) {
                        return Err(PddlError::new(ErrorKind::UnboundVariable(v.to_string()), t.pos()));
                    }
                    terms.push(Term::Var(v.to_string()));
                }
                None => terms.push(Term::Const(text.to_string())),
            }
        }
        Ok(LiftedAtom {
            predicate: predicate.to_string(),
            terms,
        })
    }

    fn formula(&self, expr: &SExpr) -> Result<Formula<LiftedAtom>, PddlError> {
        let list = expr.expect_list("a formula")?;
        match expr.head() {
            Some("and") => Ok(Formula::And(
                list[1..].iter().map(|e| self.formula(e)).collect::<Result<_, _>>()?,
            )),
            Some("or") => Ok(Formula::Or(
                list[1..].iter().map(|e| self.formula(e)).collect::<Result<_, _>>()?,
            )),
            Some("not") => match list {
                [_, inner] => Ok(Formula::Not(Box::new(self.formula(inner)?))),
                _ => Err(syntax("`not` takes exactly one argument", expr.pos())),
            },
            Some(kw @ ("imply" | "forall" | "exists" | "when" | "=")) => {
                Err(PddlError::new(ErrorKind::UnknownConstruct(kw.to_string()), expr.pos()))
            }
            _ => Ok(Formula::Atom(self.atom(expr)?)),
        }
    }

    fn effects(&self, expr: &SExpr) -> Result<Vec<LiftedEffect>, PddlError> {
        match expr.head() {
            Some("oneof" | "or") => {
                let list = expr.expect_list("an effect")?;
                if list.len() < 2 {
                    return Err(syntax("`oneof` needs at least one alternative", expr.pos()));
                }
                list[1..].iter().map(|e| self.simple_effect(e)).collect()
            }
            _ => Ok(vec![self.simple_effect(expr)?]),
        }
    }

    fn simple_effect(&self, expr: &SExpr) -> Result<LiftedEffect, PddlError> {
        let mut effect = LiftedEffect::default();
        self.collect_literals(expr, &mut effect)?;
        Ok(effect)
    }

    fn collect_literals(&self, expr: &SExpr, out: &mut LiftedEffect) -> Result<(), PddlError> {
        let list = expr.expect_list("an effect")?;
        match expr.head() {
            Some("and") => {
                for e in &list[1..] {
                    self.collect_literals(e, out)?;
                }
                Ok(())
            }
            Some("not") => match list {
                [_, inner] => {
                    out.del.push(self.atom(inner)?);
                    Ok(())
                }
                _ => Err(syntax("`not` takes exactly one argument", expr.pos())),
            },
            Some(kw @ ("oneof" | "or")) => Err(PddlError::new(
                ErrorKind::UnknownConstruct(format!("nested {kw}")),
                expr.pos(),
            )),
            Some(kw @ ("when" | "forall" | "increase" | "decrease" | "assign")) => {
                Err(PddlError::new(ErrorKind::UnknownConstruct(kw.to_string()), expr.pos()))
            }
            _ => {
                out.add.push(self.atom(expr)?);
                Ok(())
            }
        }
    }
}

fn parse_action(section: &SExpr, arities: &BTreeMap<&str, usize>) -> Result<LiftedAction, PddlError> {
    let list = section.expect_list("an action")?;
    let name = list
        .get(1)
        .ok_or_else(|| syntax("missing action name", section.pos()))?
        .expect_symbol("action name")?
        .to_string();

    let mut fields: BTreeMap<&str, &SExpr> = BTreeMap::new();
    let mut i = 2;
    while i < list.len() {
        let key = list[i].expect_symbol("an action keyword")?;
        let value = list
            .get(i + 1)
            .ok_or_else(|| syntax(format!("missing value for `{key}`"), list[i].pos()))?;
        if !matches!(key, ":parameters" | ":agent" | ":precondition" | ":effect") {
            return Err(PddlError::new(ErrorKind::UnknownConstruct(key.to_string()), list[i].pos()));
        }
        if fields.insert(key, value).is_some() {
            return Err(PddlError::new(ErrorKind::Duplicate(key.to_string()), list[i].pos()));
        }
        i += 2;
    }

    let parameters = match fields.get(":parameters") {
        Some(p) => parse_parameters(p.expect_list("a parameter list")?)?,
        None => Vec::new(),
    };
    let agent = match fields.get(":agent") {
        Some(a) => {
            let text = a.expect_symbol("an agent")?;
            text.parse::<AgentKind>()
                .map_err(|_| PddlError::new(ErrorKind::UnknownConstruct(format!("agent {text}")), a.pos()))?
        }
        None => AgentKind::Both,
    };
    let ctx = ActionCtx {
        arities,
        params: &parameters,
    };
    let precondition = match fields.get(":precondition") {
        Some(p) => ctx.formula(p)?,
        None => Formula::truth(),
    };
    let effects = match fields.get(":effect") {
        Some(e) => ctx.effects(e)?,
        None => vec![LiftedEffect::default()],
    };
    Ok(LiftedAction {
        name,
        parameters,
        agent,
        precondition,
        effects,
    })
}

fn render_formula(f: &Formula<LiftedAtom>, out: &mut String) {
    match f {
        Formula::Atom(a) => {
            let _ = write!(out, "{a}");
        }
        Formula::And(fs) | Formula::Or(fs) => {
            out.push_str(if matches!(f, Formula::And(_)) { "(and" } else { "(or" });
            for x in fs {
                out.push(' ');
                render_formula(x, out);
            }
            out.push(')');
        }
        Formula::Not(x) => {
            out.push_str("(not ");
            render_formula(x, out);
            out.push(')');
        }
    }
}

fn render_effect(e: &LiftedEffect) -> String {
    let mut out = String::from("(and");
    for a in &e.add {
        let _ = write!(out, " {a}");
    }
    for d in &e.del {
        let _ = write!(out, " (not {d})");
    }
    out.push(')');
    out
}

/// Canonical text of a domain.
pub fn render_domain(d: &DomainModel) -> String {
    let mut out = format!("(define (domain {})\n", d.name);
    if !d.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", d.requirements.join(" "));
    }
    out.push_str("  (:predicates");
    for p in &d.predicates {
        out.push_str("\n    (");
        out.push_str(&p.name);
        for v in &p.params {
            let _ = write!(out, " ?{v}");
        }
        out.push(')');
    }
    out.push_str(")\n");
    for a in &d.actions {
        let _ = writeln!(out, "  (:action {}", a.name);
        let params: Vec<String> = a.parameters.iter().map(|p| format!("?{p}")).collect();
        let _ = writeln!(out, "    :parameters ({})", params.join(" "));
        let _ = writeln!(out, "    :agent {}", a.agent.as_str());
        let mut pre = String::new();
        render_formula(&a.precondition, &mut pre);
        let _ = writeln!(out, "    :precondition {pre}");
        if a.effects.len() == 1 {
            let _ = writeln!(out, "    :effect {})", render_effect(&a.effects[0]));
        } else {
            out.push_str("    :effect (oneof");
            for e in &a.effects {
                let _ = write!(out, "\n      {}", render_effect(e));
            }
            out.push_str("))\n");
        }
    }
    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLEAN: &str = "
    (define (domain kitchen)
      (:requirements :strips :disjunctive-preconditions :non-deterministic)
      (:predicates (dishes-dirty) (dishes-half-dirty) (gathered ?o - object) (human-at-home))
      (:action clean-dishes
        :agent both
        :precondition (or (dishes-dirty) (dishes-half-dirty))
        :effect (or (and (not (dishes-dirty)) (not (dishes-half-dirty)))
                    (and (not (dishes-dirty)) (dishes-half-dirty))))
      (:action gather
        :parameters (?o)
        :agent both
        :precondition (and (not (gathered ?o)) (human-at-home))
        :effect (gathered ?o)))";

    #[test]
    fn clean_dishes_has_two_alternatives() {
        let d = parse_domain(CLEAN).unwrap();
        let clean = d.action("clean-dishes").unwrap();
        assert_eq!(clean.effects.len(), 2);
        assert_eq!(clean.effects[1].add[0].predicate, "dishes-half-dirty");
        assert_eq!(clean.agent, AgentKind::Both);
    }

    #[test]
    fn gather_is_agent_both() {
        let d = parse_domain(CLEAN).unwrap();
        let g = d.action("gather").unwrap();
        assert_eq!(g.parameters, vec!["o".to_string()]);
        assert_eq!(g.agent, AgentKind::Both);
        assert_eq!(g.effects[0].add[0].terms, vec![Term::Var("o".into())]);
    }

    #[test]
    fn empty_action_list() {
        let d = parse_domain("(define (domain empty) (:predicates (p)))").unwrap();
        assert!(d.actions.is_empty());
        assert_eq!(d.predicates.len(), 1);
    }

    #[test]
    fn render_parse_fixpoint() {
        let d = parse_domain(CLEAN).unwrap();
        let text = render_domain(&d);
        assert_eq!(parse_domain(&text).unwrap(), d);
        assert_eq!(render_domain(&parse_domain(&text).unwrap()), text);
    }

    #[test]
    fn arity_mismatch_is_positioned() {
        let err = parse_domain(
            "(define (domain x)\n (:predicates (p ?a))\n (:action a :effect (p)))",
        )
        .unwrap_err();
        assert!(matches!(err.kind, ErrorKind::ArityMismatch { expected: 1, found: 0, .. }));
        assert_eq!(err.pos.line, 3);
    }

    #[test]
    fn rejects_unknown_constructs() {
        let err = parse_domain("(define (domain x) (:functions (f)))").unwrap_err();
        assert_eq!(err.kind, ErrorKind::UnknownConstruct(":functions".into()));
        let err = parse_domain(
            "(define (domain x) (:predicates (p)) (:action a :effect (when (p) (p))))",
        )
        .unwrap_err();
        assert_eq!(err.kind, ErrorKind::UnknownConstruct("when".into()));
        let err = parse_domain("(define (domain x) (:types room - object))").unwrap_err();
        assert!(matches!(err.kind, ErrorKind::UnknownConstruct(_)));
        let err = parse_domain("(define (domain x) (:requirements :adl))").unwrap_err();
        assert_eq!(err.kind, ErrorKind::UnknownConstruct(":adl".into()));
    }

    #[test]
    fn unbound_and_undeclared() {
        let err = parse_domain(
            "(define (domain x) (:predicates (p ?a)) (:action a :parameters (?b) :effect (p ?c)))",
        )
        .unwrap_err();
        assert_eq!(err.kind, ErrorKind::UnboundVariable("c".into()));
        let err = parse_domain("(define (domain x) (:predicates) (:action a :effect (q)))").unwrap_err();
        assert_eq!(err.kind, ErrorKind::UndeclaredPredicate("q".into()));
        let err = parse_domain(
            "(define (domain x) (:predicates (p)) (:action a :effect (p)) (:action a :effect (p)))",
        )
        .unwrap_err();
        assert_eq!(err.kind, ErrorKind::Duplicate("a".into()));
    }
}
