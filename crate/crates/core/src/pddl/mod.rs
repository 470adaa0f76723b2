//! Reader and writer for the PDDL subset used by the engine, plus the JSON
//! scenario format that packages a domain, a problem and the authored state
//! graph.
//!
//! Supported domain constructs: `:strips`, `:negative-preconditions`,
//! `:disjunctive-preconditions`, `:non-deterministic` (`oneof` effects, with
//! `or` accepted as an alias) and a per-action `:agent human|robot|both`
//! annotation. Parameters may carry the single type `object`.

mod domain;
mod ground;
mod problem;
mod scenario;
pub mod sexpr;

use std::fmt;

use thiserror::Error;

pub use domain::{parse_domain, render_domain, DomainModel, LiftedAction, LiftedAtom, LiftedEffect, PredicateSig, Term};
pub use ground::ground;
pub use problem::{parse_problem, render_problem, ProblemModel};
pub use scenario::{
    parse_scenario, render_scenario, EdgeEntry, EngineParams, FreeRunMode, GoalEntry, PddlSource, ScenarioError,
    ScenarioFile, StateEntry, SubstitutionEntry, FORMAT_VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErrorKind {
    Lexical(String),
    Syntax(String),
    UnknownConstruct(String),
    ArityMismatch { predicate: String, expected: usize, found: usize },
    UndeclaredPredicate(String),
    UndeclaredObject(String),
    UnboundVariable(String),
    Duplicate(String),
    EmptyGoal,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorKind::Lexical(m) => write!(f, "lexical error: {m}"),
            ErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ErrorKind::UnknownConstruct(c) => write!(f, "unsupported construct `{c}`"),
            ErrorKind::ArityMismatch {
                predicate,
                expected,
                found,
            } => write!(f, "`{predicate}` takes {expected} argument(s), found {found}"),
            ErrorKind::UndeclaredPredicate(p) => write!(f, "undeclared predicate `{p}`"),
            ErrorKind::UndeclaredObject(o) => write!(f, "undeclared object `{o}`"),
            ErrorKind::UnboundVariable(v) => write!(f, "variable `?{v}` is not a parameter"),
            ErrorKind::Duplicate(n) => write!(f, "duplicate definition of `{n}`"),
            ErrorKind::EmptyGoal => f.write_str("goal has no atoms"),
        }
    }
}

/// A parse or validation failure, always tied to a source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct PddlError {
    pub kind: ErrorKind,
    pub pos: Pos,
}

impl PddlError {
    pub fn new(kind: ErrorKind, pos: Pos) -> Self {
        PddlError { kind, pos }
    }
}

pub(crate) fn syntax(msg: impl Into<String>, pos: Pos) -> PddlError {
    PddlError::new(ErrorKind::Syntax(msg.into()), pos)
}
