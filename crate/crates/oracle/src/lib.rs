//! Slow, obviously-correct reference evaluators for the test suites.

pub mod eqm;
pub mod gen;
pub mod overlay;
pub mod strips;
