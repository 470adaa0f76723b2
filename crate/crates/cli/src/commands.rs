//! One function per subcommand. Each writes to the given sink.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use proactive_core::dot::render_dot;
use proactive_core::eqm::{equilibrium, FreeRun};
use proactive_core::sim::trace_to_jsonl;
use proactive_core::{render_table, replay, RunMode, Scenario};

use crate::CliError;

pub fn load(path: &Path) -> Result<Arc<Scenario>, CliError> {
    Scenario::load(path).map(Arc::new).map_err(CliError::from)
}

/// `None` uses the scenario's own trajectory; an empty string means none.
pub fn parse_trajectory(csv: Option<&str>, sc: &Scenario) -> Vec<String> {
    match csv {
        None => sc.config.trajectory.clone(),
        Some(text) => text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect(),
    }
}

pub fn run(
    sc: &Arc<Scenario>,
    mode: RunMode,
    trajectory: &[String],
    seed: u64,
    json: bool,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let events = replay(sc, mode, trajectory, seed)?;
    if json {
        out.write_all(trace_to_jsonl(&events).as_bytes())?;
    } else if !events.is_empty() {
        out.write_all(render_table(&events).as_bytes())?;
    }
    Ok(())
}

/// The full (k, type, scheme) grid at a listed state.
pub fn opps(sc: &Scenario, state: &str, horizon: usize, out: &mut impl Write) -> Result<(), CliError> {
    let s = sc.state(state)?;
    let report = equilibrium(&sc.world, &s, horizon, &sc.schemes);
    writeln!(
        out,
        "state {state}  des {}  K {horizon}  Eq {:.4}",
        sc.world.des(&s),
        report.equilibrium
    )?;
    let name_w = sc.schemes.iter().map(|a| a.action().label().len()).max().unwrap_or(6).max(6);
    writeln!(out, "k  type  {:name_w$}  degree  benefit  acting", "scheme")?;
    for o in &report.opportunities {
        writeln!(
            out,
            "{}  {:>4}  {:name_w$}  {:.4}  {:.4}   {}",
            o.lookahead,
            o.type_index,
            o.name,
            o.degree,
            o.benefit,
            sc.world.label(&o.acting_state)
        )?;
    }
    Ok(())
}

/// Residual plans of every goal at a listed state.
pub fn plans(sc: &Scenario, state: &str, out: &mut impl Write) -> Result<(), CliError> {
    let s = sc.state(state)?;
    for (goal, plan) in sc.recognizer.residual_plans(&s) {
        match plan {
            Some(p) => writeln!(out, "{}  {}  {}", goal.name, p.len(), p.labels().join(" "))?,
            None => writeln!(out, "{}  -  unreachable", goal.name)?,
        }
    }
    match sc.recognizer.recognize(&s) {
        Some(i) => writeln!(out, "intention: {}", i.goal.name)?,
        None => writeln!(out, "intention: ?")?,
    }
    Ok(())
}

pub fn graph(sc: &Scenario, out_path: &Path) -> Result<(), CliError> {
    std::fs::write(out_path, render_dot(&sc.world))
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", out_path.display())))
}
