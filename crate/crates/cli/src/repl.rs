//! Line-oriented interactive session.

use std::io::{BufRead, Write};
use std::sync::Arc;

use proactive_core::sim::trace_to_jsonl;
use proactive_core::{render_table, Pick, RunMode, Scenario, Session, TraceEvent};

use crate::CliError;

const HELP: &str = "\
commands:
  state                 current state and legal picks
  to ID [OUTCOME]       follow a free-run edge
  do ACTION [OUTCOME]   apply a human action, e.g. do gather(hat)
  opps                  ranked opportunities here
  mode hir|eqm|combined switch mode
  reset [SEED]          start over
  table                 the run so far as a table
  trace                 the run so far as JSONL
  quit
";

pub fn summary(e: &TraceEvent) -> String {
    let intention = e.intention.as_ref().map_or("?", |i| i.goal.as_str());
    let act = match (&e.dispatched, &e.chosen) {
        (Some(d), _) => format!("dispatched {} (outcome {}/{})", d.action, d.outcome + 1, d.outcomes),
        (None, Some(c)) if e.deferred => format!("{} deferred to {}", c.scheme, c.acting_state),
        _ if !e.evaluated => "not evaluated".to_string(),
        _ => "no action".to_string(),
    };
    format!("[{}] {} | intention {intention} | {act} -> {}", e.step, e.state, e.result_state)
}

fn outcome(arg: Option<&str>) -> Result<Option<usize>, String> {
    arg.map(|a| a.parse::<usize>().map_err(|_| format!("bad outcome `{a}`"))).transpose()
}

pub fn run(
    sc: Arc<Scenario>,
    mode: RunMode,
    seed: u64,
    input: impl BufRead,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let start = sc.config.start.clone();
    let mut session = Session::start(sc, mode, seed, &start)?;
    writeln!(out, "{}", summary(session.last_event()))?;
    for line in input.lines() {
        let line = line?;
        let words: Vec<&str> = line.split_whitespace().collect();
        let Some((&cmd, args)) = words.split_first() else {
            continue;
        };
        let reply = match cmd {
            "quit" | "exit" => break,
            "help" => Ok(HELP.to_string()),
            "state" => {
                let i = session.info();
                Ok(format!(
                    "{} ({} mode, step {})\natoms: {}\nnext: {}\nhuman actions: {}\n",
                    i.current_state,
                    i.mode,
                    i.step,
                    i.atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "),
                    session.enabled().join(" "),
                    session.enabled_human_actions().join(" ")
                ))
            }
            "to" | "do" if !args.is_empty() => {
                let pick = if cmd == "to" {
                    Pick::To(args[0].to_string())
                } else {
                    Pick::HumanAction(args[0].to_string())
                };
                outcome(args.get(1).copied())
                    .and_then(|o| session.step(&pick, o).map_err(|e| e.to_string()))
                    .map(|e| summary(e) + "\n")
            }
            "opps" => Ok(session
                .opportunities()
                .iter()
                .map(|o| {
                    format!(
                        "{:?} {} type {} k {} degree {:.4} benefit {:.4} at {}{}\n",
                        o.source,
                        o.scheme,
                        o.type_index,
                        o.k,
                        o.degree,
                        o.benefit,
                        o.acting_state,
                        if o.deferred { " (deferred)" } else { "" }
                    )
                })
                .collect()),
            "mode" if args.len() == 1 => args[0]
                .parse::<RunMode>()
                .map(|m| {
                    session.set_mode(m);
                    format!("mode {m}\n")
                }),
            "reset" => args
                .first()
                .map_or(Ok(session.seed()), |a| a.parse::<u64>().map_err(|_| format!("bad seed `{a}`")))
                .and_then(|s| session.reset(s).map_err(|e| e.to_string()))
                .map(|e| summary(e) + "\n"),
            "table" => Ok(render_table(session.trace())),
            "trace" => Ok(trace_to_jsonl(session.trace())),
            _ => Err(format!("unknown command `{line}` (try help)")),
        };
        match reply {
            Ok(text) => out.write_all(text.as_bytes())?,
            Err(msg) => writeln!(out, "error: {msg}")?,
        }
        out.flush()?;
    }
    Ok(())
}
