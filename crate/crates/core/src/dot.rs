//! Graphviz export of the authored graph.

use std::fmt::Write;

use crate::eqm::FreeRun;
use crate::model::InputLabel;
use crate::world::World;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Red at des 0, green at des 1.
fn ramp(des: f64) -> String {
    let d = des.clamp(0.0, 1.0);
    let r = ((1.0 - d) * 255.0).round() as u8;
    let g = (d * 200.0).round() as u8;
    format!("#{r:02x}{g:02x}40")
}

pub fn render_dot(world: &World) -> String {
    let view = world.graph_view();
    let mut out = String::from("digraph world {\n  rankdir=LR;\n  node [shape=box, style=filled, fontcolor=white];\n");
    for s in &view.states {
        let _ = writeln!(
            out,
            "  \"{}\" [label=\"{}\\ndes={}\", fillcolor=\"{}\"];",
            escape(&s.id),
            escape(&s.id),
            s.des,
            ramp(s.des)
        );
    }
    for e in &view.edges {
        let style = match e.label {
            InputLabel::Null => "solid".to_string(),
            _ => format!("dashed, label=\"{}\"", escape(&e.label.to_string())),
        };
        let _ = writeln!(out, "  \"{}\" -> \"{}\" [style={style}];", escape(&e.from), escape(&e.to));
    }
    // sinks stay where they are
    for s in world.system().states() {
        if world.successors(s) == [s.clone()] {
            let id = escape(s.label());
            let _ = writeln!(out, "  \"{id}\" -> \"{id}\" [style=solid];");
        }
    }
    out.push_str("}\n");
    out
}
