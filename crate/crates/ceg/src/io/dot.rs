//! DOT rendering of chain event graphs.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::graph::{Ceg, Colour, ColouredDigraph};

const PALETTE: [&str; 8] = [
    "#a6cee3", "#b2df8a", "#fb9a99", "#fdbf6f", "#cab2d6", "#ffff99", "#1f78b4", "#33a02c",
];

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders a graph in DOT. Positions appear left to right as `w0..wN`
/// with the sink drawn as a double circle named `w_inf`. Numbered stage
/// colours are filled from a fixed palette unless `display` names a
/// colour for them; singleton stages and the sink stay unfilled.
pub fn ceg_to_dot(ceg: &Ceg, display: &BTreeMap<Colour, String>) -> String {
    let mut out = String::new();
    out.push_str("digraph ceg {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=circle, style=filled, fillcolor=white];\n");
    for v in ceg.vertex_ids() {
        let name = if v == ceg.sink() {
            "w_inf".to_string()
        } else {
            format!("w{}", v.index())
        };
        let fill = match ceg.colour(v) {
            colour @ Colour::Stage(i) => Some(
                display
                    .get(colour)
                    .map(String::as_str)
                    .unwrap_or(PALETTE[*i as usize % PALETTE.len()])
                    .to_string(),
            ),
            colour @ Colour::Singleton(_) => display.get(colour).cloned(),
            Colour::Plain => None,
        };
        let shape = if v == ceg.sink() {
            ", shape=doublecircle"
        } else {
            ""
        };
        match fill {
            Some(fill) => writeln!(
                out,
                "  {name} [label=\"{}\", fillcolor=\"{}\"{shape}];",
                escape(&name),
                escape(&fill)
            )
            .unwrap(),
            None => writeln!(out, "  {name} [label=\"{}\"{shape}];", escape(&name)).unwrap(),
        }
    }
    for v in ceg.vertex_ids() {
        for edge in ceg.out_edges(v) {
            let source = if edge.source == ceg.sink() {
                "w_inf".to_string()
            } else {
                format!("w{}", edge.source.index())
            };
            let target = if edge.target == ceg.sink() {
                "w_inf".to_string()
            } else {
                format!("w{}", edge.target.index())
            };
            let text = match edge.theta {
                Some(theta) => format!("{} {:.3}", edge.label, theta),
                None => edge.label.clone(),
            };
            writeln!(out, "  {source} -> {target} [label=\"{}\"];", escape(&text)).unwrap();
        }
    }
    out.push_str("}\n");
    out
}
