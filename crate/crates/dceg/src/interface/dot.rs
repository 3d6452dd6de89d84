//! Graphviz output.

use std::fmt::Write;

use crate::graph_transform::{ColouredGraph, Marker, NodeKind};
use crate::markov::MarkovProjection;

const PALETTE: [&str; 16] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd",
    "#ccebc5", "#ffed6f", "#a6cee3", "#b2df8a", "#fb9a99", "#cab2d6",
];

pub fn stage_colour(stage: usize) -> &'static str {
    PALETTE[stage % PALETTE.len()]
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Vertices are drawn with their names and filled by stage; cyclical edges
/// are dashed. `stage_names` adds the stage name to the tooltip.
pub fn export_dot(g: &ColouredGraph, stage_names: Option<&[String]>) -> String {
    let mut out = String::from("digraph dceg {\n");
    if g.nodes.is_empty() {
        out.push_str("}\n");
        return out;
    }
    out.push_str("  rankdir=LR;\n  node [shape=circle, style=filled, fillcolor=white];\n");
    for (i, n) in g.nodes.iter().enumerate() {
        let mut attrs = vec![format!("label={}", quote(&n.name))];
        match (n.kind, n.colour) {
            (NodeKind::Sink, _) => attrs.push("shape=doublecircle".into()),
            (NodeKind::Position, Some(c)) => {
                attrs.push(format!("fillcolor={}", quote(stage_colour(c))));
                if let Some(name) = stage_names.and_then(|s| s.get(c)) {
                    attrs.push(format!("tooltip={}", quote(name)));
                }
            }
            _ => {}
        }
        let _ = writeln!(out, "  n{i} [{}];", attrs.join(", "));
    }
    for e in &g.edges {
        let label = match e.prob {
            Some(p) => format!("{} ({p})", e.label),
            None => e.label.clone(),
        };
        let mut attrs = vec![format!("label={}", quote(&label))];
        if e.marker == Marker::Cyclical {
            attrs.push("style=dashed".into());
        }
        let _ = writeln!(out, "  n{} -> n{} [{}];", e.from, e.to, attrs.join(", "));
    }
    out.push_str("}\n");
    out
}

/// State diagram of a Markov projection; zero transitions are omitted.
pub fn chain_dot(p: &MarkovProjection, digits: usize) -> String {
    let mut out = String::from("digraph chain {\n");
    if p.names.is_empty() {
        out.push_str("}\n");
        return out;
    }
    out.push_str("  rankdir=LR;\n");
    for (i, name) in p.names.iter().enumerate() {
        let _ = writeln!(out, "  s{i} [label={}];", quote(name));
    }
    for (i, row) in p.m.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if x > 0.0 {
                let _ = writeln!(out, "  s{i} -> s{j} [label=\"{x:.digits$}\"];");
            }
        }
    }
    out.push_str("}\n");
    out
}
