//! CSV matrices and edge lists.

use std::fmt::Write;

use crate::graph_transform::{ColouredGraph, Marker};

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header row of state names, then one row per state.
pub fn matrix_csv(names: &[String], m: &[Vec<f64>]) -> String {
    let mut out = String::from("state");
    for n in names {
        let _ = write!(out, ",{}", field(n));
    }
    out.push('\n');
    for (n, row) in names.iter().zip(m) {
        out.push_str(&field(n));
        for x in row {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    out
}

pub fn vector_csv(names: &[String], v: &[f64]) -> String {
    let head: Vec<String> = names.iter().map(|n| field(n)).collect();
    let row: Vec<String> = v.iter().map(f64::to_string).collect();
    format!("{}\n{}\n", head.join(","), row.join(","))
}

pub fn edges_csv(g: &ColouredGraph) -> String {
    let mut out = String::from("from,to,label,probability,cyclical\n");
    for e in &g.edges {
        let p = e.prob.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{p},{}",
            field(&g.nodes[e.from].name),
            field(&g.nodes[e.to].name),
            field(&e.label),
            e.marker == Marker::Cyclical
        );
    }
    out
}

/// Parses a single row of numbers.
pub fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", x.trim()))).collect()
}
