//! Graphviz export of a slice.

use std::fmt::Write;

use crate::deps::DependencyKind;
use crate::slicer::SliceResult;
use crate::trace::EventTrace;

fn edge_style(kind: DependencyKind) -> &'static str {
    match kind {
        DependencyKind::Cos => "style=solid, color=black",
        DependencyKind::Lru => "style=dashed, color=blue",
        DependencyKind::Lsru => "style=dotted, color=darkgreen",
        DependencyKind::Ce => "style=bold, color=red",
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// One node per member, one arrow per edge (influencer to dependent).
pub fn to_dot(result: &SliceResult, trace: &EventTrace) -> String {
    let mut out = String::new();
    writeln!(out, "digraph slice {{").unwrap();
    writeln!(out, "  rankdir=TB;").unwrap();
    writeln!(out, "  node [shape=box, fontname=\"monospace\"];").unwrap();
    for &m in &result.members {
        let label = match trace.get(m) {
            Some(e) => e.to_string(),
            None => m.to_string(),
        };
        let extra = if m == result.start_index { ", peripheries=2" } else { "" };
        writeln!(out, "  e{m} [label=\"{}\"{extra}];", escape(&label)).unwrap();
    }
    for e in &result.edges {
        let label = match e.base {
            Some(b) => format!("{}/{}", e.kind, crate::deps::DependencyKind::from(b)),
            None => e.kind.to_string(),
        };
        writeln!(out, "  e{} -> e{} [label=\"{label}\", {}];", e.from, e.to, edge_style(e.kind)).unwrap();
    }
    out.push_str("}\n");
    out
}
