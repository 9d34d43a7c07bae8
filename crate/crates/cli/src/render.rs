//! Plain-text renderings laid out like the usual trace and dependency tables.

use std::collections::BTreeSet;

use tracelens_core::{DependencyEdge, DependencyKind, Event, EventTrace, SliceMode, SliceResult, Violation};

const TRACE_HEADER: [&str; 6] = ["No.", "Proc.", "Oper.", "Rsrc.", "Old State", "New State"];

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c + 1 == row.len() {
                line.push_str(cell);
            } else {
                line.push_str(cell);
                line.push_str(&" ".repeat(widths[c] - cell.chars().count() + 2));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn events<'a>(events: impl IntoIterator<Item = &'a Event>) -> String {
    let mut rows = vec![TRACE_HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    rows.extend(events.into_iter().map(|e| {
        vec![
            e.index.to_string(),
            e.process.clone(),
            e.operation.clone(),
            e.resource.clone(),
            e.old_state.clone(),
            e.new_state.clone(),
        ]
    }));
    table(&rows)
}

/// One row per kind in `kinds`, listing `(from,to)` pairs, latest dependent first.
pub fn dependencies(edges: &BTreeSet<DependencyEdge>, kinds: &[DependencyKind]) -> String {
    let groups = SliceResult::edges_by_kind(edges);
    let mut rows = vec![vec!["Dependencies used".to_string(), "Dependent events".to_string()]];
    for kind in kinds {
        let pairs = groups
            .get(kind)
            .map(|g| g.iter().map(|e| format!("({},{})", e.from, e.to)).collect::<Vec<_>>().join(", "))
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| "(none)".into());
        rows.push(vec![kind.long_name().to_string(), pairs]);
    }
    table(&rows)
}

pub fn kinds_for(mode: SliceMode) -> &'static [DependencyKind] {
    use DependencyKind::*;
    match mode {
        SliceMode::Basic => &[Cos, Lru, Lsru],
        SliceMode::CauseEffect => &[Ce, Cos],
    }
}

pub fn slice(result: &SliceResult, trace: &EventTrace) -> String {
    let mut out = events(result.sub_trace(trace));
    out.push('\n');
    out.push_str(&dependencies(&result.edges, kinds_for(result.mode)));
    out.push('\n');
    out.push_str(&format!(
        "{} of {} events ({:.1}%)\n",
        result.stats.slice_length,
        result.stats.trace_length,
        100.0 * result.stats.reduction_ratio
    ));
    out
}

pub fn violations(list: &[Violation]) -> String {
    let mut out: String = list.iter().map(|v| format!("{v}\n")).collect();
    out.push_str(&match list.len() {
        1 => "1 violation\n".to_string(),
        n => format!("{n} violations\n"),
    });
    out
}
