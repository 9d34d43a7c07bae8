//! Backward slicing of an event trace from a start event.
//!
//! Starting from the suspect event, every event it depends on is marked; marked
//! events are then visited one at a time and their own dependencies marked in
//! turn, until nothing marked is left unvisited. Unmarked events cannot have
//! influenced the start event and are dropped.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::deps::{DependencyEdge, DependencyEngine, LsruReading, SliceMode};
use crate::error::{Error, Result};
use crate::model::SystemModel;
use crate::trace::{Event, EventTrace};

/// Order in which marked-but-unvisited events are taken. The resulting slice
/// does not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Worklist {
    #[default]
    Fifo,
    Lifo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SliceOptions {
    pub mode: SliceMode,
    pub lsru: LsruReading,
    pub worklist: Worklist,
}

impl SliceOptions {
    pub fn new(mode: SliceMode) -> Self {
        SliceOptions { mode, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceStats {
    pub trace_length: usize,
    pub slice_length: usize,
    /// `slice_length / trace_length`.
    pub reduction_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceResult {
    #[serde(rename = "start")]
    pub start_index: usize,
    pub mode: SliceMode,
    /// Original trace indices, ascending.
    pub members: BTreeSet<usize>,
    /// Every dependency edge into a member.
    pub edges: BTreeSet<DependencyEdge>,
    /// For each member other than the start, the edge through which it was first marked.
    pub discovery_edges: BTreeSet<DependencyEdge>,
    pub stats: SliceStats,
}

/// Slices `trace` backward from `start` with default options.
pub fn slice(trace: &EventTrace, model: &SystemModel, start: usize, mode: SliceMode) -> Result<SliceResult> {
    slice_with(trace, model, start, SliceOptions::new(mode))
}

pub fn slice_with(trace: &EventTrace, model: &SystemModel, start: usize, opts: SliceOptions) -> Result<SliceResult> {
    let engine = DependencyEngine::new(trace, model).with_lsru_reading(opts.lsru);
    slice_engine(&engine, start, opts)
}

/// Slices using an existing engine, reusing its indexes across calls.
pub fn slice_engine(engine: &DependencyEngine<'_>, start: usize, opts: SliceOptions) -> Result<SliceResult> {
    let trace = engine.trace();
    trace.check_index(start)?;

    let mut members = BTreeSet::from([start]);
    let mut edges = BTreeSet::new();
    let mut discovery = BTreeSet::new();
    let mut pending = VecDeque::from([start]);

    while let Some(current) = match opts.worklist {
        Worklist::Fifo => pending.pop_front(),
        Worklist::Lifo => pending.pop_back(),
    } {
        for edge in engine.all_dependencies(current, opts.mode)? {
            if members.insert(edge.from) {
                discovery.insert(edge);
                pending.push_back(edge.from);
            }
            edges.insert(edge);
        }
    }

    let stats = SliceStats {
        trace_length: trace.len(),
        slice_length: members.len(),
        reduction_ratio: members.len() as f64 / trace.len() as f64,
    };
    Ok(SliceResult { start_index: start, mode: opts.mode, members, edges, discovery_edges: discovery, stats })
}

impl SliceResult {
    pub fn contains(&self, index: usize) -> bool {
        self.members.contains(&index)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The sliced sub-trace, keeping original event numbers.
    pub fn sub_trace<'t>(&self, trace: &'t EventTrace) -> Vec<&'t Event> {
        self.members.iter().filter_map(|&i| trace.get(i)).collect()
    }

    /// The edge through which `member` was first marked; `None` for the start event.
    pub fn discovery_edge(&self, member: usize) -> Option<DependencyEdge> {
        self.discovery_edges.iter().find(|e| e.from == member).copied()
    }

    /// Why `member` is in the slice: every edge leading out of it toward the
    /// start event, including the one that first marked it.
    pub fn explain(&self, member: usize) -> Result<Vec<DependencyEdge>> {
        if !self.contains(member) {
            return Err(Error::NotAMember(member));
        }
        let mut out: BTreeSet<DependencyEdge> = self.edges.iter().filter(|e| e.from == member).copied().collect();
        out.extend(self.discovery_edge(member));
        Ok(out.into_iter().collect())
    }

    /// Edges grouped by kind, each group ordered by dependent then influencer
    /// descending, as the dependency listings are usually read.
    pub fn edges_by_kind(edges: &BTreeSet<DependencyEdge>) -> BTreeMap<crate::deps::DependencyKind, Vec<DependencyEdge>> {
        let mut groups: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for e in edges {
            groups.entry(e.kind).or_default().push(*e);
        }
        for g in groups.values_mut() {
            g.sort_by(|a, b| b.to.cmp(&a.to).then(b.from.cmp(&a.from)));
        }
        groups
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("slice result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(format!("slice result: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deps::{BaseKind, DependencyKind::*};
    use crate::fixtures::{example_trace, fixture_model};

    const BASIC_FROM_37: [usize; 15] = [1, 5, 6, 7, 13, 15, 17, 24, 28, 30, 31, 32, 33, 36, 37];

    #[test]
    fn basic_slice_from_37() {
        let (t, m) = (example_trace(), fixture_model());
        let r = slice(&t, &m, 37, SliceMode::Basic).unwrap();
        assert_eq!(r.members, BASIC_FROM_37.into());
        assert_eq!(r.stats.slice_length, 15);
        assert_eq!(r.stats.trace_length, 37);
        assert_eq!(r.discovery_edges.len(), 14);
        assert!(r.discovery_edge(37).is_none());
    }

    #[test]
    fn cause_effect_slice_from_37() {
        let (t, m) = (example_trace(), fixture_model());
        let r = slice(&t, &m, 37, SliceMode::CauseEffect).unwrap();
        assert_eq!(r.members, [1, 7, 13, 33, 36, 37].into());
        let expected: BTreeSet<_> = [
            DependencyEdge::cause_effect(BaseKind::Lsru, 36, 37),
            DependencyEdge::new(Cos, 33, 37),
            DependencyEdge::new(Cos, 13, 36),
            DependencyEdge::new(Cos, 7, 13),
            DependencyEdge::new(Cos, 1, 33),
        ]
        .into();
        assert_eq!(r.edges, expected);
    }

    #[test]
    fn lock_held_rules_pull_in_event_28() {
        let t = example_trace();
        let m = crate::fixtures::lock_held_model();
        let r = slice(&t, &m, 37, SliceMode::CauseEffect).unwrap();
        assert_eq!(r.members, [1, 7, 13, 28, 33, 36, 37].into());
    }

    #[test]
    fn slice_from_first_event_is_itself() {
        let (t, m) = (example_trace(), fixture_model());
        let r = slice(&t, &m, 1, SliceMode::Basic).unwrap();
        assert_eq!(r.members, [1].into());
        assert!(r.edges.is_empty());
        assert!(slice(&t, &m, 38, SliceMode::Basic).is_err());
    }

    #[test]
    fn explain_members() {
        let (t, m) = (example_trace(), fixture_model());
        let basic = slice(&t, &m, 37, SliceMode::Basic).unwrap();
        assert!(basic.explain(24).unwrap().contains(&DependencyEdge::new(Lsru, 24, 33)));
        assert!(basic.explain(37).unwrap().is_empty());
        assert_eq!(basic.explain(2), Err(Error::NotAMember(2)));

        let ce = slice(&t, &m, 37, SliceMode::CauseEffect).unwrap();
        assert_eq!(ce.explain(36).unwrap(), [DependencyEdge::cause_effect(BaseKind::Lsru, 36, 37)]);
    }

    #[test]
    fn json_round_trip() {
        let (t, m) = (example_trace(), fixture_model());
        let r = slice(&t, &m, 37, SliceMode::CauseEffect).unwrap();
        let json = r.to_json();
        assert!(json.starts_with(r#"{"start":37,"mode":"cause-effect","members":[1,7,13,33,36,37],"#), "{json}");
        assert_eq!(SliceResult::from_json(&json).unwrap(), r);
    }
}
