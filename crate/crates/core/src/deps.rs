//! Dependency detection between trace events.
//!
//! Every detector is a backward query: given a target event `j`, it returns the
//! earlier events `j` depends on.
//!
//! * **COS** (change of state): the last earlier event that moved `R(j)` into the
//!   state `j` observes, with every same-resource event in between leaving that
//!   state untouched.
//! * **LRU** (last resource use): when an active resource changes state, the
//!   latest use of each resource that process has touched before.
//! * **LSRU** (last shared resource use): for each LRU use, the latest use of
//!   the same resource by some other process.
//! * **CE** (dynamic cause-effect): those LRU/LSRU edges whose endpoint events
//!   instantiate a static cause-effect rule of the model.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::SystemModel;
use crate::trace::{Event, EventTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DependencyKind {
    #[serde(rename = "COS")]
    Cos,
    #[serde(rename = "LRU")]
    Lru,
    #[serde(rename = "LSRU")]
    Lsru,
    #[serde(rename = "CE")]
    Ce,
}

impl DependencyKind {
    pub const ALL: [DependencyKind; 4] = [Self::Cos, Self::Lru, Self::Lsru, Self::Ce];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cos => "COS",
            Self::Lru => "LRU",
            Self::Lsru => "LSRU",
            Self::Ce => "CE",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            Self::Cos => "Change-Of-State",
            Self::Lru => "Last-Resource-Use",
            Self::Lsru => "Last-Shared-Resource-Use",
            Self::Ce => "Cause-effect",
        }
    }
}

impl fmt::Display for DependencyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The resource-use dependency a cause-effect edge refines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BaseKind {
    #[serde(rename = "LRU")]
    Lru,
    #[serde(rename = "LSRU")]
    Lsru,
}

impl From<BaseKind> for DependencyKind {
    fn from(b: BaseKind) -> Self {
        match b {
            BaseKind::Lru => DependencyKind::Lru,
            BaseKind::Lsru => DependencyKind::Lsru,
        }
    }
}

/// `to` depends on `from`; `from < to` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DependencyEdge {
    pub from: usize,
    pub to: usize,
    pub kind: DependencyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BaseKind>,
}

impl DependencyEdge {
    pub fn new(kind: DependencyKind, from: usize, to: usize) -> Self {
        debug_assert!(kind != DependencyKind::Ce);
        DependencyEdge { from, to, kind, base: None }
    }

    pub fn cause_effect(base: BaseKind, from: usize, to: usize) -> Self {
        DependencyEdge { from, to, kind: DependencyKind::Ce, base: Some(base) }
    }
}

impl fmt::Display for DependencyEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.kind, self.from, self.to)
    }
}

/// Which dependencies drive slicing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum SliceMode {
    /// COS, LRU, and LSRU.
    #[default]
    #[serde(rename = "basic")]
    Basic,
    /// COS and dynamic cause-effect only.
    #[serde(rename = "cause-effect")]
    CauseEffect,
}

impl SliceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SliceMode::Basic => "basic",
            SliceMode::CauseEffect => "cause-effect",
        }
    }
}

impl fmt::Display for SliceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SliceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "basic" => Ok(SliceMode::Basic),
            "cause-effect" | "cause_effect" | "ce" => Ok(SliceMode::CauseEffect),
            other => Err(format!("unknown mode `{other}` (expected basic or cause-effect)")),
        }
    }
}

/// How the "no other process used the resource in between" condition of LSRU
/// is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LsruReading {
    /// Intervening uses only disqualify a candidate when they come from a
    /// process other than the one whose state changed.
    #[default]
    OtherProcesses,
    /// Any intervening use of the resource disqualifies a candidate, except the
    /// LRU event itself when the candidate precedes it.
    Literal,
}

/// Answers dependency queries over one trace and model.
///
/// Per-resource and per-process position lists are built once so each query
/// only walks the events of the resource or process it concerns.
#[derive(Debug)]
pub struct DependencyEngine<'a> {
    trace: &'a EventTrace,
    model: &'a SystemModel,
    lsru: LsruReading,
    by_resource: HashMap<&'a str, Vec<usize>>,
    by_process: HashMap<&'a str, Vec<usize>>,
    actors: HashSet<&'a str>,
}

impl<'a> DependencyEngine<'a> {
    pub fn new(trace: &'a EventTrace, model: &'a SystemModel) -> Self {
        let mut by_resource: HashMap<&str, Vec<usize>> = HashMap::new();
        let mut by_process: HashMap<&str, Vec<usize>> = HashMap::new();
        for e in trace {
            by_resource.entry(&e.resource).or_default().push(e.index);
            by_process.entry(&e.process).or_default().push(e.index);
        }
        let actors = by_process.keys().copied().collect();
        DependencyEngine { trace, model, lsru: LsruReading::default(), by_resource, by_process, actors }
    }

    pub fn with_lsru_reading(mut self, reading: LsruReading) -> Self {
        self.lsru = reading;
        self
    }

    pub fn trace(&self) -> &'a EventTrace {
        self.trace
    }

    pub fn model(&self) -> &'a SystemModel {
        self.model
    }

    fn ev(&self, index: usize) -> &'a Event {
        &self.trace.events()[index - 1]
    }

    /// Positions in `list` strictly before `j`, latest first.
    fn before(list: Option<&Vec<usize>>, j: usize) -> impl Iterator<Item = usize> + '_ {
        let list = list.map(Vec::as_slice).unwrap_or_default();
        let end = list.partition_point(|&k| k < j);
        list[..end].iter().rev().copied()
    }

    fn resource_events_before(&self, resource: &str, j: usize) -> impl Iterator<Item = usize> + '_ {
        Self::before(self.by_resource.get(resource), j)
    }

    fn is_active(&self, resource: &str) -> Result<bool> {
        self.model.is_active_with(resource, |id| self.actors.contains(id))
    }

    /// The event that last changed `R(j)` into the state `j` starts from.
    pub fn cos_predecessor(&self, j: usize) -> Result<Option<usize>> {
        let target = self.trace.event(j)?;
        for k in self.resource_events_before(&target.resource, j) {
            let e = self.ev(k);
            if e.changes_state() {
                return Ok((e.new_state == target.old_state).then_some(k));
            }
            // An unchanged intermediate must hold the observed state, or no earlier
            // event can qualify.
            if e.new_state != target.old_state {
                return Ok(None);
            }
        }
        Ok(None)
    }

    /// Latest use of each resource by process `R(j)`, provided `R(j)` is active
    /// and changes state at `j`.
    pub fn lru_predecessors(&self, j: usize) -> Result<BTreeSet<usize>> {
        let target = self.trace.event(j)?;
        if !target.changes_state() || !self.is_active(&target.resource)? {
            return Ok(BTreeSet::new());
        }
        let mut seen = HashSet::new();
        Ok(Self::before(self.by_process.get(target.resource.as_str()), j)
            .filter(|&k| seen.insert(self.ev(k).resource.as_str()))
            .collect())
    }

    /// For every LRU use `m` of `j`, the qualifying use of `R(m)` by another process.
    pub fn lsru_predecessors(&self, j: usize) -> Result<BTreeSet<usize>> {
        let bases = self.lru_predecessors(j)?;
        Ok(self.lsru_from_bases(j, &bases))
    }

    fn lsru_from_bases(&self, j: usize, bases: &BTreeSet<usize>) -> BTreeSet<usize> {
        let affected = self.ev(j).resource.as_str();
        bases
            .iter()
            .filter_map(|&m| {
                let base = self.ev(m);
                let mut earlier = self.resource_events_before(&base.resource, j);
                let candidate = match self.lsru {
                    LsruReading::OtherProcesses => {
                        // Uses by the affected process itself are transparent.
                        earlier.find(|&k| self.ev(k).process != affected)
                    }
                    LsruReading::Literal => match earlier.next() {
                        Some(last) if last != m => Some(last),
                        Some(_) => earlier.next(),
                        None => None,
                    },
                };
                candidate.filter(|&i| self.ev(i).process != base.process)
            })
            .collect()
    }

    /// LRU/LSRU edges into `j` whose endpoints instantiate a cause-effect rule.
    pub fn ce_predecessors(&self, j: usize) -> Result<BTreeSet<DependencyEdge>> {
        let lru = self.lru_predecessors(j)?;
        let lsru = self.lsru_from_bases(j, &lru);
        Ok(self.ce_filter(j, &lru, &lsru))
    }

    fn ce_filter(&self, j: usize, lru: &BTreeSet<usize>, lsru: &BTreeSet<usize>) -> BTreeSet<DependencyEdge> {
        let effect = self.ev(j);
        let rules = self.model.rules();
        let tagged = lru.iter().map(|&i| (i, BaseKind::Lru)).chain(lsru.iter().map(|&i| (i, BaseKind::Lsru)));
        tagged
            .filter(|&(i, _)| rules.iter().any(|r| r.matches(self.model, self.ev(i), effect)))
            .map(|(i, base)| DependencyEdge::cause_effect(base, i, j))
            .collect()
    }

    /// All edges into `j` used by `mode`: COS ∪ LRU ∪ LSRU for basic slicing,
    /// COS ∪ CE for cause-effect slicing.
    pub fn all_dependencies(&self, j: usize, mode: SliceMode) -> Result<Vec<DependencyEdge>> {
        let mut out = Vec::new();
        if let Some(i) = self.cos_predecessor(j)? {
            out.push(DependencyEdge::new(DependencyKind::Cos, i, j));
        }
        let lru = self.lru_predecessors(j)?;
        let lsru = self.lsru_from_bases(j, &lru);
        match mode {
            SliceMode::Basic => {
                out.extend(lru.iter().map(|&i| DependencyEdge::new(DependencyKind::Lru, i, j)));
                out.extend(lsru.iter().map(|&i| DependencyEdge::new(DependencyKind::Lsru, i, j)));
            }
            SliceMode::CauseEffect => out.extend(self.ce_filter(j, &lru, &lsru)),
        }
        Ok(out)
    }
}
