//! Reference evaluators for the dependency definitions, written as direct
//! quantifier-by-quantifier translations over whole traces (cubic time), plus
//! proptest generators for small random traces and models.
//!
//! Nothing here calls into `tracelens_core`'s detectors or slicer; only the
//! plain data types and model lookups are shared.

use std::collections::BTreeSet;

use proptest::prelude::*;
use tracelens_core::{
    CauseEffectRule, ClassFile, Event, EventTrace, LsruReading, ModelFile, ResourceDecl, ResourceKind, SliceMode,
    SystemModel, TransitionPattern,
};

/// Edge as `(kind, from, to)`, where kind is one of "COS", "LRU", "LSRU",
/// "CE/LRU", "CE/LSRU".
pub type OracleEdge = (&'static str, usize, usize);

struct View<'a> {
    t: &'a [Event],
}

impl View<'_> {
    fn p(&self, i: usize) -> &str {
        &self.t[i - 1].process
    }
    fn r(&self, i: usize) -> &str {
        &self.t[i - 1].resource
    }
    fn so(&self, i: usize) -> &str {
        &self.t[i - 1].old_state
    }
    fn sn(&self, i: usize) -> &str {
        &self.t[i - 1].new_state
    }
}

fn active(model: &SystemModel, trace: &EventTrace, id: &str) -> bool {
    match model.resource(id) {
        Some(d) => d.kind == ResourceKind::Active,
        None => model.is_permissive() && trace.iter().any(|e| e.process == id),
    }
}

/// All i < j satisfying the change-of-state conditions.
pub fn cos(trace: &EventTrace, j: usize) -> BTreeSet<usize> {
    let v = View { t: trace.events() };
    (1..j)
        .filter(|&i| {
            v.r(i) == v.r(j)
                && v.sn(i) == v.so(j)
                && v.so(i) != v.sn(i)
                && (i + 1..j).all(|k| v.r(i) != v.r(k) || (v.so(k) == v.sn(i) && v.sn(i) == v.sn(k)))
        })
        .collect()
}

pub fn lru(trace: &EventTrace, model: &SystemModel, j: usize) -> BTreeSet<usize> {
    let v = View { t: trace.events() };
    if !(active(model, trace, v.r(j)) && v.so(j) != v.sn(j)) {
        return BTreeSet::new();
    }
    (1..j)
        .filter(|&i| v.p(i) == v.r(j) && (i + 1..j).all(|k| v.p(k) != v.r(j) || v.r(i) != v.r(k)))
        .collect()
}

pub fn lsru(trace: &EventTrace, model: &SystemModel, j: usize, reading: LsruReading) -> BTreeSet<usize> {
    let v = View { t: trace.events() };
    let bases = lru(trace, model, j);
    (1..j)
        .filter(|&i| {
            bases.iter().any(|&m| {
                let cond2 = v.p(m) != v.p(i) && v.r(m) == v.r(i);
                let cond3 = match reading {
                    LsruReading::OtherProcesses => (i + 1..j).all(|k| v.p(k) == v.r(j) || v.r(i) != v.r(k)),
                    LsruReading::Literal if i < m => (i + 1..j).all(|k| k == m || v.r(i) != v.r(k)),
                    LsruReading::Literal => (i + 1..j).all(|k| v.r(i) != v.r(k)),
                };
                cond2 && cond3
            })
        })
        .collect()
}

fn pattern_matches(model: &SystemModel, p: &TransitionPattern, e: &Event) -> bool {
    let class_ok = model.resource(&e.resource).map(|d| d.class_name.as_str()) == Some(p.class_name.as_str());
    class_ok
        && p.operation.as_ref().is_none_or(|o| *o == e.operation)
        && p.from_state.as_ref().is_none_or(|s| *s == e.old_state)
        && p.to_state.as_ref().is_none_or(|s| *s == e.new_state)
}

fn rule_holds(model: &SystemModel, cause: &Event, effect: &Event) -> bool {
    model
        .rules()
        .iter()
        .any(|r| pattern_matches(model, &r.cause, cause) && pattern_matches(model, &r.effect, effect))
}

/// Cause-effect predecessors as `(i, is_lsru)`.
pub fn ce(trace: &EventTrace, model: &SystemModel, j: usize, reading: LsruReading) -> BTreeSet<(usize, bool)> {
    let ev = trace.events();
    let l = lru(trace, model, j).into_iter().map(|i| (i, false));
    let s = lsru(trace, model, j, reading).into_iter().map(|i| (i, true));
    l.chain(s).filter(|&(i, _)| rule_holds(model, &ev[i - 1], &ev[j - 1])).collect()
}

pub fn dependencies(
    trace: &EventTrace,
    model: &SystemModel,
    j: usize,
    mode: SliceMode,
    reading: LsruReading,
) -> BTreeSet<OracleEdge> {
    let mut out: BTreeSet<OracleEdge> = cos(trace, j).into_iter().map(|i| ("COS", i, j)).collect();
    match mode {
        SliceMode::Basic => {
            out.extend(lru(trace, model, j).into_iter().map(|i| ("LRU", i, j)));
            out.extend(lsru(trace, model, j, reading).into_iter().map(|i| ("LSRU", i, j)));
        }
        SliceMode::CauseEffect => {
            out.extend(
                ce(trace, model, j, reading)
                    .into_iter()
                    .map(|(i, shared)| (if shared { "CE/LSRU" } else { "CE/LRU" }, i, j)),
            );
        }
    }
    out
}

/// Slice by naive iteration to stability: sweep the whole trace, adding every
/// event with an edge into a current member, until a sweep adds nothing.
pub fn fixpoint_slice(
    trace: &EventTrace,
    model: &SystemModel,
    start: usize,
    mode: SliceMode,
    reading: LsruReading,
) -> (BTreeSet<usize>, BTreeSet<OracleEdge>) {
    let all: Vec<BTreeSet<OracleEdge>> =
        (1..=trace.len()).map(|j| dependencies(trace, model, j, mode, reading)).collect();
    fixpoint_over(&all, start)
}

/// Same sweep over precomputed per-event edge sets (`all[j - 1]` holds the
/// edges into event `j`).
pub fn fixpoint_over(all: &[BTreeSet<OracleEdge>], start: usize) -> (BTreeSet<usize>, BTreeSet<OracleEdge>) {
    let mut members = BTreeSet::from([start]);
    loop {
        let mut grew = false;
        for k in 1..=all.len() {
            if !members.contains(&k)
                && all.iter().flatten().any(|&(_, from, to)| from == k && members.contains(&to))
            {
                members.insert(k);
                grew = true;
            }
        }
        if !grew {
            let edges = members.iter().flat_map(|&m| all[m - 1].iter().copied()).collect();
            return (members, edges);
        }
    }
}

/// Maps an engine edge to the oracle's naming.
pub fn edge_key(e: &tracelens_core::DependencyEdge) -> OracleEdge {
    use tracelens_core::{BaseKind, DependencyKind::*};
    let kind = match (e.kind, e.base) {
        (Cos, _) => "COS",
        (Lru, _) => "LRU",
        (Lsru, _) => "LSRU",
        (Ce, Some(BaseKind::Lru)) => "CE/LRU",
        (Ce, _) => "CE/LSRU",
    };
    (kind, e.from, e.to)
}

const STATES: [&str; 3] = ["s0", "s1", "s2"];
const OPS: [&str; 3] = ["op0", "op1", "op2"];

/// A random trace together with a model declaring all of its resources.
#[derive(Debug, Clone)]
pub struct Case {
    pub trace: EventTrace,
    pub model: SystemModel,
}

fn opt_of(choices: &'static [&'static str]) -> impl Strategy<Value = Option<String>> {
    proptest::option::of(proptest::sample::select(choices).prop_map(String::from))
}

fn arb_pattern(class: &'static str) -> impl Strategy<Value = TransitionPattern> {
    (opt_of(&OPS), opt_of(&STATES), opt_of(&STATES))
        .prop_filter("pattern needs a constraint", |(o, f, t)| o.is_some() || f.is_some() || t.is_some())
        .prop_map(move |(operation, from_state, to_state)| TransitionPattern {
            class_name: class.into(),
            operation,
            from_state,
            to_state,
        })
}

fn arb_rule() -> impl Strategy<Value = CauseEffectRule> {
    (prop_oneof![Just("Proc"), Just("Res")], arb_pattern("Proc"))
        .prop_flat_map(|(cause_class, effect)| {
            arb_pattern(cause_class).prop_map(move |cause| CauseEffectRule { label: None, cause, effect: effect.clone() })
        })
}

/// Traces of up to `max_len` events over at most 5 processes and 8 resources
/// (processes are resources too), with 0–3 random cause-effect rules.
pub fn arb_case(max_len: usize) -> impl Strategy<Value = Case> {
    (1usize..=5, 0usize..=3)
        .prop_flat_map(move |(procs, passive)| {
            let passive = passive.min(8 - procs);
            let resources = procs + passive;
            let event = (0..procs, 0..resources, 0..OPS.len(), 0..STATES.len(), 0..STATES.len());
            (
                Just((procs, passive)),
                proptest::collection::vec(event, 1..=max_len),
                proptest::collection::vec(arb_rule(), 0..=3),
            )
        })
        .prop_map(|((procs, passive), rows, rules)| {
            let name = |r: usize| if r < procs { format!("P{r}") } else { format!("R{}", r - procs) };
            let tuples: Vec<[String; 5]> = rows
                .into_iter()
                .map(|(p, r, o, so, sn)| {
                    [name(p), OPS[o].into(), name(r), STATES[so].into(), STATES[sn].into()]
                })
                .collect();
            let trace = EventTrace::from_tuples(&tuples).expect("generated trace is well formed");
            let class = |n: &str| ClassFile::complete(n, &STATES, &OPS);
            let resources = (0..procs + passive)
                .map(|r| ResourceDecl {
                    id: name(r),
                    class_name: if r < procs { "Proc" } else { "Res" }.into(),
                    kind: if r < procs { ResourceKind::Active } else { ResourceKind::Passive },
                })
                .collect();
            let model = SystemModel::from_file(ModelFile {
                classes: vec![class("Proc"), class("Res")],
                resources,
                cause_effect_rules: rules,
                ..Default::default()
            })
            .expect("generated model is consistent");
            Case { trace, model }
        })
}
