//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each, and
//! exits non-zero if any fails.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, TestRng, TestRunner, RngAlgorithm};
use tracelens_core::{
    fixtures, slice, slice_with, BaseKind, DependencyEdge, DependencyEngine, DependencyKind::*, EventTrace,
    LsruReading, SliceMode, SliceOptions, SliceResult, SystemModel, TraceFormat, Worklist,
};
use tracelens_oracle::{arb_case, edge_key, fixpoint_over, Case};

const RANDOM_TRACES: usize = 1000;
const MAX_EVENTS: usize = 50;

type Criterion = (&'static str, fn() -> Result<String, String>);

fn pairs(edges: &BTreeSet<DependencyEdge>, kind: tracelens_core::DependencyKind) -> BTreeSet<(usize, usize)> {
    edges.iter().filter(|e| e.kind == kind).map(|e| (e.from, e.to)).collect()
}

fn set<T: Ord + Copy>(v: &[T]) -> BTreeSet<T> {
    v.iter().copied().collect()
}

fn random_cases(seed: u8) -> Vec<Case> {
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    let strat = arb_case(MAX_EVENTS);
    (0..RANDOM_TRACES).map(|_| strat.new_tree(&mut runner).unwrap().current()).collect()
}

fn basic_reproduction() -> Result<String, String> {
    let (t, m) = (fixtures::example_trace(), fixtures::fixture_model());
    let clock = Instant::now();
    let r = slice(&t, &m, 37, SliceMode::Basic).map_err(|e| e.to_string())?;
    let elapsed = clock.elapsed();
    let want = set(&[1, 5, 6, 7, 13, 15, 17, 24, 28, 30, 31, 32, 33, 36, 37]);
    if r.members != want {
        return Err(format!("members {:?}", r.members));
    }
    if (r.stats.slice_length, r.stats.trace_length) != (15, 37) {
        return Err(format!("stats {:?}", r.stats));
    }
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("15 of 37 events in {elapsed:?}"))
}

fn basic_edge_coverage() -> Result<String, String> {
    let (t, m) = (fixtures::example_trace(), fixtures::fixture_model());
    let r = slice(&t, &m, 37, SliceMode::Basic).unwrap();
    let cos = set(&[(33, 37), (30, 31), (17, 30), (15, 17), (13, 36), (7, 13), (6, 15), (5, 32), (1, 33)]);
    let lru = set(&[(32, 37), (31, 37), (28, 37)]);
    let lsru = set(&[(36, 37), (24, 33)]);
    for (name, kind, want) in [("COS", Cos, &cos), ("LRU", Lru, &lru), ("LSRU", Lsru, &lsru)] {
        let got = pairs(&r.edges, kind);
        let missing: Vec<_> = want.difference(&got).collect();
        if !missing.is_empty() {
            return Err(format!("{name} missing {missing:?}"));
        }
    }
    Ok(format!("9 COS, 3 LRU, 2 LSRU pairs contained in {} edges", r.edges.len()))
}

fn cause_effect_reproduction() -> Result<String, String> {
    let (t, m) = (fixtures::example_trace(), fixtures::fixture_model());
    let r = slice(&t, &m, 37, SliceMode::CauseEffect).unwrap();
    if r.members != set(&[1, 7, 13, 33, 36, 37]) {
        return Err(format!("members {:?}", r.members));
    }
    let ce: BTreeSet<_> = r.edges.iter().filter(|e| e.kind == Ce).map(|e| (e.from, e.to)).collect();
    let others: BTreeSet<_> = r.edges.iter().filter(|e| e.kind != Ce).map(|e| (e.kind, e.from, e.to)).collect();
    if ce != set(&[(36, 37)]) {
        return Err(format!("CE edges {ce:?}"));
    }
    let cos = set(&[(Cos, 33, 37), (Cos, 13, 36), (Cos, 7, 13), (Cos, 1, 33)]);
    if others != cos {
        return Err(format!("non-CE edges {others:?}"));
    }
    Ok("6 events; edges CE(36,37), COS (33,37),(13,36),(7,13),(1,33)".into())
}

fn dynamic_ce_uniqueness() -> Result<String, String> {
    let (t, m) = (fixtures::example_trace(), fixtures::fixture_model());
    let eng = DependencyEngine::new(&t, &m);
    let ce = eng.ce_predecessors(37).unwrap();
    if ce != set(&[DependencyEdge::cause_effect(BaseKind::Lsru, 36, 37)]) {
        return Err(format!("ce_predecessors(37) = {ce:?}"));
    }
    let mut base = eng.lru_predecessors(37).unwrap();
    base.extend(eng.lsru_predecessors(37).unwrap());
    if !set(&[28, 31, 32, 36]).is_subset(&base) {
        return Err(format!("lru ∪ lsru = {base:?}"));
    }
    Ok(format!("CE = {{(36,37)}} out of LRU∪LSRU {base:?}"))
}

fn oracle_equivalence() -> Result<String, String> {
    let mut checks = 0usize;
    for (n, Case { trace, model }) in random_cases(7).into_iter().enumerate() {
        for reading in [LsruReading::OtherProcesses, LsruReading::Literal] {
            let eng = DependencyEngine::new(&trace, &model).with_lsru_reading(reading);
            for j in 1..=trace.len() {
                let cos: BTreeSet<_> = eng.cos_predecessor(j).unwrap().into_iter().collect();
                let ce: BTreeSet<_> = eng.ce_predecessors(j).unwrap().iter().map(|e| (e.from, e.base == Some(BaseKind::Lsru))).collect();
                let ok = cos == tracelens_oracle::cos(&trace, j)
                    && eng.lru_predecessors(j).unwrap() == tracelens_oracle::lru(&trace, &model, j)
                    && eng.lsru_predecessors(j).unwrap() == tracelens_oracle::lsru(&trace, &model, j, reading)
                    && ce == tracelens_oracle::ce(&trace, &model, j, reading);
                if !ok {
                    return Err(format!("trace #{n}, event {j}, {reading:?}: detector mismatch\n{}", trace.serialize(TraceFormat::Tsv)));
                }
                checks += 4;
            }
            for mode in [SliceMode::Basic, SliceMode::CauseEffect] {
                let all: Vec<_> = (1..=trace.len())
                    .map(|j| tracelens_oracle::dependencies(&trace, &model, j, mode, reading))
                    .collect();
                for start in 1..=trace.len() {
                    let r = slice_with(&trace, &model, start, SliceOptions { mode, lsru: reading, ..Default::default() }).unwrap();
                    let (members, edges) = fixpoint_over(&all, start);
                    if r.members != members || r.edges.iter().map(edge_key).collect::<BTreeSet<_>>() != edges {
                        return Err(format!("trace #{n}, start {start}, {mode}, {reading:?}: slice mismatch"));
                    }
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{RANDOM_TRACES} traces, {checks} comparisons, 0 mismatches"))
}

fn invariant_suite() -> Result<String, String> {
    let mut checked = 0usize;
    for (n, Case { trace, model }) in random_cases(11).into_iter().enumerate() {
        let fail = |what: &str, j: usize| Err(format!("trace #{n}, event {j}: {what}"));
        let eng = DependencyEngine::new(&trace, &model);
        for j in 1..=trace.len() {
            if tracelens_oracle::cos(&trace, j).len() > 1 {
                return fail("COS predecessor not unique", j);
            }
            let lru = eng.lru_predecessors(j).unwrap();
            let lsru = eng.lsru_predecessors(j).unwrap();
            let res = |s: &BTreeSet<usize>| s.iter().map(|&i| trace.get(i).unwrap().resource.clone()).collect::<HashSet<_>>().len();
            if res(&lru) != lru.len() || res(&lsru) != lsru.len() {
                return fail("more than one LRU/LSRU predecessor per resource", j);
            }
            if !eng.ce_predecessors(j).unwrap().iter().all(|e| lru.contains(&e.from) || lsru.contains(&e.from)) {
                return fail("CE edge outside LRU ∪ LSRU", j);
            }
        }
        for start in 1..=trace.len() {
            let run = |mode, worklist| slice_with(&trace, &model, start, SliceOptions { mode, worklist, ..Default::default() }).unwrap();
            let basic = run(SliceMode::Basic, Worklist::Fifo);
            let ce = run(SliceMode::CauseEffect, Worklist::Fifo);
            if !ce.members.is_subset(&basic.members) {
                return fail("cause-effect members not within basic members", start);
            }
            for r in [&basic, &ce] {
                for &m in &r.members {
                    if !eng.all_dependencies(m, r.mode).unwrap().iter().all(|e| r.members.contains(&e.from)) {
                        return fail("slice not closed", start);
                    }
                }
                let lifo = run(r.mode, Worklist::Lifo);
                if lifo.members != r.members || lifo.edges != r.edges {
                    return fail("FIFO and LIFO worklists disagree", start);
                }
                let next: HashMap<_, _> = r.discovery_edges.iter().map(|e| (e.from, e.to)).collect();
                for &m in &r.members {
                    let mut at = m;
                    while at != start {
                        at = *next.get(&at).ok_or("member without path to start")?;
                    }
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{RANDOM_TRACES} traces, {checked} slice starts, 0 failures"))
}

fn round_trip() -> Result<String, String> {
    let mut traces = vec![fixtures::example_trace()];
    traces.extend(random_cases(3).into_iter().take(200).map(|c| c.trace));
    let mut gapped = fixtures::EXAMPLE_TSV.replacen("\n1\t", "\n100\t", 1);
    gapped.push('\n');
    traces.push(EventTrace::parse(&gapped, TraceFormat::Tsv).unwrap());
    for t in &traces {
        for f in [TraceFormat::Tsv, TraceFormat::Json] {
            if EventTrace::parse(&t.serialize(f), f).as_ref() != Ok(t) {
                return Err(format!("{f:?} trace round trip failed"));
            }
        }
    }
    for text in [fixtures::FIXTURE_MODEL_JSON, fixtures::LOCK_HELD_MODEL_JSON] {
        let m = SystemModel::parse(text).unwrap();
        if SystemModel::parse(&m.to_json()).as_ref() != Ok(&m) {
            return Err("model round trip failed".into());
        }
    }
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures");
    let (t, m) = (fixtures::example_trace(), fixtures::fixture_model());
    for (flag, mode) in [("basic", SliceMode::Basic), ("cause-effect", SliceMode::CauseEffect)] {
        let out = Command::new(env!("CARGO_BIN_EXE_tracelens"))
            .args(["slice", "--event", "37", "--format", "json", "--mode", flag, "--trace"])
            .arg(dir.join("example.tsv"))
            .arg("--model")
            .arg(dir.join("model.json"))
            .output()
            .map_err(|e| e.to_string())?;
        let parsed = SliceResult::from_json(&String::from_utf8_lossy(&out.stdout)).map_err(|e| e.to_string())?;
        if parsed != slice(&t, &m, 37, mode).unwrap() {
            return Err(format!("CLI JSON ({flag}) differs from library result"));
        }
    }
    Ok(format!("{} traces x 2 formats, 2 models, CLI JSON in both modes", traces.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("basic slice reproduction", basic_reproduction),
        ("basic edge coverage", basic_edge_coverage),
        ("cause-effect slice reproduction", cause_effect_reproduction),
        ("dynamic-CE uniqueness", dynamic_ce_uniqueness),
        ("oracle equivalence", oracle_equivalence),
        ("invariant suite", invariant_suite),
        ("round-trip", round_trip),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
