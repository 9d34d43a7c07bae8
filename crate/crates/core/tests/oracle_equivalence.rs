//! Detectors and slicer against the brute-force reference evaluators.

use std::collections::BTreeSet;

use proptest::prelude::*;
use tracelens_core::{slice_with, DependencyEngine, LsruReading, SliceMode, SliceOptions};
use tracelens_oracle::{arb_case, edge_key, fixpoint_slice, Case};

const READINGS: [LsruReading; 2] = [LsruReading::OtherProcesses, LsruReading::Literal];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn detectors_match_definitions(Case { trace, model } in arb_case(50)) {
        for reading in READINGS {
            let eng = DependencyEngine::new(&trace, &model).with_lsru_reading(reading);
            for j in 1..=trace.len() {
                let cos: BTreeSet<_> = eng.cos_predecessor(j).unwrap().into_iter().collect();
                prop_assert_eq!(cos, tracelens_oracle::cos(&trace, j), "COS j={}", j);
                prop_assert_eq!(eng.lru_predecessors(j).unwrap(), tracelens_oracle::lru(&trace, &model, j), "LRU j={}", j);
                prop_assert_eq!(
                    eng.lsru_predecessors(j).unwrap(),
                    tracelens_oracle::lsru(&trace, &model, j, reading),
                    "LSRU j={} {:?}", j, reading
                );
                let ce: BTreeSet<_> = eng.ce_predecessors(j).unwrap().iter().map(edge_key).collect();
                let want: BTreeSet<_> = tracelens_oracle::ce(&trace, &model, j, reading)
                    .into_iter()
                    .map(|(i, shared)| (if shared { "CE/LSRU" } else { "CE/LRU" }, i, j))
                    .collect();
                prop_assert_eq!(ce, want, "CE j={}", j);
            }
        }
    }

    #[test]
    fn slice_matches_whole_trace_fixpoint(
        Case { trace, model } in arb_case(50),
        start_seed in any::<prop::sample::Index>(),
        ce_mode in any::<bool>(),
        literal in any::<bool>(),
    ) {
        let start = start_seed.index(trace.len()) + 1;
        let mode = if ce_mode { SliceMode::CauseEffect } else { SliceMode::Basic };
        let lsru = if literal { LsruReading::Literal } else { LsruReading::OtherProcesses };
        let got = slice_with(&trace, &model, start, SliceOptions { mode, lsru, ..Default::default() }).unwrap();
        let (members, edges) = fixpoint_slice(&trace, &model, start, mode, lsru);
        prop_assert_eq!(&got.members, &members);
        prop_assert_eq!(got.edges.iter().map(edge_key).collect::<BTreeSet<_>>(), edges);
    }
}
