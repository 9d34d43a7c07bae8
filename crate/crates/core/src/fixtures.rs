//! The worked example: a 37-event trace of three processes sharing files and
//! file systems, with a model that admits every transition it contains.

use crate::model::SystemModel;
use crate::trace::{EventTrace, TraceFormat};

pub const EXAMPLE_TSV: &str = include_str!("../fixtures/example.tsv");

/// Model with the rules `File:(Lock, Open, Locked) ⇒ Process:(Wait, Running, Blocked)`
/// and `File:(Unlock, Locked, Open) ⇒ Process:(Signal, Blocked, Running)`.
pub const FIXTURE_MODEL_JSON: &str = include_str!("../fixtures/model.json");

/// Same model, but the wait rule is caused by re-locking an already locked
/// file: `File:(Lock, Locked, Locked) ⇒ Process:(·, Running, Blocked)`.
pub const LOCK_HELD_MODEL_JSON: &str = include_str!("../fixtures/model_lock_held_rules.json");

pub fn example_trace() -> EventTrace {
    EventTrace::parse(EXAMPLE_TSV, TraceFormat::Tsv).expect("bundled trace parses")
}

pub fn fixture_model() -> SystemModel {
    SystemModel::parse(FIXTURE_MODEL_JSON).expect("bundled model loads")
}

pub fn lock_held_model() -> SystemModel {
    SystemModel::parse(LOCK_HELD_MODEL_JSON).expect("bundled model loads")
}
