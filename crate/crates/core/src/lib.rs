//! Dependency analysis and backward slicing of event traces recorded by
//! multi-process systems.
//!
//! A trace is a sequence of `⟨process, operation, resource, old state, new
//! state⟩` events. [`DependencyEngine`] finds which earlier events a given event
//! depends on; [`slice`] closes over those dependencies from a suspect event to
//! produce the much smaller sub-trace worth reading.
//!
//! ```
//! use tracelens_core::{fixtures, slice, SliceMode};
//!
//! let trace = fixtures::example_trace();
//! let model = fixtures::fixture_model();
//! let result = slice(&trace, &model, 37, SliceMode::Basic).unwrap();
//! assert_eq!(result.members.len(), 15);
//! ```

pub mod deps;
pub mod dot;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod slicer;
pub mod trace;

pub use deps::{BaseKind, DependencyEdge, DependencyEngine, DependencyKind, LsruReading, SliceMode};
pub use dot::to_dot;
pub use error::{Error, Result};
pub use model::{
    matches_rule, CauseEffectRule, ClassFile, ModelFile, ResourceClass, ResourceDecl, ResourceKind, StateTransitionDiagram,
    SystemModel, Transition, TransitionPattern,
};
pub use slicer::{slice, slice_engine, slice_with, SliceOptions, SliceResult, SliceStats, Worklist};
pub use trace::{validate_against_model, Event, EventTrace, ParseWarning, TraceFormat, Violation, ViolationKind};
