//! Resource classes with their state-transition diagrams, resource
//! declarations, may-interact pairs, and static cause-effect rules.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{Event, EventTrace};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition {
    pub op: String,
    pub from: String,
    pub to: String,
}

/// States, operations, and `(operation, from, to)` transition triples of one
/// resource class.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StateTransitionDiagram {
    pub states: BTreeSet<String>,
    pub operations: BTreeSet<String>,
    pub transitions: BTreeSet<Transition>,
}

impl StateTransitionDiagram {
    pub fn has_transition(&self, op: &str, from: &str, to: &str) -> bool {
        // BTreeSet<Transition> cannot be probed with borrowed parts, and diagrams are small.
        self.transitions.iter().any(|t| t.op == op && t.from == from && t.to == to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceClass {
    pub name: String,
    pub std: StateTransitionDiagram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    Active,
    Passive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceDecl {
    pub id: String,
    #[serde(rename = "class")]
    pub class_name: String,
    pub kind: ResourceKind,
}

/// A transition triple in which any part may be left open.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionPattern {
    #[serde(rename = "class")]
    pub class_name: String,
    #[serde(rename = "op", default, skip_serializing_if = "Option::is_none")]
    pub operation: Option<String>,
    #[serde(rename = "from", default, skip_serializing_if = "Option::is_none")]
    pub from_state: Option<String>,
    #[serde(rename = "to", default, skip_serializing_if = "Option::is_none")]
    pub to_state: Option<String>,
}

impl TransitionPattern {
    pub fn new(class_name: impl Into<String>) -> Self {
        TransitionPattern { class_name: class_name.into(), operation: None, from_state: None, to_state: None }
    }

    pub fn transition(class_name: &str, op: &str, from: &str, to: &str) -> Self {
        TransitionPattern {
            class_name: class_name.into(),
            operation: Some(op.into()),
            from_state: Some(from.into()),
            to_state: Some(to.into()),
        }
    }

    /// Matches `event` whose resource belongs to `resource_class`.
    pub fn matches(&self, resource_class: Option<&str>, event: &Event) -> bool {
        fn field(want: &Option<String>, got: &str) -> bool {
            want.as_deref().is_none_or(|w| w == got)
        }
        resource_class == Some(self.class_name.as_str())
            && field(&self.operation, &event.operation)
            && field(&self.from_state, &event.old_state)
            && field(&self.to_state, &event.new_state)
    }

    fn is_wildcard(&self) -> bool {
        self.operation.is_none() && self.from_state.is_none() && self.to_state.is_none()
    }
}

/// Declares that a `cause` transition on a used resource may bring about an
/// `effect` transition on an active resource.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauseEffectRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub cause: TransitionPattern,
    pub effect: TransitionPattern,
}

impl CauseEffectRule {
    pub fn matches(&self, model: &SystemModel, cause: &Event, effect: &Event) -> bool {
        self.cause.matches(model.class_name_of(&cause.resource), cause)
            && self.effect.matches(model.class_name_of(&effect.resource), effect)
    }
}

/// Free-function form of [`CauseEffectRule::matches`].
pub fn matches_rule(rule: &CauseEffectRule, cause: &Event, effect: &Event, model: &SystemModel) -> bool {
    rule.matches(model, cause, effect)
}

/// A validated system model. Construct with [`SystemModel::parse`] or
/// [`SystemModel::from_file`]; immutable afterwards apart from
/// [`SystemModel::with_rules`], which returns a new model.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SystemModel {
    classes: Vec<ResourceClass>,
    resources: Vec<ResourceDecl>,
    may_interact: BTreeSet<(String, String)>,
    ce_rules: Vec<CauseEffectRule>,
    /// Undeclared resources count as active when they act as a process somewhere
    /// in the trace, instead of being an error.
    permissive: bool,
    /// Reject cause-effect rules between classes with no declared interaction.
    enforce_may_interact: bool,
    class_by_name: BTreeMap<String, usize>,
    resource_by_id: BTreeMap<String, usize>,
}

/// On-disk JSON shape of a model.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub permissive: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub enforce_may_interact: bool,
    #[serde(default)]
    pub classes: Vec<ClassFile>,
    #[serde(default)]
    pub resources: Vec<ResourceDecl>,
    #[serde(default)]
    pub may_interact: Vec<(String, String)>,
    #[serde(default)]
    pub cause_effect_rules: Vec<CauseEffectRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassFile {
    pub name: String,
    #[serde(default)]
    pub states: Vec<String>,
    #[serde(default)]
    pub operations: Vec<String>,
    #[serde(default)]
    pub transitions: Vec<Transition>,
}

impl ClassFile {
    /// A class whose diagram allows every operation between every pair of states.
    pub fn complete<S: AsRef<str>>(name: &str, states: &[S], operations: &[S]) -> Self {
        let transitions = operations
            .iter()
            .flat_map(|op| {
                states.iter().flat_map(move |from| {
                    states.iter().map(move |to| Transition {
                        op: op.as_ref().into(),
                        from: from.as_ref().into(),
                        to: to.as_ref().into(),
                    })
                })
            })
            .collect();
        ClassFile {
            name: name.into(),
            states: states.iter().map(|s| s.as_ref().into()).collect(),
            operations: operations.iter().map(|s| s.as_ref().into()).collect(),
            transitions,
        }
    }
}

impl SystemModel {
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::model("empty model file"));
        }
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| Error::model(format!("line {}: {e}", e.line())))?;
        Self::from_file(file)
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        let mut model = SystemModel {
            permissive: file.permissive,
            enforce_may_interact: file.enforce_may_interact,
            ..Default::default()
        };

        for c in file.classes {
            if model.class_by_name.contains_key(&c.name) {
                return Err(Error::model(format!("duplicate class `{}`", c.name)));
            }
            let mut std = StateTransitionDiagram {
                states: c.states.into_iter().collect(),
                operations: c.operations.into_iter().collect(),
                transitions: BTreeSet::new(),
            };
            for t in c.transitions {
                if !std.operations.contains(&t.op) {
                    return Err(Error::model(format!(
                        "class `{}`: transition uses undeclared operation `{}`",
                        c.name, t.op
                    )));
                }
                for s in [&t.from, &t.to] {
                    if !std.states.contains(s) {
                        return Err(Error::model(format!(
                            "class `{}`: transition uses undeclared state `{s}`",
                            c.name
                        )));
                    }
                }
                let desc = format!("({}, {}, {})", t.op, t.from, t.to);
                if !std.transitions.insert(t) {
                    return Err(Error::model(format!("class `{}`: duplicate transition {desc}", c.name)));
                }
            }
            model.class_by_name.insert(c.name.clone(), model.classes.len());
            model.classes.push(ResourceClass { name: c.name, std });
        }

        for r in file.resources {
            if r.id.is_empty() {
                return Err(Error::model("resource with empty id"));
            }
            if !model.class_by_name.contains_key(&r.class_name) {
                return Err(Error::model(format!(
                    "resource `{}` refers to unknown class `{}`",
                    r.id, r.class_name
                )));
            }
            if model.resource_by_id.insert(r.id.clone(), model.resources.len()).is_some() {
                return Err(Error::model(format!("duplicate resource id `{}`", r.id)));
            }
            model.resources.push(r);
        }

        for (actor, target) in file.may_interact {
            for id in [&actor, &target] {
                if !model.resource_by_id.contains_key(id) {
                    return Err(Error::model(format!("may_interact names undeclared resource `{id}`")));
                }
            }
            model.may_interact.insert((actor, target));
        }

        model.validate_rules(&file.cause_effect_rules)?;
        model.ce_rules = file.cause_effect_rules;
        Ok(model)
    }

    /// A copy of this model with its cause-effect rules replaced.
    pub fn with_rules(&self, rules: Vec<CauseEffectRule>) -> Result<Self> {
        self.validate_rules(&rules)?;
        Ok(SystemModel { ce_rules: rules, ..self.clone() })
    }

    fn validate_rules(&self, rules: &[CauseEffectRule]) -> Result<()> {
        for (i, rule) in rules.iter().enumerate() {
            let name = rule.label.clone().unwrap_or_else(|| format!("#{}", i + 1));
            for (role, p) in [("cause", &rule.cause), ("effect", &rule.effect)] {
                let class = self.class(&p.class_name).ok_or_else(|| {
                    Error::model(format!("rule {name}: {role} names undeclared class `{}`", p.class_name))
                })?;
                if p.is_wildcard() {
                    return Err(Error::model(format!(
                        "rule {name}: {role} pattern needs at least one of op/from/to"
                    )));
                }
                if let Some(op) = &p.operation {
                    if !class.std.operations.contains(op) {
                        return Err(Error::model(format!(
                            "rule {name}: {role} names operation `{op}` undeclared in class `{}`",
                            class.name
                        )));
                    }
                }
                for s in p.from_state.iter().chain(&p.to_state) {
                    if !class.std.states.contains(s) {
                        return Err(Error::model(format!(
                            "rule {name}: {role} names state `{s}` undeclared in class `{}`",
                            class.name
                        )));
                    }
                }
            }
            let effect_is_active = self
                .resources
                .iter()
                .any(|r| r.kind == ResourceKind::Active && r.class_name == rule.effect.class_name);
            if !effect_is_active {
                return Err(Error::model(format!(
                    "rule {name}: effect class `{}` has no active resource",
                    rule.effect.class_name
                )));
            }
            if self.enforce_may_interact && !self.classes_interact(&rule.cause.class_name, &rule.effect.class_name) {
                return Err(Error::model(format!(
                    "rule {name}: no may_interact pair between classes `{}` and `{}`",
                    rule.cause.class_name, rule.effect.class_name
                )));
            }
        }
        Ok(())
    }

    fn classes_interact(&self, a: &str, b: &str) -> bool {
        self.may_interact.iter().any(|(x, y)| {
            let (cx, cy) = (self.class_name_of(x), self.class_name_of(y));
            (cx == Some(a) && cy == Some(b)) || (cx == Some(b) && cy == Some(a))
        })
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            permissive: self.permissive,
            enforce_may_interact: self.enforce_may_interact,
            classes: self
                .classes
                .iter()
                .map(|c| ClassFile {
                    name: c.name.clone(),
                    states: c.std.states.iter().cloned().collect(),
                    operations: c.std.operations.iter().cloned().collect(),
                    transitions: c.std.transitions.iter().cloned().collect(),
                })
                .collect(),
            resources: self.resources.clone(),
            may_interact: self.may_interact.iter().cloned().collect(),
            cause_effect_rules: self.ce_rules.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model serializes") + "\n"
    }

    pub fn classes(&self) -> &[ResourceClass] {
        &self.classes
    }

    pub fn resources(&self) -> &[ResourceDecl] {
        &self.resources
    }

    pub fn may_interact(&self) -> &BTreeSet<(String, String)> {
        &self.may_interact
    }

    pub fn rules(&self) -> &[CauseEffectRule] {
        &self.ce_rules
    }

    pub fn is_permissive(&self) -> bool {
        self.permissive
    }

    pub fn class(&self, name: &str) -> Option<&ResourceClass> {
        self.class_by_name.get(name).map(|&i| &self.classes[i])
    }

    pub fn resource(&self, id: &str) -> Option<&ResourceDecl> {
        self.resource_by_id.get(id).map(|&i| &self.resources[i])
    }

    pub fn class_of(&self, resource: &str) -> Option<&ResourceClass> {
        self.resource(resource).and_then(|r| self.class(&r.class_name))
    }

    pub fn class_name_of(&self, resource: &str) -> Option<&str> {
        self.resource(resource).map(|r| r.class_name.as_str())
    }

    /// Whether `resource` is active. Undeclared ids are an error unless the
    /// model is permissive, in which case they are active iff they appear as a
    /// process somewhere in `trace`.
    pub fn is_active(&self, resource: &str, trace: &EventTrace) -> Result<bool> {
        self.is_active_with(resource, |id| trace.iter().any(|e| e.process == id))
    }

    pub(crate) fn is_active_with(&self, resource: &str, acts: impl FnOnce(&str) -> bool) -> Result<bool> {
        match self.resource(resource) {
            Some(r) => Ok(r.kind == ResourceKind::Active),
            None if self.permissive => Ok(acts(resource)),
            None => Err(Error::UnknownResource(resource.to_string())),
        }
    }

    /// A permissive model with one class per role, declaring every process in
    /// `trace` active and every other resource passive. Diagrams are empty, so
    /// it suits dependency analysis but not validation.
    pub fn inferred_from(trace: &EventTrace) -> Self {
        let actors: HashSet<&str> = trace.iter().map(|e| e.process.as_str()).collect();
        let mut ids: Vec<&str> = trace
            .iter()
            .flat_map(|e| [e.process.as_str(), e.resource.as_str()])
            .collect();
        ids.sort_unstable();
        ids.dedup();
        let file = ModelFile {
            permissive: true,
            classes: ["Active", "Passive"]
                .into_iter()
                .map(|n| ClassFile { name: n.into(), states: vec![], operations: vec![], transitions: vec![] })
                .collect(),
            resources: ids
                .into_iter()
                .map(|id| {
                    let kind = if actors.contains(id) { ResourceKind::Active } else { ResourceKind::Passive };
                    let class_name = if kind == ResourceKind::Active { "Active" } else { "Passive" };
                    ResourceDecl { id: id.into(), class_name: class_name.into(), kind }
                })
                .collect(),
            ..Default::default()
        };
        Self::from_file(file).expect("inferred model is consistent")
    }
}
