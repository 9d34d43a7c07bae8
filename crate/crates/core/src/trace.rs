//! Events, event traces, and the TSV / JSON trace encodings.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemModel;

/// Column header of the TSV encoding.
pub const TSV_HEADER: &str = "no\tprocess\toperation\tresource\told_state\tnew_state";
const SOURCE_NO_COLUMN: &str = "source_no";

/// One recorded event: `process` performed `operation` on `resource`, moving it
/// from `old_state` to `new_state`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    /// 1-based position in the trace.
    #[serde(rename = "no")]
    pub index: usize,
    pub process: String,
    pub operation: String,
    pub resource: String,
    pub old_state: String,
    pub new_state: String,
    /// Row number from the source file when the trace had to be re-indexed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_no: Option<u64>,
}

impl Event {
    pub fn new(
        index: usize,
        process: impl Into<String>,
        operation: impl Into<String>,
        resource: impl Into<String>,
        old_state: impl Into<String>,
        new_state: impl Into<String>,
    ) -> Self {
        Event {
            index,
            process: process.into(),
            operation: operation.into(),
            resource: resource.into(),
            old_state: old_state.into(),
            new_state: new_state.into(),
            source_no: None,
        }
    }

    /// True when the event moved its resource to a different state.
    pub fn changes_state(&self) -> bool {
        self.old_state != self.new_state
    }

    fn empty_field(&self) -> Option<&'static str> {
        [
            ("process", &self.process),
            ("operation", &self.operation),
            ("resource", &self.resource),
            ("old_state", &self.old_state),
            ("new_state", &self.new_state),
        ]
        .into_iter()
        .find(|(_, v)| v.is_empty())
        .map(|(name, _)| name)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} {} {} {}\u{2192}{}",
            self.index, self.process, self.operation, self.resource, self.old_state, self.new_state
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    #[default]
    Tsv,
    Json,
}

impl TraceFormat {
    /// Guesses the encoding from a file name, falling back to sniffing the content.
    pub fn detect(path: Option<&str>, content: &str) -> Self {
        if let Some(p) = path {
            let lower = p.to_ascii_lowercase();
            if lower.ends_with(".json") {
                return TraceFormat::Json;
            }
            if lower.ends_with(".tsv") || lower.ends_with(".txt") {
                return TraceFormat::Tsv;
            }
        }
        if content.trim_start().starts_with('[') {
            TraceFormat::Json
        } else {
            TraceFormat::Tsv
        }
    }
}

impl FromStr for TraceFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(TraceFormat::Tsv),
            "json" => Ok(TraceFormat::Json),
            other => Err(format!("unknown trace format `{other}` (expected tsv or json)")),
        }
    }
}

/// Non-fatal observation made while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: Option<usize>,
    pub message: String,
}

/// An immutable, densely indexed sequence of events. `events()[k - 1].index == k`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct EventTrace {
    events: Vec<Event>,
}

impl EventTrace {
    /// Builds a trace from events that are already densely indexed.
    pub fn new(events: Vec<Event>) -> Result<Self> {
        for (pos, e) in events.iter().enumerate() {
            if e.index != pos + 1 {
                return Err(Error::parse(format!(
                    "event at position {} has index {}",
                    pos + 1,
                    e.index
                )));
            }
            if let Some(field) = e.empty_field() {
                return Err(Error::parse(format!("event {}: empty {field}", e.index)));
            }
        }
        Ok(EventTrace { events })
    }

    /// Builds a trace from `(process, operation, resource, old_state, new_state)`
    /// tuples, numbering them 1..n.
    pub fn from_tuples<S: AsRef<str>>(rows: &[[S; 5]]) -> Result<Self> {
        let events = rows
            .iter()
            .enumerate()
            .map(|(i, [p, o, r, so, sn])| {
                Event::new(i + 1, p.as_ref(), o.as_ref(), r.as_ref(), so.as_ref(), sn.as_ref())
            })
            .collect();
        Self::new(events)
    }

    pub fn parse(text: &str, format: TraceFormat) -> Result<Self> {
        let (trace, warnings) = Self::parse_with_warnings(text, format)?;
        for w in warnings {
            log::warn!("{}", w.message);
        }
        Ok(trace)
    }

    pub fn parse_with_warnings(text: &str, format: TraceFormat) -> Result<(Self, Vec<ParseWarning>)> {
        if text.trim().is_empty() {
            return Err(Error::parse("no events"));
        }
        let rows = match format {
            TraceFormat::Tsv => parse_tsv_rows(text)?,
            TraceFormat::Json => parse_json_rows(text)?,
        };
        normalize(rows)
    }

    pub fn serialize(&self, format: TraceFormat) -> String {
        match format {
            TraceFormat::Tsv => self.to_tsv(),
            TraceFormat::Json => {
                serde_json::to_string_pretty(&self.events).expect("events serialize") + "\n"
            }
        }
    }

    fn to_tsv(&self) -> String {
        let annotated = self.events.iter().any(|e| e.source_no.is_some());
        let mut out = String::from(TSV_HEADER);
        if annotated {
            out.push('\t');
            out.push_str(SOURCE_NO_COLUMN);
        }
        out.push('\n');
        for e in &self.events {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}",
                e.index, e.process, e.operation, e.resource, e.old_state, e.new_state
            ));
            if annotated {
                out.push('\t');
                if let Some(no) = e.source_no {
                    out.push_str(&no.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Event> {
        self.events.iter()
    }

    /// The event at 1-based `index`, if any.
    pub fn get(&self, index: usize) -> Option<&Event> {
        index.checked_sub(1).and_then(|i| self.events.get(i))
    }

    /// The event at 1-based `index`, or an out-of-range error.
    pub fn event(&self, index: usize) -> Result<&Event> {
        self.get(index).ok_or(Error::IndexOutOfRange { index, len: self.len() })
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        self.event(index).map(|_| ())
    }

    /// The first `len` events as a trace of their own.
    pub fn prefix(&self, len: usize) -> EventTrace {
        EventTrace { events: self.events[..len.min(self.len())].to_vec() }
    }
}

impl<'a> IntoIterator for &'a EventTrace {
    type Item = &'a Event;
    type IntoIter = std::slice::Iter<'a, Event>;

    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}

impl<'de> Deserialize<'de> for EventTrace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let events = Vec::<Event>::deserialize(d)?;
        EventTrace::new(events).map_err(serde::de::Error::custom)
    }
}

struct RawRow {
    line: Option<usize>,
    no: u64,
    fields: [String; 5],
    source_no: Option<u64>,
}

fn parse_tsv_rows(text: &str) -> Result<Vec<RawRow>> {
    let mut columns = 6;
    let mut rows = Vec::new();
    let mut seen_content = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !seen_content {
            seen_content = true;
            if fields[0] == "no" {
                columns = parse_header(&fields, line_no)?;
                continue;
            }
        }
        if fields.len() != columns {
            return Err(Error::parse_at(
                line_no,
                format!("expected {columns} tab-separated fields, found {}", fields.len()),
            ));
        }
        let no = parse_no(fields[0], line_no, "no")?;
        let mut values: [String; 5] = Default::default();
        for (slot, (name, value)) in values
            .iter_mut()
            .zip(["process", "operation", "resource", "old_state", "new_state"].iter().zip(&fields[1..6]))
        {
            if value.is_empty() {
                return Err(Error::parse_at(line_no, format!("empty {name} field")));
            }
            *slot = (*value).to_string();
        }
        let source_no = match fields.get(6) {
            Some(s) if !s.is_empty() => Some(parse_no(s, line_no, SOURCE_NO_COLUMN)?),
            _ => None,
        };
        rows.push(RawRow { line: Some(line_no), no, fields: values, source_no });
    }
    Ok(rows)
}

fn parse_header(fields: &[&str], line_no: usize) -> Result<usize> {
    let expected: Vec<&str> = TSV_HEADER.split('\t').collect();
    let ok = match fields.len() {
        6 => fields == expected.as_slice(),
        7 => fields[..6] == expected[..] && fields[6] == SOURCE_NO_COLUMN,
        _ => false,
    };
    if ok {
        Ok(fields.len())
    } else {
        Err(Error::parse_at(line_no, format!("unrecognized header `{}`", fields.join("\t"))))
    }
}

fn parse_no(s: &str, line_no: usize, column: &str) -> Result<u64> {
    s.trim()
        .parse::<u64>()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::parse_at(line_no, format!("`{s}` is not a positive {column}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRow {
    no: u64,
    process: String,
    operation: String,
    resource: String,
    old_state: String,
    new_state: String,
    #[serde(default)]
    source_no: Option<u64>,
}

fn parse_json_rows(text: &str) -> Result<Vec<RawRow>> {
    let rows: Vec<JsonRow> = serde_json::from_str(text)
        .map_err(|e| Error::parse_at(e.line(), e.to_string()))?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let fields = [r.process, r.operation, r.resource, r.old_state, r.new_state];
            if let Some(pos) = fields.iter().position(String::is_empty) {
                let name = ["process", "operation", "resource", "old_state", "new_state"][pos];
                return Err(Error::parse(format!("entry {}: empty {name} field", i + 1)));
            }
            if r.no == 0 {
                return Err(Error::parse(format!("entry {}: `no` must be positive", i + 1)));
            }
            Ok(RawRow { line: None, no: r.no, fields, source_no: r.source_no })
        })
        .collect()
}

fn normalize(rows: Vec<RawRow>) -> Result<(EventTrace, Vec<ParseWarning>)> {
    if rows.is_empty() {
        return Err(Error::parse("no events"));
    }
    let mut seen = HashSet::with_capacity(rows.len());
    for (pos, r) in rows.iter().enumerate() {
        if !seen.insert(r.no) {
            let msg = format!("duplicate event number {}", r.no);
            return Err(match r.line {
                Some(l) => Error::parse_at(l, msg),
                None => Error::parse(format!("entry {}: {msg}", pos + 1)),
            });
        }
    }
    let dense = rows.iter().enumerate().all(|(pos, r)| r.no == pos as u64 + 1);
    let mut warnings = Vec::new();
    if !dense {
        warnings.push(ParseWarning {
            line: None,
            message: format!(
                "event numbers are not 1..{}; re-indexed densely, originals kept as source_no",
                rows.len()
            ),
        });
    }
    let events = rows
        .into_iter()
        .enumerate()
        .map(|(pos, r)| {
            let [process, operation, resource, old_state, new_state] = r.fields;
            Event {
                index: pos + 1,
                process,
                operation,
                resource,
                old_state,
                new_state,
                source_no: if dense { r.source_no } else { r.source_no.or(Some(r.no)) },
            }
        })
        .collect();
    Ok((EventTrace { events }, warnings))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    UnknownResource,
    UnknownOperation,
    IllegalTransition,
    StateDiscontinuity,
}

/// A disagreement between a trace event and the system model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub event_index: usize,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "event {}: {:?}: {}", self.event_index, self.kind, self.message)
    }
}

/// Checks every event against the model: the resource must be declared, its
/// transition must appear in the class diagram, and its old state must continue
/// from the previous event on the same resource.
pub fn validate_against_model(trace: &EventTrace, model: &SystemModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut last_state: std::collections::HashMap<&str, &str> = Default::default();
    for e in trace {
        let v = |kind, message: String| Violation { event_index: e.index, kind, message };
        match model.class_of(&e.resource) {
            None => out.push(v(
                ViolationKind::UnknownResource,
                format!("resource `{}` is not declared", e.resource),
            )),
            Some(class) => {
                let std = &class.std;
                if !std.operations.contains(&e.operation) {
                    out.push(v(
                        ViolationKind::UnknownOperation,
                        format!("class {} has no operation `{}`", class.name, e.operation),
                    ));
                } else if !std.has_transition(&e.operation, &e.old_state, &e.new_state) {
                    out.push(v(
                        ViolationKind::IllegalTransition,
                        format!(
                            "class {} has no transition ({}, {}, {})",
                            class.name, e.operation, e.old_state, e.new_state
                        ),
                    ));
                }
            }
        }
        if let Some(prev) = last_state.insert(&e.resource, &e.new_state) {
            if prev != e.old_state {
                out.push(v(
                    ViolationKind::StateDiscontinuity,
                    format!("{} was {prev} but event starts from {}", e.resource, e.old_state),
                ));
            }
        }
    }
    out
}
