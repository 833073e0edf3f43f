//! Problem files: a JSON document naming the states, the events (as lists of
//! rational literals) and optionally a candidate event.
//!
//! ```json
//! {
//!   "states": ["s1", "s2"],
//!   "events": { "p": ["1/8", "5/8"], "p'": ["7/8", "0.375"], "q": ["3/8", "7/8"] },
//!   "candidate": "q",
//!   "metadata": "free text"
//! }
//! ```
//!
//! Literals are strings or JSON numbers: `"3/4"`, `"0.25"`, `1`. Decimals are
//! converted exactly; exponents are rejected.

use numev::{parse_rational, EventSet, Rational, SProbability, StateSet};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("event `{event}`, position {index}: cannot parse `{literal}` as a rational")]
    Literal {
        event: String,
        index: usize,
        literal: String,
    },
    #[error("event `{event}`: value {value} at state `{state}` lies outside [0,1]")]
    Range {
        event: String,
        state: String,
        value: String,
    },
    #[error("event `{event}` has {found} values for {expected} states")]
    Shape {
        event: String,
        expected: usize,
        found: usize,
    },
    #[error("candidate `{0}` is not one of the events")]
    UnknownCandidate(String),
}

impl ProblemError {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemError::Json { .. } | ProblemError::Field { .. } | ProblemError::Literal { .. } => {
                "parse_error"
            }
            ProblemError::Range { .. } => "range_error",
            ProblemError::Shape { .. } => "shape_error",
            ProblemError::UnknownCandidate(_) => "unknown_candidate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub states: StateSet,
    /// Named events in file order.
    pub events: Vec<(String, SProbability)>,
    pub candidate: Option<String>,
    pub metadata: Option<String>,
}

fn field(name: &str, message: impl Into<String>) -> ProblemError {
    ProblemError::Field {
        field: name.to_string(),
        message: message.into(),
    }
}

fn literal_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn parse_event(name: &str, states: &StateSet, raw: &Value) -> Result<SProbability, ProblemError> {
    let items = raw
        .as_array()
        .ok_or_else(|| field(&format!("events.{name}"), "expected a list of values"))?;
    if items.len() != states.len() {
        return Err(ProblemError::Shape {
            event: name.to_string(),
            expected: states.len(),
            found: items.len(),
        });
    }
    let mut values: Vec<Rational> = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        let bad = || ProblemError::Literal {
            event: name.to_string(),
            index,
            literal: item.to_string(),
        };
        let text = literal_text(item).ok_or_else(bad)?;
        let value = parse_rational(&text).map_err(|_| bad())?;
        if value < Rational::from_integer(0.into()) || value > Rational::from_integer(1.into()) {
            return Err(ProblemError::Range {
                event: name.to_string(),
                state: states.label(index).to_string(),
                value: text,
            });
        }
        values.push(value);
    }
    Ok(SProbability::new(states.clone(), values).expect("shape and range checked"))
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, ProblemError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ProblemError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = doc
        .as_object()
        .ok_or_else(|| field("<root>", "expected an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "states" | "events" | "candidate" | "metadata") {
            return Err(field(key, "unknown field"));
        }
    }

    let labels: Vec<String> = obj
        .get("states")
        .and_then(Value::as_array)
        .ok_or_else(|| field("states", "expected a list of labels"))?
        .iter()
        .map(|v| v.as_str().map(str::to_string))
        .collect::<Option<_>>()
        .ok_or_else(|| field("states", "labels must be strings"))?;
    let states = StateSet::new(labels).map_err(|e| field("states", e.to_string()))?;

    let raw_events: &Map<String, Value> = obj
        .get("events")
        .and_then(Value::as_object)
        .ok_or_else(|| field("events", "expected an object of named value lists"))?;
    let events = raw_events
        .iter()
        .map(|(name, raw)| Ok((name.clone(), parse_event(name, &states, raw)?)))
        .collect::<Result<Vec<_>, ProblemError>>()?;

    let candidate = match obj.get("candidate") {
        None | Some(Value::Null) => None,
        Some(Value::String(name)) => {
            if !events.iter().any(|(n, _)| n == name) {
                return Err(ProblemError::UnknownCandidate(name.clone()));
            }
            Some(name.clone())
        }
        Some(_) => return Err(field("candidate", "expected an event name")),
    };
    let metadata = match obj.get("metadata") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => Some(other.to_string()),
    };
    Ok(ProblemFile {
        states,
        events,
        candidate,
        metadata,
    })
}

impl ProblemFile {
    pub fn event(&self, name: &str) -> Option<&SProbability> {
        self.events.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    pub fn candidate_event(&self) -> Option<&SProbability> {
        self.candidate.as_deref().and_then(|n| self.event(n))
    }

    /// Every event except the candidate, in file order.
    pub fn base_events(&self) -> Vec<SProbability> {
        self.events
            .iter()
            .filter(|(n, _)| Some(n) != self.candidate.as_ref())
            .map(|(_, e)| e.clone())
            .collect()
    }

    /// The base events together with 0 and 1.
    pub fn base_set(&self) -> EventSet {
        EventSet::new(self.states.clone(), self.base_events()).expect("events share the state set")
    }

    pub fn all_events(&self) -> Vec<SProbability> {
        self.events.iter().map(|(_, e)| e.clone()).collect()
    }

    /// Canonical JSON form: rationals in lowest terms, fields in fixed order.
    pub fn to_json(&self) -> Value {
        let mut events = Map::new();
        for (name, e) in &self.events {
            let values = e.values().iter().map(|v| Value::String(v.to_string())).collect();
            events.insert(name.clone(), Value::Array(values));
        }
        let mut doc = Map::new();
        doc.insert(
            "states".into(),
            Value::Array(self.states.labels().iter().cloned().map(Value::String).collect()),
        );
        doc.insert("events".into(), Value::Object(events));
        if let Some(c) = &self.candidate {
            doc.insert("candidate".into(), Value::String(c.clone()));
        }
        if let Some(m) = &self.metadata {
            doc.insert("metadata".into(), Value::String(m.clone()));
        }
        Value::Object(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
        "states": ["s1", "s2", "s3", "s4"],
        "events": {
            "p1": ["1", "0", "0", "1"],
            "p2": ["0", "1", "0", "1"],
            "p1'": ["0", "1", "1", "0"],
            "p2'": [1, 0, 1, 0]
        },
        "metadata": "MO2"
    }"#;

    #[test]
    fn parses_named_events_in_order() {
        let p = parse_problem(EXAMPLE).unwrap();
        assert_eq!(p.events.len(), 4);
        assert_eq!(p.events[3].0, "p2'");
        assert_eq!(p.metadata.as_deref(), Some("MO2"));
        assert_eq!(p.base_set().len(), 6);
    }

    #[test]
    fn decimals_are_exact() {
        let p = parse_problem(r#"{"states":["a","b"],"events":{"q":["0.25", 0.75]}}"#).unwrap();
        assert_eq!(p.events[0].1.values(), &[numev::rational(1, 4), numev::rational(3, 4)]);
        let e = parse_problem(r#"{"states":["a"],"events":{"q":[1e-1]}}"#).unwrap_err();
        assert_eq!(e.kind(), "parse_error");
    }

    #[test]
    fn shape_range_and_candidate_errors() {
        let shape = parse_problem(r#"{"states":["a","b","c","d"],"events":{"q":["1","0","0"]}}"#);
        assert!(matches!(shape, Err(ProblemError::Shape { expected: 4, found: 3, .. })));
        let range = parse_problem(r#"{"states":["a"],"events":{"q":["5/4"]}}"#);
        assert!(matches!(range, Err(ProblemError::Range { .. })));
        let cand = parse_problem(r#"{"states":["a"],"events":{"q":["1"]},"candidate":"r"}"#);
        assert_eq!(cand, Err(ProblemError::UnknownCandidate("r".into())));
        let json = parse_problem("{\n\"states\": [").unwrap_err();
        assert!(matches!(json, ProblemError::Json { line: 2, .. }));
    }

    #[test]
    fn canonical_form_round_trips() {
        let p = parse_problem(EXAMPLE).unwrap();
        let text = serde_json::to_string(&p.to_json()).unwrap();
        assert_eq!(parse_problem(&text).unwrap(), p);
    }
}
