//! Replayable records of which rule produced a verdict and on what evidence.

use std::fmt;

use serde::Serialize;

use crate::algebra::{DerivationStep, EventSet};
use crate::event::{serialize_rational, serialize_rationals, Rational, SProbability};

/// Rules the engine can cite. The wire identifier ([`Rule::id`]) is what
/// reports carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    /// `0` is missing.
    AxiomZero,
    /// Some complement is missing.
    AxiomComplement,
    /// Some orthogonal triple sum is missing or exceeds 1.
    AxiomTriple,
    /// The added event is neither varying nor a constant bound.
    NonProper,
    /// `q` is orthogonal to an orthogonal pair whose total with `q` exceeds 1.
    TripleOverflow,
    /// `q` lies within 1/2 of some `p` on one side of it.
    Proximity,
    /// Lifted event incomparable to the base, partially reciprocal with some base element.
    LiftedIncomparable,
    /// Lifted copy of a base element with a fractional value at the new state.
    LiftedCopy,
    /// Two-valued lift over a concrete, non-Boolean base.
    LiftedConcrete,
    /// Partially reciprocal below 1/2 with a pointwise sum above 1.
    ReciprocalBelowOverflow,
    /// Partially reciprocal above 1/2 with a pointwise sum below 1.
    ReciprocalAboveDeficit,
    /// Reciprocal with an element of a Boolean algebra.
    Reciprocal,
    /// `p, q, p', q'` pairwise different and pairwise reciprocal.
    ReciprocalWithCandidate,
    /// `p1, p2, p1', p2'` pairwise different and pairwise reciprocal.
    ReciprocalPairs,
    /// Four elements pairwise below 1/2 split one sum two ways.
    BelowSplitSums,
    /// As [`Rule::BelowSplitSums`] with the candidate as the fourth element.
    BelowSplitSumsWithCandidate,
    /// Boolean completion of an MO2 algebra together with the candidate.
    Mo2Completion,
    /// Saturation derived a contradiction, or closed into an algebra.
    Saturation,
    /// Two-valued cube search.
    Oracle,
    /// Explicit Boolean algebra built by atom splitting.
    Construction,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::AxiomZero => "AXIOM_A",
            Rule::AxiomComplement => "AXIOM_B",
            Rule::AxiomTriple => "AXIOM_C",
            Rule::NonProper => "NON_PROPER",
            Rule::TripleOverflow => "TRIPLE_OVERFLOW",
            Rule::Proximity => "REMARK_PROXIMITY",
            Rule::LiftedIncomparable => "TH2",
            Rule::LiftedCopy => "TH3_DESTRUCTIVE",
            Rule::LiftedConcrete => "TH3_CRITICAL",
            Rule::ReciprocalBelowOverflow => "TH4_I",
            Rule::ReciprocalAboveDeficit => "TH4_II",
            Rule::Reciprocal => "TH4_III",
            Rule::ReciprocalWithCandidate => "TH5_I",
            Rule::ReciprocalPairs => "TH5_II",
            Rule::BelowSplitSums => "TH5_III",
            Rule::BelowSplitSumsWithCandidate => "TH5_IV",
            Rule::Mo2Completion => "TH7",
            Rule::Saturation => "SATURATION",
            Rule::Oracle => "ORACLE",
            Rule::Construction => "CONSTRUCTION",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum WitnessValue {
    Event(SProbability),
    /// Pointwise values that may fall outside `[0,1]`.
    Values(#[serde(serialize_with = "serialize_rationals")] Vec<Rational>),
    Scalar(#[serde(serialize_with = "serialize_rational")] Rational),
    State(String),
    Algebra(EventSet),
    Trace(Vec<DerivationStep>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub name: String,
    #[serde(flatten)]
    pub value: WitnessValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub rule: Rule,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn new(rule: Rule) -> Self {
        Certificate {
            rule,
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn with(mut self, name: &str, value: WitnessValue) -> Self {
        self.witnesses.push(Witness {
            name: name.to_string(),
            value,
        });
        self
    }

    pub fn event_witness(self, name: &str, p: &SProbability) -> Self {
        self.with(name, WitnessValue::Event(p.clone()))
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<&WitnessValue> {
        self.witnesses
            .iter()
            .find(|w| w.name == name)
            .map(|w| &w.value)
    }

    pub fn event(&self, name: &str) -> Option<&SProbability> {
        match self.get(name)? {
            WitnessValue::Event(p) => Some(p),
            _ => None,
        }
    }

    pub fn scalar(&self, name: &str) -> Option<&Rational> {
        match self.get(name)? {
            WitnessValue::Scalar(r) => Some(r),
            _ => None,
        }
    }

    pub fn state(&self, name: &str) -> Option<&str> {
        match self.get(name)? {
            WitnessValue::State(s) => Some(s),
            _ => None,
        }
    }

    pub fn values(&self, name: &str) -> Option<&[Rational]> {
        match self.get(name)? {
            WitnessValue::Values(v) => Some(v),
            _ => None,
        }
    }

    pub fn algebra(&self, name: &str) -> Option<&EventSet> {
        match self.get(name)? {
            WitnessValue::Algebra(a) => Some(a),
            _ => None,
        }
    }

    pub fn trace(&self, name: &str) -> Option<&[DerivationStep]> {
        match self.get(name)? {
            WitnessValue::Trace(t) => Some(t),
            _ => None,
        }
    }
}
