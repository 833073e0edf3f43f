//! Event sets, axiom verification, order-theoretic structure and saturation.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::certificate::{Certificate, Rule, WitnessValue};
use crate::error::{Error, Result};
use crate::event::{
    format_raw, in_unit_range, is_proper_raw, raw_difference, raw_sum, serialize_rationals,
    Rational, SProbability, StateSet,
};
use crate::par;

/// Per-axiom cap on recorded violations.
pub const MAX_VIOLATIONS_PER_AXIOM: usize = 64;

/// A finite, duplicate-free set of S-probabilities over one state set, kept
/// in ascending lexicographic order of value vectors.
/// Equality ignores construction warnings.
#[derive(Debug, Clone)]
pub struct EventSet {
    states: StateSet,
    events: Vec<SProbability>,
    warnings: Vec<String>,
}

impl PartialEq for EventSet {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states && self.events == other.events
    }
}

impl Eq for EventSet {}

impl std::hash::Hash for EventSet {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.states.hash(h);
        self.events.hash(h);
    }
}

impl EventSet {
    /// Builds the set with the constants `0` and `1` added. Duplicates are
    /// dropped with a warning.
    pub fn new<I>(states: StateSet, events: I) -> Result<Self>
    where
        I: IntoIterator<Item = SProbability>,
    {
        let mut all: Vec<SProbability> = events.into_iter().collect();
        all.push(SProbability::zero(&states));
        all.push(SProbability::one(&states));
        Self::build(states, all)
    }

    /// Builds the set from exactly the given events (no constants added).
    pub fn from_exact<I>(states: StateSet, events: I) -> Result<Self>
    where
        I: IntoIterator<Item = SProbability>,
    {
        Self::build(states, events.into_iter().collect())
    }

    fn build(states: StateSet, events: Vec<SProbability>) -> Result<Self> {
        for e in &events {
            if e.states() != &states {
                return Err(Error::StateSetMismatch);
            }
        }
        let mut counts: BTreeMap<&SProbability, usize> = BTreeMap::new();
        for e in &events {
            *counts.entry(e).or_default() += 1;
        }
        let warnings = counts
            .iter()
            .filter(|(e, c)| **c > 1 && !e.is_constant_bound())
            .map(|(e, c)| format!("event {e} listed {c} times; duplicates removed"))
            .collect();
        let events = counts.into_keys().cloned().collect();
        Ok(EventSet {
            states,
            events,
            warnings,
        })
    }

    pub(crate) fn from_sorted_unchecked(states: StateSet, events: Vec<SProbability>) -> Self {
        debug_assert!(events.windows(2).all(|w| w[0] < w[1]));
        EventSet {
            states,
            events,
            warnings: Vec::new(),
        }
    }

    pub fn states(&self) -> &StateSet {
        &self.states
    }

    pub fn events(&self) -> &[SProbability] {
        &self.events
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SProbability> {
        self.events.iter()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn index_of(&self, p: &SProbability) -> Option<usize> {
        if p.states() != &self.states {
            return None;
        }
        self.index_of_values(p.values())
    }

    pub(crate) fn index_of_values(&self, values: &[Rational]) -> Option<usize> {
        self.events
            .binary_search_by(|e| e.values().cmp(values))
            .ok()
    }

    pub fn contains(&self, p: &SProbability) -> bool {
        self.index_of(p).is_some()
    }

    pub fn is_subset_of(&self, other: &EventSet) -> bool {
        self.events.iter().all(|e| other.contains(e))
    }

    /// `E ∪ {q}`.
    pub fn with_event(&self, q: &SProbability) -> Result<EventSet> {
        if q.states() != &self.states {
            return Err(Error::StateSetMismatch);
        }
        let mut events = self.events.clone();
        if let Err(pos) = events.binary_search(q) {
            events.insert(pos, q.clone());
        }
        Ok(EventSet {
            states: self.states.clone(),
            events,
            warnings: self.warnings.clone(),
        })
    }

    pub(crate) fn require(&self, p: &SProbability) -> Result<usize> {
        self.index_of(p)
            .ok_or_else(|| Error::ElementNotInSet(p.to_string()))
    }

    pub fn zero_index(&self) -> Option<usize> {
        self.index_of(&SProbability::zero(&self.states))
    }

    pub fn one_index(&self) -> Option<usize> {
        self.index_of(&SProbability::one(&self.states))
    }
}

impl Serialize for EventSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.events.iter())
    }
}

impl<'a> IntoIterator for &'a EventSet {
    type Item = &'a SProbability;
    type IntoIter = std::slice::Iter<'a, SProbability>;
    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}

// ---------------------------------------------------------------------------
// Bitsets

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

/// Order and orthogonality relations of a list of events as bitsets.
struct Relations {
    /// `down[i]` = { j : e_j ≤ e_i }.
    down: Vec<Bits>,
    /// `up[i]` = { j : e_i ≤ e_j }.
    up: Vec<Bits>,
    /// `perp[i]` = { j : e_i ⊥ e_j }.
    perp: Vec<Bits>,
}

impl Relations {
    fn build(events: &[SProbability]) -> Self {
        let n = events.len();
        let rows: Vec<(Bits, Bits, Bits)> = par::map_range(n, |i| {
            let mut down = Bits::new(n);
            let mut up = Bits::new(n);
            let mut perp = Bits::new(n);
            for (j, e) in events.iter().enumerate() {
                if e.le_unchecked(&events[i]) {
                    down.set(j);
                }
                if events[i].le_unchecked(e) {
                    up.set(j);
                }
                if events[i].perp_unchecked(e) {
                    perp.set(j);
                }
            }
            (down, up, perp)
        });
        let mut r = Relations {
            down: Vec::with_capacity(n),
            up: Vec::with_capacity(n),
            perp: Vec::with_capacity(n),
        };
        for (d, u, p) in rows {
            r.down.push(d);
            r.up.push(u);
            r.perp.push(p);
        }
        r
    }

    fn meet(&self, i: usize, j: usize) -> Option<usize> {
        Self::extremum(&self.down, self.down[i].and(&self.down[j]))
    }

    fn join(&self, i: usize, j: usize) -> Option<usize> {
        Self::extremum(&self.up, self.up[i].and(&self.up[j]))
    }

    // The greatest element of `bounds` w.r.t. the relation whose principal
    // ideals are `ideal`: the bound whose ideal equals the whole bound set.
    fn extremum(ideal: &[Bits], bounds: Bits) -> Option<usize> {
        let m = bounds.ones().max_by_key(|&m| ideal[m].count())?;
        (ideal[m] == bounds).then_some(m)
    }
}

/// Meet and join tables for all pairs; `None` where the bound does not exist.
struct LatticeTables {
    n: usize,
    meet: Vec<Option<u32>>,
    join: Vec<Option<u32>>,
}

impl LatticeTables {
    fn build(rel: &Relations) -> Self {
        let n = rel.down.len();
        let rows: Vec<Vec<(Option<u32>, Option<u32>)>> = par::map_range(n, |i| {
            (0..n)
                .map(|j| {
                    (
                        rel.meet(i, j).map(|m| m as u32),
                        rel.join(i, j).map(|m| m as u32),
                    )
                })
                .collect()
        });
        let mut meet = Vec::with_capacity(n * n);
        let mut join = Vec::with_capacity(n * n);
        for row in rows {
            for (m, j) in row {
                meet.push(m);
                join.push(j);
            }
        }
        LatticeTables { n, meet, join }
    }

    fn is_lattice(&self) -> bool {
        self.meet.iter().all(Option::is_some) && self.join.iter().all(Option::is_some)
    }

    fn meet(&self, i: usize, j: usize) -> usize {
        self.meet[i * self.n + j].expect("lattice") as usize
    }

    fn join(&self, i: usize, j: usize) -> usize {
        self.join[i * self.n + j].expect("lattice") as usize
    }
}

// ---------------------------------------------------------------------------
// Axioms

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub holds_a: bool,
    pub holds_b: bool,
    pub holds_c: bool,
    pub violations: Vec<Certificate>,
    /// Set when a per-axiom cap cut the violation list short.
    pub truncated: bool,
    pub all_proper: bool,
    pub non_proper_witnesses: Vec<SProbability>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl AxiomReport {
    pub fn is_algebra(&self) -> bool {
        self.holds_a && self.holds_b && self.holds_c
    }
}

/// Checks axioms (a)–(c). Axiom (c) is checked on all pairwise orthogonal
/// triples with repetition allowed.
pub fn verify_axioms(set: &EventSet) -> AxiomReport {
    let events = set.events();
    let states = set.states();
    let mut violations = Vec::new();
    let mut truncated = false;

    let holds_a = set.zero_index().is_some();
    if !holds_a {
        violations.push(Certificate::new(Rule::AxiomZero).note("constant 0 is missing"));
    }

    let missing: Vec<Certificate> = par::map_range(events.len(), |i| {
        let c = events[i].complement();
        (!set.contains(&c)).then(|| {
            Certificate::new(Rule::AxiomComplement)
                .event_witness("p", &events[i])
                .event_witness("missing_complement", &c)
        })
    })
    .into_iter()
    .flatten()
    .collect();
    let holds_b = missing.is_empty();
    truncated |= missing.len() > MAX_VIOLATIONS_PER_AXIOM;
    violations.extend(missing.into_iter().take(MAX_VIOLATIONS_PER_AXIOM));

    let rel = Relations::build(events);
    let triples = triple_violations(set, &rel, MAX_VIOLATIONS_PER_AXIOM + 1);
    let holds_c = triples.is_empty();
    truncated |= triples.len() > MAX_VIOLATIONS_PER_AXIOM;
    violations.extend(triples.into_iter().take(MAX_VIOLATIONS_PER_AXIOM));

    let non_proper: Vec<SProbability> = events.iter().filter(|e| !e.is_proper()).cloned().collect();
    let _ = states;
    AxiomReport {
        holds_a,
        holds_b,
        holds_c,
        violations,
        truncated,
        all_proper: non_proper.is_empty(),
        non_proper_witnesses: non_proper,
        warnings: set.warnings().to_vec(),
    }
}

fn triple_violations(set: &EventSet, rel: &Relations, cap: usize) -> Vec<Certificate> {
    let events = set.events();
    let n = events.len();
    let mut out = par::flat_map_range(n, |i| {
        let mut local = Vec::new();
        for j in rel.perp[i].ones().filter(|&j| j >= i) {
            let common = rel.perp[i].and(&rel.perp[j]);
            for k in common.ones().filter(|&k| k >= j) {
                let sum = raw_sum(&raw_sum(events[i].values(), events[j].values()), events[k].values());
                let ok = in_unit_range(&sum) && set.index_of_values(&sum).is_some();
                if !ok {
                    local.push(
                        Certificate::new(Rule::AxiomTriple)
                            .event_witness("p", &events[i])
                            .event_witness("q", &events[j])
                            .event_witness("r", &events[k])
                            .with("sum", WitnessValue::Values(sum)),
                    );
                    if local.len() >= cap {
                        return local;
                    }
                }
            }
        }
        local
    });
    out.truncate(cap);
    out
}

// ---------------------------------------------------------------------------
// Poset structure

fn require_pair(set: &EventSet, p: &SProbability, q: &SProbability) -> Result<(usize, usize)> {
    if p.states() != set.states() || q.states() != set.states() {
        return Err(Error::StateSetMismatch);
    }
    Ok((set.require(p)?, set.require(q)?))
}

/// Greatest lower bound of `p` and `q` inside `(E, ≤)`, if it exists.
pub fn poset_meet(set: &EventSet, p: &SProbability, q: &SProbability) -> Result<Option<SProbability>> {
    require_pair(set, p, q)?;
    let lower: Vec<&SProbability> = set
        .iter()
        .filter(|x| x.le_unchecked(p) && x.le_unchecked(q))
        .collect();
    Ok(lower
        .iter()
        .find(|m| lower.iter().all(|l| l.le_unchecked(m)))
        .map(|m| (*m).clone()))
}

/// Least upper bound of `p` and `q` inside `(E, ≤)`, if it exists.
pub fn poset_join(set: &EventSet, p: &SProbability, q: &SProbability) -> Result<Option<SProbability>> {
    require_pair(set, p, q)?;
    let upper: Vec<&SProbability> = set
        .iter()
        .filter(|x| p.le_unchecked(x) && q.le_unchecked(x))
        .collect();
    Ok(upper
        .iter()
        .find(|m| upper.iter().all(|u| m.le_unchecked(u)))
        .map(|m| (*m).clone()))
}

pub fn is_lattice(set: &EventSet) -> bool {
    let rel = Relations::build(set.events());
    lattice_check(&rel)
}

fn lattice_check(rel: &Relations) -> bool {
    let n = rel.down.len();
    par::all_range(n, |i| {
        (i..n).all(|j| rel.meet(i, j).is_some() && rel.join(i, j).is_some())
    })
}

pub fn is_concrete(set: &EventSet) -> bool {
    set.iter().all(SProbability::is_two_valued)
}

fn require_algebra(set: &EventSet) -> Result<()> {
    if verify_axioms(set).is_algebra() {
        Ok(())
    } else {
        Err(Error::NotAnAlgebra)
    }
}

fn complement_indices(set: &EventSet) -> Vec<Option<usize>> {
    set.iter().map(|e| set.index_of(&e.complement())).collect()
}

/// Orthomodular law in the form: for all `p ≤ q`, `q − p` lies in `E`, is
/// the meet `q ∧ p'`, and `p + (q − p) = q`.
pub fn is_orthomodular(set: &EventSet) -> Result<bool> {
    require_algebra(set)?;
    let rel = Relations::build(set.events());
    Ok(orthomodular_check(set, &rel))
}

fn orthomodular_check(set: &EventSet, rel: &Relations) -> bool {
    let events = set.events();
    let comp = complement_indices(set);
    par::all_range(events.len(), |i| {
        rel.up[i].ones().all(|j| {
            let diff = raw_difference(events[j].values(), events[i].values());
            let Some(d) = set.index_of_values(&diff) else {
                return false;
            };
            let Some(pc) = comp[i] else { return false };
            rel.meet(j, pc) == Some(d)
                && rel.perp[i].get(d)
                && raw_sum(events[i].values(), events[d].values()) == events[j].values()
        })
    })
}

/// Lattice, distributive on all triples, and the orthocomplement of every
/// element is its only lattice complement.
pub fn is_boolean(set: &EventSet) -> Result<bool> {
    require_algebra(set)?;
    let rel = Relations::build(set.events());
    Ok(boolean_check(set, &rel))
}

fn boolean_check(set: &EventSet, rel: &Relations) -> bool {
    if !lattice_check(rel) {
        return false;
    }
    let tables = LatticeTables::build(rel);
    debug_assert!(tables.is_lattice());
    let n = set.len();
    let distributive = par::all_range(n, |i| {
        (0..n).all(|j| {
            (j..n).all(|k| {
                let lhs = tables.meet(i, tables.join(j, k));
                let rhs = tables.join(tables.meet(i, j), tables.meet(i, k));
                lhs == rhs
            })
        })
    });
    if !distributive {
        return false;
    }
    let (Some(bottom), Some(top)) = (set.zero_index(), set.one_index()) else {
        return false;
    };
    let comp = complement_indices(set);
    par::all_range(n, |i| {
        let mut lattice_complements =
            (0..n).filter(|&j| tables.meet(i, j) == bottom && tables.join(i, j) == top);
        lattice_complements.next() == comp[i] && lattice_complements.next().is_none()
    })
}

/// Minimal elements of `E ∖ {0}`.
pub fn atoms(set: &EventSet) -> Result<Vec<SProbability>> {
    require_algebra(set)?;
    Ok(minimal_nonzero(set))
}

fn minimal_nonzero(set: &EventSet) -> Vec<SProbability> {
    let nonzero: Vec<&SProbability> = set.iter().filter(|e| !e.is_zero()).collect();
    nonzero
        .iter()
        .filter(|a| !nonzero.iter().any(|b| b.lt_unchecked(a)))
        .map(|a| (*a).clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub is_algebra: bool,
    pub is_lattice: bool,
    pub is_orthomodular: bool,
    pub is_boolean: bool,
    pub is_concrete: bool,
    pub atom_list: Vec<SProbability>,
}

/// All structure flags from one pass over the order relation. Orthomodular
/// and Boolean are reported false for sets that are not algebras.
pub fn structure(set: &EventSet) -> StructureReport {
    let is_algebra = verify_axioms(set).is_algebra();
    let rel = Relations::build(set.events());
    let is_lattice = lattice_check(&rel);
    StructureReport {
        is_algebra,
        is_lattice,
        is_orthomodular: is_algebra && orthomodular_check(set, &rel),
        is_boolean: is_algebra && is_lattice && boolean_check(set, &rel),
        is_concrete: is_concrete(set),
        atom_list: minimal_nonzero(set),
    }
}

// ---------------------------------------------------------------------------
// Saturation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_elements: usize,
    pub max_rounds: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_elements: 4096,
            max_rounds: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivationOp {
    /// The constant 0, required by axiom (a).
    Zero,
    /// An input event that is not proper.
    Input,
    Complement,
    Sum,
    /// `operands[0] − operands[1]`.
    Difference,
    TripleSum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DerivationStep {
    pub op: DerivationOp,
    pub operands: Vec<SProbability>,
    #[serde(serialize_with = "serialize_rationals")]
    pub result: Vec<Rational>,
}

impl DerivationStep {
    /// Recomputes the result from the operands; `None` if the operation's
    /// precondition fails.
    pub fn recompute(&self) -> Option<Vec<Rational>> {
        let o = &self.operands;
        match self.op {
            DerivationOp::Zero => Some(vec![Rational::default(); self.result.len()]),
            DerivationOp::Input => (o.len() == 1).then(|| o[0].values().to_vec()),
            DerivationOp::Complement => (o.len() == 1).then(|| o[0].complement().values().to_vec()),
            DerivationOp::Sum => (o.len() == 2 && o[0].perp_unchecked(&o[1]))
                .then(|| raw_sum(o[0].values(), o[1].values())),
            DerivationOp::Difference => (o.len() == 2 && o[1].le_unchecked(&o[0]))
                .then(|| raw_difference(o[0].values(), o[1].values())),
            DerivationOp::TripleSum => (o.len() == 3
                && o[0].perp_unchecked(&o[1])
                && o[1].perp_unchecked(&o[2])
                && o[0].perp_unchecked(&o[2]))
            .then(|| raw_sum(&raw_sum(o[0].values(), o[1].values()), o[2].values())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SaturationOutcome {
    Closed,
    Contradiction,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContradictionWitness {
    #[serde(serialize_with = "serialize_rationals")]
    pub values: Vec<Rational>,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationResult {
    pub outcome: SaturationOutcome,
    pub closure: Option<EventSet>,
    /// Derivation steps in order. On contradiction, only the steps the
    /// contradicting element depends on.
    pub trace: Vec<DerivationStep>,
    pub contradiction: Option<ContradictionWitness>,
    pub rounds: usize,
}

fn explain(values: &[Rational]) -> String {
    if !in_unit_range(values) {
        format!("derived values {} leave [0,1]", format_raw(values))
    } else {
        format!(
            "derived event {} is neither 0, 1 nor varying",
            format_raw(values)
        )
    }
}

/// Closes `E ∪ extra` under complements, sums of orthogonal pairs and
/// triples, and differences of comparable pairs, in breadth-first rounds.
pub fn saturate(set: &EventSet, extra: &[SProbability], budget: Budget) -> Result<SaturationResult> {
    if budget.max_elements == 0 || budget.max_rounds == 0 {
        return Err(Error::InvalidBudget);
    }
    let states = set.states().clone();
    for e in extra {
        if e.states() != &states {
            return Err(Error::StateSetMismatch);
        }
    }
    let mut known: BTreeSet<SProbability> = set.iter().cloned().collect();
    known.extend(extra.iter().cloned());
    let mut trace: Vec<DerivationStep> = Vec::new();

    let contradiction = |trace: &[DerivationStep], step: DerivationStep, rounds| {
        let values = step.result.clone();
        let mut cone = prune_trace(trace, &step);
        cone.push(step);
        SaturationResult {
            outcome: SaturationOutcome::Contradiction,
            closure: None,
            contradiction: Some(ContradictionWitness {
                explanation: explain(&values),
                values,
            }),
            trace: cone,
            rounds,
        }
    };

    if let Some(bad) = known.iter().find(|e| !e.is_proper()) {
        let step = DerivationStep {
            op: DerivationOp::Input,
            operands: vec![bad.clone()],
            result: bad.values().to_vec(),
        };
        return Ok(contradiction(&trace, step, 0));
    }
    let zero = SProbability::zero(&states);
    if known.insert(zero.clone()) {
        trace.push(DerivationStep {
            op: DerivationOp::Zero,
            operands: vec![],
            result: zero.values().to_vec(),
        });
    }

    let mut fresh: BTreeSet<SProbability> = known.clone();
    for round in 1..=budget.max_rounds {
        // Complements are always added first.
        let complements: Vec<DerivationStep> = known
            .iter()
            .filter_map(|p| {
                let c = p.complement();
                (!known.contains(&c)).then(|| DerivationStep {
                    op: DerivationOp::Complement,
                    operands: vec![p.clone()],
                    result: c.values().to_vec(),
                })
            })
            .collect();
        for step in complements {
            let c = SProbability::from_raw_unchecked(states.clone(), step.result.clone());
            if known.insert(c.clone()) {
                fresh.insert(c);
                trace.push(step);
            }
        }
        if known.len() > budget.max_elements {
            return Ok(budget_exceeded(trace, round));
        }

        let current: Vec<SProbability> = known.iter().cloned().collect();
        let is_fresh: Vec<bool> = current.iter().map(|e| fresh.contains(e)).collect();
        let candidates = round_candidates(&current, &is_fresh);
        let lookup = EventSet::from_sorted_unchecked(states.clone(), current.clone());

        let mut added = Vec::new();
        let mut added_set: BTreeSet<Vec<Rational>> = BTreeSet::new();
        for step in candidates {
            if lookup.index_of_values(&step.result).is_some() || added_set.contains(&step.result) {
                continue;
            }
            if !in_unit_range(&step.result) || !is_proper_raw(&step.result) {
                return Ok(contradiction(&trace, step, round));
            }
            added_set.insert(step.result.clone());
            added.push(step);
        }
        if added.is_empty() {
            let closure = EventSet::from_sorted_unchecked(states, known.into_iter().collect());
            return Ok(SaturationResult {
                outcome: SaturationOutcome::Closed,
                closure: Some(closure),
                trace,
                contradiction: None,
                rounds: round,
            });
        }
        fresh.clear();
        for step in added {
            let e = SProbability::from_raw_unchecked(states.clone(), step.result.clone());
            known.insert(e.clone());
            fresh.insert(e);
            trace.push(step);
        }
        if known.len() > budget.max_elements {
            return Ok(budget_exceeded(trace, round));
        }
    }
    Ok(budget_exceeded(trace, budget.max_rounds))
}

fn budget_exceeded(trace: Vec<DerivationStep>, rounds: usize) -> SaturationResult {
    SaturationResult {
        outcome: SaturationOutcome::BudgetExceeded,
        closure: None,
        trace,
        contradiction: None,
        rounds,
    }
}

/// Candidate derivations of one round in canonical order: pair sums, then
/// differences, then triple sums; each involves at least one fresh element.
fn round_candidates(current: &[SProbability], is_fresh: &[bool]) -> Vec<DerivationStep> {
    let n = current.len();
    let rel = Relations::build(current);
    let zero = current.iter().position(SProbability::is_zero);

    let sums = par::flat_map_range(n, |i| {
        rel.perp[i]
            .ones()
            .filter(|&j| j >= i && (is_fresh[i] || is_fresh[j]))
            .map(|j| DerivationStep {
                op: DerivationOp::Sum,
                operands: vec![current[i].clone(), current[j].clone()],
                result: raw_sum(current[i].values(), current[j].values()),
            })
            .collect()
    });
    let differences = par::flat_map_range(n, |i| {
        rel.up[i]
            .ones()
            .filter(|&j| j != i && (is_fresh[i] || is_fresh[j]))
            .map(|j| DerivationStep {
                op: DerivationOp::Difference,
                operands: vec![current[j].clone(), current[i].clone()],
                result: raw_difference(current[j].values(), current[i].values()),
            })
            .collect()
    });
    let triples = par::flat_map_range(n, |i| {
        if Some(i) == zero {
            return Vec::new();
        }
        let mut local = Vec::new();
        for j in rel.perp[i].ones().filter(|&j| j >= i && Some(j) != zero) {
            let common = rel.perp[i].and(&rel.perp[j]);
            for k in common.ones().filter(|&k| k >= j && Some(k) != zero) {
                if !(is_fresh[i] || is_fresh[j] || is_fresh[k]) {
                    continue;
                }
                local.push(DerivationStep {
                    op: DerivationOp::TripleSum,
                    operands: vec![current[i].clone(), current[j].clone(), current[k].clone()],
                    result: raw_sum(
                        &raw_sum(current[i].values(), current[j].values()),
                        current[k].values(),
                    ),
                });
            }
        }
        local
    });
    let mut all = sums;
    all.extend(differences);
    all.extend(triples);
    all
}

/// Steps of `trace` that `last` transitively depends on, in trace order.
fn prune_trace(trace: &[DerivationStep], last: &DerivationStep) -> Vec<DerivationStep> {
    let producer: BTreeMap<&[Rational], usize> = trace
        .iter()
        .enumerate()
        .map(|(i, s)| (s.result.as_slice(), i))
        .collect();
    let mut needed = BTreeSet::new();
    let mut stack: Vec<&[Rational]> = last.operands.iter().map(|o| o.values()).collect();
    while let Some(v) = stack.pop() {
        if let Some(&i) = producer.get(v) {
            if needed.insert(i) {
                stack.extend(trace[i].operands.iter().map(|o| o.values()));
            }
        }
    }
    needed.into_iter().map(|i| trace[i].clone()).collect()
}

/// Checks that each step of a trace is a valid operation on events that are
/// either in `inputs` or produced by an earlier step, and that the final
/// step's result is not a proper S-probability.
pub fn replay_contradiction_trace(inputs: &EventSet, trace: &[DerivationStep]) -> bool {
    let Some(last) = trace.last() else { return false };
    let mut available: BTreeSet<Vec<Rational>> =
        inputs.iter().map(|e| e.values().to_vec()).collect();
    for step in trace {
        if step.op == DerivationOp::Input {
            if !step.operands.iter().all(|o| available.contains(o.values())) {
                return false;
            }
        } else if !step.operands.iter().all(|o| available.contains(o.values())) {
            return false;
        }
        match step.recompute() {
            Some(r) if r == step.result => {}
            _ => return false,
        }
        available.insert(step.result.clone());
    }
    !in_unit_range(&last.result) || !is_proper_raw(&last.result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(n: usize) -> StateSet {
        StateSet::numbered(n).unwrap()
    }

    fn ev(states: &StateSet, lits: &[&str]) -> SProbability {
        SProbability::parse(states, lits).unwrap()
    }

    fn set(states: &StateSet, rows: &[&[&str]]) -> EventSet {
        EventSet::new(states.clone(), rows.iter().map(|r| ev(states, r))).unwrap()
    }

    fn mo2() -> EventSet {
        let s = st(4);
        set(
            &s,
            &[
                &["1", "0", "0", "1"],
                &["0", "1", "0", "1"],
                &["0", "1", "1", "0"],
                &["1", "0", "1", "0"],
            ],
        )
    }

    fn cube(n: usize) -> EventSet {
        subsets(n, |_| true)
    }

    fn example2_algebra() -> EventSet {
        let s = st(4);
        set(
            &s,
            &[
                &["1", "0", "0", "1"],
                &["0", "1", "1", "0"],
                &["1/4", "0", "0", "1"],
                &["3/4", "1", "1", "0"],
                &["1/4", "1", "1", "1"],
                &["3/4", "0", "0", "0"],
            ],
        )
    }

    fn example4_mo2() -> EventSet {
        let s = st(4);
        set(
            &s,
            &[
                &["1", "0", "1/2", "1/2"],
                &["0", "1", "1/2", "1/2"],
                &["1/2", "1/2", "0", "1"],
                &["1/2", "1/2", "1", "0"],
            ],
        )
    }

    #[test]
    fn constants_are_added_and_duplicates_warned() {
        let s = st(2);
        let e = EventSet::new(
            s.clone(),
            vec![ev(&s, &["3/4", "1/4"]), ev(&s, &["3/4", "1/4"])],
        )
        .unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e.warnings().len(), 1);
        assert!(e.zero_index().is_some() && e.one_index().is_some());
    }

    #[test]
    fn verify_examples() {
        let r = verify_axioms(&mo2());
        assert!(r.is_algebra() && r.violations.is_empty() && r.all_proper);
        let s = st(1);
        assert!(verify_axioms(&EventSet::new(s, []).unwrap()).is_algebra());
        let s2 = st(2);
        let bad = set(&s2, &[&["3/4", "1/4"]]);
        let r = verify_axioms(&bad);
        assert!(r.holds_a && !r.holds_b && r.holds_c);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].event("p"), Some(&ev(&s2, &["3/4", "1/4"])));
    }

    #[test]
    fn missing_zero_and_triple_are_reported() {
        let s = st(2);
        let e = EventSet::from_exact(s.clone(), [SProbability::one(&s)]).unwrap();
        let r = verify_axioms(&e);
        assert!(!r.holds_a && !r.holds_b);
        // (1/4,1/4) ⊥ itself; the triple with 0 requires (1/2,1/2), absent.
        let e = set(&s, &[&["1/4", "1/4"], &["3/4", "3/4"]]);
        let r = verify_axioms(&e);
        assert!(!r.holds_c && !r.all_proper);
        assert!(r.violations.iter().any(|c| c.rule == Rule::AxiomTriple));
    }

    #[test]
    fn meet_and_join_examples() {
        let e = example4_mo2();
        let s = e.states().clone();
        let p = ev(&s, &["1", "0", "1/2", "1/2"]);
        let q = ev(&s, &["1/2", "1/2", "0", "1"]);
        assert_eq!(poset_meet(&e, &p, &q).unwrap(), Some(SProbability::zero(&s)));
        assert_eq!(poset_meet(&e, &p, &SProbability::one(&s)).unwrap(), Some(p.clone()));
        assert_eq!(poset_join(&e, &p, &SProbability::zero(&s)).unwrap(), Some(p.clone()));
        let m = mo2();
        let p1 = ev(&s, &["1", "0", "0", "1"]);
        let p2 = ev(&s, &["0", "1", "0", "1"]);
        assert_eq!(poset_join(&m, &p1, &p2).unwrap(), Some(SProbability::one(&s)));

        let c = cube(4);
        let a = ev(&s, &["1", "1", "0", "0"]);
        let b = ev(&s, &["0", "1", "1", "0"]);
        assert_eq!(poset_meet(&c, &a, &b).unwrap(), Some(ev(&s, &["0", "1", "0", "0"])));
        let outside = ev(&s, &["1/2", "1/2", "1/2", "1/2"]);
        assert!(matches!(poset_meet(&c, &a, &outside), Err(Error::ElementNotInSet(_))));
    }

    #[test]
    fn lattice_detection() {
        assert!(is_lattice(&cube(2)));
        assert!(is_lattice(&mo2()));
        // Two incomparable upper bounds for two incomparable atoms.
        let s = st(4);
        let e = set(
            &s,
            &[
                &["1", "0", "0", "0"],
                &["0", "1", "0", "0"],
                &["1", "1", "1", "0"],
                &["1", "1", "0", "1"],
            ],
        );
        assert!(!is_lattice(&e));
    }

    fn subsets(n: usize, keep: impl Fn(u32) -> bool) -> EventSet {
        let s = st(n);
        let events = (0..1u32 << n).filter(|m| keep(*m)).map(|mask| {
            let vals = (0..n)
                .map(|i| Rational::from_integer(((mask >> i) & 1).into()))
                .collect();
            SProbability::new(s.clone(), vals).unwrap()
        });
        EventSet::new(s.clone(), events.collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn two_subsets_of_four_points_form_mo3() {
        let e = subsets(4, |m| m.count_ones() == 2);
        assert_eq!(e.len(), 8);
        assert!(verify_axioms(&e).is_algebra());
        assert!(is_lattice(&e));
        assert!(is_orthomodular(&e).unwrap());
        assert!(!is_boolean(&e).unwrap());
    }

    #[test]
    fn even_subsets_of_six_points_are_an_algebra_but_no_lattice() {
        let e = subsets(6, |m| m.count_ones() % 2 == 0);
        assert_eq!(e.len(), 32);
        assert!(verify_axioms(&e).is_algebra());
        assert!(!is_lattice(&e));
        let s = e.states().clone();
        let a = ev(&s, &["1", "1", "0", "0", "0", "0"]);
        let b = ev(&s, &["1", "0", "1", "0", "0", "0"]);
        assert_eq!(poset_join(&e, &a, &b).unwrap(), None);
        assert_eq!(poset_meet(&e, &a, &b).unwrap(), Some(SProbability::zero(&s)));
        assert!(!is_boolean(&e).unwrap());
    }

    #[test]
    fn orthomodular_and_boolean() {
        assert!(is_orthomodular(&mo2()).unwrap());
        assert!(is_orthomodular(&EventSet::new(st(2), []).unwrap()).unwrap());
        assert!(!is_boolean(&mo2()).unwrap());
        assert!(is_boolean(&cube(4)).unwrap());
        let s = st(4);
        let four = set(&s, &[&["1", "0", "0", "1"], &["0", "1", "1", "0"]]);
        assert!(is_boolean(&four).unwrap());
        assert!(is_boolean(&example2_algebra()).unwrap());
        let bad = set(&st(2), &[&["3/4", "1/4"]]);
        assert_eq!(is_boolean(&bad), Err(Error::NotAnAlgebra));
        assert_eq!(is_orthomodular(&bad), Err(Error::NotAnAlgebra));
    }

    #[test]
    fn concrete_and_atoms() {
        assert!(is_concrete(&mo2()));
        let s = st(3);
        let frac = set(&s, &[&["3/4", "1/4", "1/4"], &["1/4", "3/4", "3/4"]]);
        assert!(!is_concrete(&frac));
        assert!(is_concrete(&EventSet::new(s.clone(), []).unwrap()));

        let atoms4 = atoms(&cube(4)).unwrap();
        assert_eq!(atoms4.len(), 4);
        assert!(atoms4.iter().all(|a| a.values().iter().filter(|v| v.is_integer() && **v == Rational::from_integer(1.into())).count() == 1));
        let s4 = st(4);
        let mut a2 = atoms(&example2_algebra()).unwrap();
        a2.sort();
        let mut expected = vec![
            ev(&s4, &["1/4", "0", "0", "1"]),
            ev(&s4, &["3/4", "0", "0", "0"]),
            ev(&s4, &["0", "1", "1", "0"]),
        ];
        expected.sort();
        assert_eq!(a2, expected);
        assert_eq!(atoms(&EventSet::new(s.clone(), []).unwrap()).unwrap(), vec![SProbability::one(&s)]);
    }

    #[test]
    fn structure_report_flags() {
        let r = structure(&mo2());
        assert!(r.is_algebra && r.is_lattice && r.is_orthomodular && !r.is_boolean && r.is_concrete);
        assert_eq!(r.atom_list.len(), 4);
        let r = structure(&cube(3));
        assert!(r.is_boolean && r.is_lattice);
    }

    #[test]
    fn saturation_example5_contradiction() {
        let s = st(2);
        let e = set(&s, &[&["1/8", "5/8"], &["7/8", "3/8"]]);
        let q = ev(&s, &["3/8", "7/8"]);
        let r = saturate(&e, &[q.clone()], Budget::default()).unwrap();
        assert_eq!(r.outcome, SaturationOutcome::Contradiction);
        let w = r.contradiction.unwrap();
        assert_eq!(w.values, ev(&s, &["3/4", "3/4"]).values());
        let last = r.trace.last().unwrap();
        assert_eq!(last.op, DerivationOp::Sum);
        assert!(last.operands.contains(&ev(&s, &["1/8", "5/8"])));
        assert!(last.operands.contains(&q.complement()));
        let inputs = e.with_event(&q).unwrap();
        assert!(replay_contradiction_trace(&inputs, &r.trace));
    }

    #[test]
    fn saturation_trivial_and_example2() {
        let e = EventSet::new(st(3), []).unwrap();
        let r = saturate(&e, &[], Budget::default()).unwrap();
        assert_eq!(r.outcome, SaturationOutcome::Closed);
        assert_eq!(r.closure.unwrap(), e);

        let s = st(4);
        let base = set(&s, &[&["1", "0", "0", "1"], &["0", "1", "1", "0"]]);
        let q = ev(&s, &["1/4", "0", "0", "1"]);
        let r = saturate(&base, &[q], Budget::default()).unwrap();
        assert_eq!(r.outcome, SaturationOutcome::Closed);
        let closure = r.closure.unwrap();
        assert_eq!(closure, example2_algebra());
        assert!(verify_axioms(&closure).is_algebra());
    }

    #[test]
    fn saturation_is_idempotent_on_closed_sets() {
        for e in [mo2(), cube(3), example2_algebra(), example4_mo2()] {
            let r = saturate(&e, &[], Budget::default()).unwrap();
            assert_eq!(r.outcome, SaturationOutcome::Closed);
            assert_eq!(r.closure.unwrap(), e);
        }
    }

    #[test]
    fn saturation_budget() {
        let s = st(4);
        let base = set(&s, &[&["1", "0", "0", "1"], &["0", "1", "1", "0"]]);
        let q = ev(&s, &["1/4", "0", "0", "1"]);
        let tight = Budget { max_elements: 5, max_rounds: 32 };
        let r = saturate(&base, &[q.clone()], tight).unwrap();
        assert_eq!(r.outcome, SaturationOutcome::BudgetExceeded);
        assert!(r.closure.is_none());
        assert_eq!(
            saturate(&base, &[q], Budget { max_elements: 0, max_rounds: 1 }),
            Err(Error::InvalidBudget)
        );
    }

    #[test]
    fn saturation_rejects_non_proper_input() {
        let s = st(2);
        let e = EventSet::new(s.clone(), []).unwrap();
        let q = ev(&s, &["1/4", "1/2"]);
        let r = saturate(&e, &[q.clone()], Budget::default()).unwrap();
        assert_eq!(r.outcome, SaturationOutcome::Contradiction);
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.trace[0].op, DerivationOp::Input);
        assert!(replay_contradiction_trace(&e.with_event(&q).unwrap(), &r.trace));
    }
}
