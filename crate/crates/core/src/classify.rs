//! The verdict engine: sufficient conditions for an added event to be
//! destructive, critical or not critical, applied in a fixed order, each
//! backed by a replayable certificate.

use serde::Serialize;

use crate::algebra::{
    is_boolean, replay_contradiction_trace, saturate, structure, verify_axioms, Budget, EventSet,
    SaturationOutcome, SaturationResult,
};
use crate::certificate::{Certificate, Rule, WitnessValue};
use crate::construct::{complete_mo2, detect_extension, mo2_generators, split_atom, ExtensionMap};
use crate::error::{Error, Result};
use crate::event::{
    half, in_unit_range, is_proper_raw, raw_sum, Rational, ReciprocityClass, SProbability,
};
use crate::par;
use crate::search::{boolean_embedding_concrete_capped, contradiction_certificate, OracleOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Destructive,
    Critical,
    NotCritical,
    Embeddable,
    Unknown,
}

/// Whether `E ∪ {q}` embeds into some Boolean algebra. Critical means this
/// differs from whether `E` itself is Boolean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    BooleanEmbedding,
    NoBooleanEmbedding,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    pub certificate: Option<Certificate>,
    /// Rules evaluated, in order, up to and including the deciding one.
    pub rules_attempted: Vec<Rule>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn rule(&self) -> Option<Rule> {
        self.certificate.as_ref().map(|c| c.rule)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassifyConfig {
    pub budget: Budget,
    pub oracle_enabled: bool,
    /// Largest state set the two-valued oracle enumerates.
    pub oracle_state_cap: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            budget: Budget::default(),
            oracle_enabled: true,
            oracle_state_cap: crate::search::DEFAULT_STATE_CAP,
        }
    }
}

fn require_algebra(set: &EventSet) -> Result<()> {
    if verify_axioms(set).is_algebra() {
        Ok(())
    } else {
        Err(Error::NotAnAlgebra)
    }
}

fn require_fresh(set: &EventSet, q: &SProbability) -> Result<()> {
    if q.states() != set.states() {
        return Err(Error::StateSetMismatch);
    }
    if set.contains(q) {
        return Err(Error::EventInSet(q.to_string()));
    }
    Ok(())
}

fn first_exceeding(values: &[Rational], bound: &Rational) -> Option<usize> {
    values.iter().position(|v| v > bound)
}

// ---------------------------------------------------------------------------
// Destructive rules

/// `q` is not proper.
pub fn check_non_proper(q: &SProbability) -> Option<Certificate> {
    (!q.is_proper()).then(|| Certificate::new(Rule::NonProper).event_witness("q", q))
}

/// An orthogonal pair `p1 ⊥ p2` in `E`, both orthogonal to `q`, with
/// `p1 + p2 + q > 1` at some state.
pub fn check_triple_overflow(set: &EventSet, q: &SProbability) -> Result<Option<Certificate>> {
    require_algebra(set)?;
    require_fresh(set, q)?;
    Ok(triple_overflow(set, q))
}

fn triple_overflow(set: &EventSet, q: &SProbability) -> Option<Certificate> {
    let one = Rational::from_integer(1.into());
    let partners: Vec<&SProbability> = set
        .iter()
        .filter(|p| !p.is_zero() && p.perp_unchecked(q))
        .collect();
    par::find_map_first(partners.len(), |i| {
        partners[i..].iter().find_map(|p2| {
            let p1 = partners[i];
            if !p1.perp_unchecked(p2) {
                return None;
            }
            let sum = raw_sum(&raw_sum(p1.values(), p2.values()), q.values());
            let s = first_exceeding(&sum, &one)?;
            Some(
                Certificate::new(Rule::TripleOverflow)
                    .event_witness("p1", p1)
                    .event_witness("p2", p2)
                    .event_witness("q", q)
                    .with("state", WitnessValue::State(q.states().label(s).to_string()))
                    .with("sum", WitnessValue::Values(sum)),
            )
        })
    })
}

fn proximity_side(p: &SProbability, q: &SProbability) -> Option<&'static str> {
    if p == q {
        return None;
    }
    let h = half();
    let below = q.le_unchecked(p)
        && p.values().iter().zip(q.values()).all(|(pv, qv)| pv - &h <= *qv);
    let above = p.le_unchecked(q)
        && p.values().iter().zip(q.values()).all(|(pv, qv)| *qv <= pv + &h);
    if below {
        Some("below")
    } else if above {
        Some("above")
    } else {
        None
    }
}

/// Some `p ∈ E` with `p − 1/2 ≤ q < p` or `p < q ≤ p + 1/2`.
pub fn check_proximity(set: &EventSet, q: &SProbability) -> Result<Option<Certificate>> {
    require_algebra(set)?;
    require_fresh(set, q)?;
    Ok(proximity(set, q))
}

fn proximity(set: &EventSet, q: &SProbability) -> Option<Certificate> {
    let events = set.events();
    par::find_map_first(events.len(), |i| {
        let side = proximity_side(&events[i], q)?;
        Some(
            Certificate::new(Rule::Proximity)
                .event_witness("p", &events[i])
                .event_witness("q", q)
                .note(format!("q lies within 1/2 {side} p")),
        )
    })
}

/// Lifted copy `q̄ = (p, c)` of a base element with `c ∉ {0, 1}`: adding
/// `(p,0) + (p',c')` or `(p,c) + (p',0)` yields a non-proper element.
fn th3_destructive(ext: &ExtensionMap, q: &SProbability) -> Option<Certificate> {
    let (base_part, c) = ext.restrict(q).ok()?;
    if c.is_integer() {
        return None;
    }
    let (_, low, _) = ext.event_pairs.iter().find(|(p, _, _)| *p == base_part)?;
    let pc = base_part.complement();
    let (_, pc_low, _) = ext.event_pairs.iter().find(|(p, _, _)| *p == pc)?;
    let (left, right) = if c <= half() {
        (low.clone(), q.complement())
    } else {
        (q.clone(), pc_low.clone())
    };
    let derived = raw_sum(left.values(), right.values());
    Some(
        Certificate::new(Rule::LiftedCopy)
            .event_witness("p", &base_part)
            .with("c", WitnessValue::Scalar(c))
            .with("new_state", WitnessValue::State(ext.new_state().to_string()))
            .event_witness("left", &left)
            .event_witness("right", &right)
            .with("derived", WitnessValue::Values(derived)),
    )
}

/// Two-valued `q̄` added to the extension of a concrete, non-Boolean base.
fn th3_critical(ext: &ExtensionMap, base_is_boolean: bool, q: &SProbability) -> Option<Certificate> {
    let base = ext.base();
    if base_is_boolean || !base.iter().all(SProbability::is_two_valued) || !q.is_two_valued() {
        return None;
    }
    Some(
        Certificate::new(Rule::LiftedConcrete)
            .event_witness("q", q)
            .with("new_state", WitnessValue::State(ext.new_state().to_string()))
            .note("the extension and q are two-valued, so all lie in the Boolean algebra of all two-valued events; q is required to be two-valued"),
    )
}

/// Both branches of the lifted-event theorem on a 0,1-extension.
pub fn check_th3(set: &EventSet, ext: &ExtensionMap, q: &SProbability) -> Result<Option<Certificate>> {
    require_extension(set, ext)?;
    require_fresh(set, q)?;
    if let Some(c) = th3_destructive(ext, q) {
        return Ok(Some(c));
    }
    let base_boolean = is_boolean(&ext.base()).unwrap_or(false);
    Ok(th3_critical(ext, base_boolean, q))
}

fn require_extension(set: &EventSet, ext: &ExtensionMap) -> Result<()> {
    if set.states() != &ext.extended_states {
        return Err(Error::NotExtension("state sets differ".into()));
    }
    let images = ext
        .event_pairs
        .iter()
        .flat_map(|(_, lo, hi)| [lo, hi])
        .all(|e| set.contains(e));
    if !images || set.len() != 2 * ext.event_pairs.len() {
        return Err(Error::NotExtension(
            "the set is not the family of both lifts of the base".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Boolean base

fn th2(ext: &ExtensionMap, q: &SProbability) -> Option<Certificate> {
    let (base_q, c) = ext.restrict(q).ok()?;
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    if c <= zero || c >= one {
        return None;
    }
    let middle: Vec<&SProbability> = ext
        .event_pairs
        .iter()
        .map(|(p, _, _)| p)
        .filter(|p| !p.is_constant_bound())
        .collect();
    if middle
        .iter()
        .any(|p| p.le_unchecked(&base_q) || base_q.le_unchecked(p))
    {
        return None;
    }
    let p = middle.iter().find(|p| {
        let r = p.reciprocity_unchecked(&base_q);
        r != ReciprocityClass::Neither
    })?;
    let class = p.reciprocity_unchecked(&base_q);
    Some(
        Certificate::new(Rule::LiftedIncomparable)
            .event_witness("p", p)
            .event_witness("q", q)
            .with("c", WitnessValue::Scalar(c))
            .with("new_state", WitnessValue::State(ext.new_state().to_string()))
            .note(format!(
                "p and the base part of q are partially reciprocal {}",
                if class.is_below() { "below 1/2" } else { "above 1/2" }
            )),
    )
}

/// Incomparable lifted event on a Boolean 0,1-extension, partially
/// reciprocal with a non-constant base element.
pub fn check_th2(set: &EventSet, ext: &ExtensionMap, q: &SProbability) -> Result<Option<Certificate>> {
    require_extension(set, ext)?;
    if !is_boolean(set)? {
        return Err(Error::NotBoolean);
    }
    require_fresh(set, q)?;
    let (_, c) = ext.restrict(q)?;
    if c.is_integer() {
        return Err(Error::NotExtension(
            "value at the new state must lie strictly between 0 and 1".into(),
        ));
    }
    Ok(th2(ext, q).map(|cert| th2_note(set, q, cert)))
}

fn th2_note(set: &EventSet, q: &SProbability, cert: Certificate) -> Certificate {
    let with_q = set
        .with_event(q)
        .and_then(|s| s.with_event(&q.complement()));
    let holds = with_q.map(|s| verify_axioms(&s).is_algebra()).unwrap_or(false);
    cert.note(if holds {
        "the extension together with q and q' verifies as an algebra"
    } else {
        "anomaly: the extension together with q and q' fails the algebra axioms"
    })
}

/// Reciprocity of `q` with an element of a Boolean `E`.
pub fn check_th4(set: &EventSet, q: &SProbability) -> Result<Option<Certificate>> {
    if !is_boolean(set)? {
        return Err(Error::NotBoolean);
    }
    require_fresh(set, q)?;
    if !q.is_varying() {
        return Err(Error::NotVarying(q.to_string()));
    }
    Ok(th4(set, q))
}

fn th4_rule(p: &SProbability, q: &SProbability) -> Option<(Rule, Option<usize>)> {
    let one = Rational::from_integer(1.into());
    let sum = raw_sum(p.values(), q.values());
    match p.reciprocity_unchecked(q) {
        ReciprocityClass::Both => Some((Rule::Reciprocal, None)),
        ReciprocityClass::Below => {
            first_exceeding(&sum, &one).map(|s| (Rule::ReciprocalBelowOverflow, Some(s)))
        }
        ReciprocityClass::Above => sum
            .iter()
            .position(|v| *v < one)
            .map(|s| (Rule::ReciprocalAboveDeficit, Some(s))),
        ReciprocityClass::Neither => None,
    }
}

fn th4(set: &EventSet, q: &SProbability) -> Option<Certificate> {
    // Full reciprocity first, then the two partial cases.
    let rank = |r: Rule| match r {
        Rule::Reciprocal => 0,
        Rule::ReciprocalBelowOverflow => 1,
        _ => 2,
    };
    let hits: Vec<(usize, &SProbability, Rule, Option<usize>)> = set
        .iter()
        .filter_map(|p| th4_rule(p, q).map(|(r, s)| (rank(r), p, r, s)))
        .collect();
    let (_, p, rule, state) = hits.into_iter().min_by_key(|h| h.0)?;
    let mut cert = Certificate::new(rule)
        .event_witness("p", p)
        .event_witness("q", q);
    if let Some(s) = state {
        cert = cert.with("state", WitnessValue::State(q.states().label(s).to_string()));
    }
    Some(cert)
}

/// An atom `p1` with `q < p1` and `p1 − q` proper: the refined atom list
/// generates a Boolean algebra containing `E ∪ {q}`.
fn split_construction(set: &EventSet, q: &SProbability) -> Option<Certificate> {
    let atoms = crate::algebra::atoms(set).ok()?;
    atoms.iter().find_map(|p1| {
        let algebra = split_atom(set, p1, q).ok()?;
        Some(
            Certificate::new(Rule::Construction)
                .event_witness("atom", p1)
                .event_witness("q", q)
                .with("algebra", WitnessValue::Algebra(algebra))
                .note("atom split into q and atom - q"),
        )
    })
}

// ---------------------------------------------------------------------------
// Non-Boolean base

fn pairwise_distinct_reciprocal(items: &[&SProbability]) -> bool {
    (0..items.len()).all(|i| {
        (i + 1..items.len()).all(|j| {
            items[i] != items[j]
                && items[i].reciprocity_unchecked(items[j]) == ReciprocityClass::Both
        })
    })
}

fn pairwise_distinct_below(items: &[&SProbability]) -> bool {
    items.iter().all(|p| !p.is_constant_bound())
        && (0..items.len()).all(|i| {
            (i + 1..items.len()).all(|j| {
                items[i] != items[j] && items[i].reciprocity_unchecked(items[j]).is_below()
            })
        })
}

/// Obstructions to a Boolean embedding of `E ∪ {q}` for non-Boolean `E`.
pub fn check_th5(set: &EventSet, q: &SProbability) -> Result<Option<Certificate>> {
    require_algebra(set)?;
    if is_boolean(set)? {
        return Err(Error::BooleanInput);
    }
    require_fresh(set, q)?;
    Ok(th5(set, q))
}

fn th5(set: &EventSet, q: &SProbability) -> Option<Certificate> {
    let middle: Vec<&SProbability> = set.iter().filter(|e| !e.is_constant_bound()).collect();
    let qc = q.complement();

    // (i) p, q, p', q'
    for p in &middle {
        let pc = p.complement();
        if pairwise_distinct_reciprocal(&[p, q, &pc, &qc]) {
            return Some(
                Certificate::new(Rule::ReciprocalWithCandidate)
                    .event_witness("p", p)
                    .event_witness("q", q),
            );
        }
    }
    // (ii) p1, p2, p1', p2'
    let pair = par::find_map_first(middle.len(), |i| {
        let p1 = middle[i];
        let p1c = p1.complement();
        middle[i + 1..].iter().find_map(|p2| {
            let p2c = p2.complement();
            pairwise_distinct_reciprocal(&[p1, p2, &p1c, &p2c]).then(|| (p1.clone(), (*p2).clone()))
        })
    });
    if let Some((p1, p2)) = pair {
        return Some(
            Certificate::new(Rule::ReciprocalPairs)
                .event_witness("p1", &p1)
                .event_witness("p2", &p2),
        );
    }
    // (iii) p1 + p2 = p3 + p4, all in E
    if let Some([a, b, c, d]) = split_sums(&middle, None) {
        return Some(
            Certificate::new(Rule::BelowSplitSums)
                .event_witness("p1", &a)
                .event_witness("p2", &b)
                .event_witness("p3", &c)
                .event_witness("p4", &d),
        );
    }
    // (iv) with p4 = q
    if let Some([a, b, c, _]) = split_sums(&middle, Some(q)) {
        return Some(
            Certificate::new(Rule::BelowSplitSumsWithCandidate)
                .event_witness("p1", &a)
                .event_witness("p2", &b)
                .event_witness("p3", &c)
                .event_witness("q", q),
        );
    }
    None
}

/// Four pairwise distinct, pairwise below-reciprocal elements with
/// `p1 ⊥ p2`, `p3 ⊥ p4` and `p1 + p2 = p3 + p4`. With `fourth`, `p4` is
/// fixed to it and `p1, p2, p3` range over `middle`.
fn split_sums(middle: &[&SProbability], fourth: Option<&SProbability>) -> Option<[SProbability; 4]> {
    let n = middle.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            middle[i].perp_unchecked(middle[j])
                && middle[i].reciprocity_unchecked(middle[j]).is_below()
        })
        .collect();
    let sums: Vec<Vec<Rational>> = pairs
        .iter()
        .map(|&(i, j)| raw_sum(middle[i].values(), middle[j].values()))
        .collect();
    match fourth {
        None => par::find_map_first(pairs.len(), |x| {
            (x + 1..pairs.len()).find_map(|y| {
                if sums[x] != sums[y] {
                    return None;
                }
                let (a, b) = pairs[x];
                let (c, d) = pairs[y];
                let four = [middle[a], middle[b], middle[c], middle[d]];
                pairwise_distinct_below(&four).then(|| four.map(|e| e.clone()))
            })
        }),
        Some(q) => par::find_map_first(pairs.len(), |x| {
            let (a, b) = pairs[x];
            middle.iter().find_map(|c| {
                if !c.perp_unchecked(q) || raw_sum(c.values(), q.values()) != sums[x] {
                    return None;
                }
                let four = [middle[a], middle[b], *c, q];
                pairwise_distinct_below(&four).then(|| four.map(|e| e.clone()))
            })
        }),
    }
}

/// Boolean completion of an MO2 together with `q`.
pub fn check_th7(set: &EventSet, q: &SProbability) -> Result<Option<Certificate>> {
    mo2_generators(set)?;
    require_fresh(set, q)?;
    if !q.is_varying() {
        return Err(Error::NotVarying(q.to_string()));
    }
    Ok(th7(set, q))
}

fn th7(set: &EventSet, q: &SProbability) -> Option<Certificate> {
    let c = complete_mo2(set, q).ok()?;
    let mut cert = Certificate::new(Rule::Mo2Completion)
        .event_witness("p1", &c.p1)
        .event_witness("p2", &c.p2)
        .event_witness("q", q);
    for (name, atom) in ["atom_q", "atom_p1_minus_q", "atom_p2_minus_q", "atom_rest"]
        .iter()
        .zip(&c.atoms)
    {
        cert = cert.event_witness(name, atom);
    }
    Some(cert.with("algebra", WitnessValue::Algebra(c.algebra)))
}

// ---------------------------------------------------------------------------
// Orchestration

fn oracle_certificate(
    set: &EventSet,
    q: &SProbability,
    cfg: &ClassifyConfig,
) -> Option<Certificate> {
    if !cfg.oracle_enabled {
        return None;
    }
    let mut events: Vec<SProbability> = set.iter().cloned().collect();
    events.push(q.clone());
    let r = boolean_embedding_concrete_capped(&events, cfg.oracle_state_cap);
    if r.outcome != OracleOutcome::EmbeddingFound {
        return None;
    }
    Some(
        Certificate::new(Rule::Oracle)
            .event_witness("q", q)
            .with("algebra", WitnessValue::Algebra(r.witness?))
            .note(format!("searched {} Boolean subalgebras of the two-valued cube", r.searched)),
    )
}

fn closure_certificate(result: &SaturationResult) -> Option<(Certificate, bool)> {
    if result.outcome != SaturationOutcome::Closed {
        return None;
    }
    let closure = result.closure.clone()?;
    let boolean = is_boolean(&closure).unwrap_or(false);
    let cert = Certificate::new(Rule::Saturation)
        .with("algebra", WitnessValue::Algebra(closure))
        .note(if boolean {
            "forced closure is a Boolean algebra"
        } else {
            "forced closure is an algebra that is not Boolean"
        });
    Some((cert, boolean))
}

struct Run {
    attempted: Vec<Rule>,
    notes: Vec<String>,
}

impl Run {
    fn try_rule(&mut self, rule: Rule, cert: impl FnOnce() -> Option<Certificate>) -> Option<Certificate> {
        self.attempted.push(rule);
        cert()
    }

    fn verdict(self, kind: VerdictKind, direction: Option<Direction>, cert: Certificate) -> Verdict {
        Verdict {
            kind,
            direction,
            certificate: Some(cert),
            rules_attempted: self.attempted,
            notes: self.notes,
        }
    }
}

/// Classifies the addition of `q` to the algebra `E`. Rule order:
/// destructive checks (non-proper, triple overflow, proximity, lifted copy,
/// saturation contradiction); then for Boolean `E` reciprocity, lifted
/// incomparable, atom splitting, two-valued oracle, Boolean closure; for
/// non-Boolean `E` reciprocal obstructions, lifted concrete, MO2 completion,
/// two-valued oracle, Boolean closure. A closure that is an algebra but not
/// Boolean gives `Embeddable`; otherwise `Unknown`.
pub fn classify(set: &EventSet, q: &SProbability, cfg: &ClassifyConfig) -> Result<Verdict> {
    let report = structure(set);
    if !report.is_algebra {
        return Err(Error::NotAnAlgebra);
    }
    require_fresh(set, q)?;
    if !q.is_varying() {
        return Err(Error::NotVarying(q.to_string()));
    }
    let ext = detect_extension(set);
    let saturation = saturate(set, std::slice::from_ref(q), cfg.budget)?;
    let mut run = Run {
        attempted: Vec::new(),
        notes: Vec::new(),
    };

    let destructive = run
        .try_rule(Rule::NonProper, || check_non_proper(q))
        .or_else(|| run.try_rule(Rule::TripleOverflow, || triple_overflow(set, q)))
        .or_else(|| run.try_rule(Rule::Proximity, || proximity(set, q)))
        .or_else(|| {
            let ext = ext.as_ref()?;
            run.try_rule(Rule::LiftedCopy, || th3_destructive(ext, q))
        })
        .or_else(|| run.try_rule(Rule::Saturation, || contradiction_certificate(&saturation)));
    if let Some(cert) = destructive {
        if saturation.outcome == SaturationOutcome::Closed {
            return Err(Error::Inconsistent(format!(
                "{} reports a destructive event whose forced closure is an algebra",
                cert.rule
            )));
        }
        return Ok(run.verdict(VerdictKind::Destructive, None, cert));
    }

    let closure = closure_certificate(&saturation);
    if saturation.outcome == SaturationOutcome::BudgetExceeded {
        run.notes.push(format!(
            "saturation exceeded its budget ({} elements, {} rounds)",
            cfg.budget.max_elements, cfg.budget.max_rounds
        ));
    }

    use Direction::*;
    use VerdictKind::*;
    if report.is_boolean {
        if let Some(c) = run.try_rule(Rule::Reciprocal, || th4(set, q)) {
            return Ok(run.verdict(Critical, Some(NoBooleanEmbedding), c));
        }
        if let Some(ext) = &ext {
            if let Some(c) = run.try_rule(Rule::LiftedIncomparable, || th2(ext, q)) {
                let c = th2_note(set, q, c);
                return Ok(run.verdict(Critical, Some(NoBooleanEmbedding), c));
            }
        }
        if let Some(c) = run.try_rule(Rule::Construction, || split_construction(set, q)) {
            return Ok(run.verdict(NotCritical, Some(BooleanEmbedding), c));
        }
        if let Some(c) = run.try_rule(Rule::Oracle, || oracle_certificate(set, q, cfg)) {
            return Ok(run.verdict(NotCritical, Some(BooleanEmbedding), c));
        }
        run.attempted.push(Rule::Saturation);
        if let Some((c, boolean)) = closure {
            return Ok(if boolean {
                run.verdict(NotCritical, Some(BooleanEmbedding), c)
            } else {
                run.verdict(Embeddable, None, c)
            });
        }
    } else {
        if let Some(c) = run.try_rule(Rule::ReciprocalWithCandidate, || th5(set, q)) {
            return Ok(run.verdict(NotCritical, Some(NoBooleanEmbedding), c));
        }
        if let Some(ext) = &ext {
            let base_boolean = is_boolean(&ext.base()).unwrap_or(false);
            if let Some(c) = run.try_rule(Rule::LiftedConcrete, || th3_critical(ext, base_boolean, q)) {
                return Ok(run.verdict(Critical, Some(BooleanEmbedding), c));
            }
        }
        if mo2_generators(set).is_ok() {
            if let Some(c) = run.try_rule(Rule::Mo2Completion, || th7(set, q)) {
                return Ok(run.verdict(Critical, Some(BooleanEmbedding), c));
            }
        }
        if let Some(c) = run.try_rule(Rule::Oracle, || oracle_certificate(set, q, cfg)) {
            return Ok(run.verdict(Critical, Some(BooleanEmbedding), c));
        }
        run.attempted.push(Rule::Saturation);
        if let Some((c, boolean)) = closure {
            return Ok(if boolean {
                run.verdict(Critical, Some(BooleanEmbedding), c)
            } else {
                run.verdict(Embeddable, None, c)
            });
        }
    }
    Ok(Verdict {
        kind: Unknown,
        direction: None,
        certificate: None,
        rules_attempted: run.attempted,
        notes: run.notes,
    })
}

// ---------------------------------------------------------------------------
// Replay

fn in_set_or(set: &EventSet, extra: &[&SProbability], p: &SProbability) -> bool {
    set.contains(p) || extra.iter().any(|e| *e == p)
}

fn algebra_contains_all(algebra: &EventSet, set: &EventSet, q: Option<&SProbability>) -> bool {
    set.is_subset_of(algebra) && q.is_none_or(|q| algebra.contains(q))
}

/// Re-checks a certificate's hypotheses on its witnesses, against the event
/// set `E` and (for classification rules) the candidate `q`.
pub fn replay(cert: &Certificate, set: &EventSet, q: Option<&SProbability>) -> bool {
    replay_inner(cert, set, q).unwrap_or(false)
}

fn replay_inner(cert: &Certificate, set: &EventSet, q: Option<&SProbability>) -> Option<bool> {
    let one = Rational::from_integer(1.into());
    let fresh = |q: &SProbability| q.states() == set.states() && !set.contains(q);
    Some(match cert.rule {
        Rule::AxiomZero => set.zero_index().is_none(),
        Rule::AxiomComplement => {
            let p = cert.event("p")?;
            set.contains(p) && !set.contains(&p.complement())
        }
        Rule::AxiomTriple => {
            let (p, r, s) = (cert.event("p")?, cert.event("q")?, cert.event("r")?);
            let sum = raw_sum(&raw_sum(p.values(), r.values()), s.values());
            [p, r, s].iter().all(|e| set.contains(e))
                && p.perp_unchecked(r)
                && p.perp_unchecked(s)
                && r.perp_unchecked(s)
                && cert.values("sum")? == sum.as_slice()
                && (!in_unit_range(&sum) || set.index_of_values(&sum).is_none())
        }
        Rule::NonProper => !q?.is_proper() && cert.event("q")? == q?,
        Rule::TripleOverflow => {
            let q = q?;
            let (p1, p2) = (cert.event("p1")?, cert.event("p2")?);
            let sum = raw_sum(&raw_sum(p1.values(), p2.values()), q.values());
            fresh(q)
                && set.contains(p1)
                && set.contains(p2)
                && p1.perp_unchecked(p2)
                && p1.perp_unchecked(q)
                && p2.perp_unchecked(q)
                && first_exceeding(&sum, &one).is_some()
        }
        Rule::Proximity => {
            let q = q?;
            let p = cert.event("p")?;
            fresh(q) && set.contains(p) && proximity_side(p, q).is_some()
        }
        Rule::LiftedCopy => {
            let q = q?;
            let (left, right) = (cert.event("left")?, cert.event("right")?);
            let qc = q.complement();
            let derived = raw_sum(left.values(), right.values());
            fresh(q)
                && in_set_or(set, &[q, &qc], left)
                && in_set_or(set, &[q, &qc], right)
                && left.perp_unchecked(right)
                && cert.values("derived")? == derived.as_slice()
                && !is_proper_raw(&derived)
        }
        Rule::LiftedConcrete => {
            let q = q?;
            let ext = detect_extension(set)?;
            let base = ext.base();
            fresh(q)
                && q.is_two_valued()
                && base.iter().all(SProbability::is_two_valued)
                && !is_boolean(&base).ok()?
                && !is_boolean(set).ok()?
        }
        Rule::LiftedIncomparable => {
            let q = q?;
            let ext = detect_extension(set)?;
            let (base_q, c) = ext.restrict(q).ok()?;
            let p = cert.event("p")?;
            let base = ext.base();
            fresh(q)
                && is_boolean(set).ok()?
                && c > Rational::from_integer(0.into())
                && c < one
                && base.contains(p)
                && !p.is_constant_bound()
                && base
                    .iter()
                    .filter(|e| !e.is_constant_bound())
                    .all(|e| !e.le_unchecked(&base_q) && !base_q.le_unchecked(e))
                && p.reciprocity_unchecked(&base_q) != ReciprocityClass::Neither
        }
        Rule::ReciprocalBelowOverflow | Rule::ReciprocalAboveDeficit | Rule::Reciprocal => {
            let q = q?;
            let p = cert.event("p")?;
            let holds = match p.reciprocity_unchecked(q) {
                ReciprocityClass::Both => true,
                ReciprocityClass::Below => cert.rule == Rule::ReciprocalBelowOverflow
                    && first_exceeding(&raw_sum(p.values(), q.values()), &one).is_some(),
                ReciprocityClass::Above => cert.rule == Rule::ReciprocalAboveDeficit
                    && raw_sum(p.values(), q.values()).iter().any(|v| *v < one),
                ReciprocityClass::Neither => false,
            };
            let class_matches = cert.rule != Rule::Reciprocal
                || p.reciprocity_unchecked(q) == ReciprocityClass::Both;
            fresh(q) && q.is_varying() && is_boolean(set).ok()? && set.contains(p) && holds && class_matches
        }
        Rule::ReciprocalWithCandidate => {
            let q = q?;
            let p = cert.event("p")?;
            fresh(q)
                && !is_boolean(set).ok()?
                && set.contains(p)
                && pairwise_distinct_reciprocal(&[p, q, &p.complement(), &q.complement()])
        }
        Rule::ReciprocalPairs => {
            let (p1, p2) = (cert.event("p1")?, cert.event("p2")?);
            !is_boolean(set).ok()?
                && set.contains(p1)
                && set.contains(p2)
                && pairwise_distinct_reciprocal(&[p1, p2, &p1.complement(), &p2.complement()])
        }
        Rule::BelowSplitSums | Rule::BelowSplitSumsWithCandidate => {
            let (p1, p2, p3) = (cert.event("p1")?, cert.event("p2")?, cert.event("p3")?);
            let p4 = if cert.rule == Rule::BelowSplitSums {
                let p4 = cert.event("p4")?;
                if !set.contains(p4) {
                    return Some(false);
                }
                p4
            } else {
                let q = q?;
                if cert.event("q")? != q || !fresh(q) {
                    return Some(false);
                }
                q
            };
            !is_boolean(set).ok()?
                && [p1, p2, p3].iter().all(|e| set.contains(e))
                && pairwise_distinct_below(&[p1, p2, p3, p4])
                && p1.perp_unchecked(p2)
                && p3.perp_unchecked(p4)
                && raw_sum(p1.values(), p2.values()) == raw_sum(p3.values(), p4.values())
        }
        Rule::Mo2Completion | Rule::Oracle | Rule::Construction => {
            let algebra = cert.algebra("algebra")?;
            verify_axioms(algebra).is_algebra()
                && is_boolean(algebra).ok()?
                && algebra_contains_all(algebra, set, q)
        }
        Rule::Saturation => {
            if let Some(trace) = cert.trace("trace") {
                let inputs = match q {
                    Some(q) => set.with_event(q).ok()?,
                    None => set.clone(),
                };
                replay_contradiction_trace(&inputs, trace)
                    && cert.values("derived")? == trace.last()?.result.as_slice()
            } else {
                let algebra = cert.algebra("algebra")?;
                verify_axioms(algebra).is_algebra() && algebra_contains_all(algebra, set, q)
            }
        }
    })
}
