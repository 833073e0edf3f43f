//! Exhaustive and bounded search: Boolean subalgebras of the two-valued
//! cube, concrete embedding search, refutation by saturation, and a seeded
//! scan for MO2 interpolation configurations over small state sets.

use serde::Serialize;

use crate::algebra::{
    is_boolean, saturate, verify_axioms, Budget, EventSet, SaturationOutcome,
};
use crate::certificate::{Certificate, Rule, WitnessValue};
use crate::construct::{boolean_from_atoms, mo_n};
use crate::error::{Error, Result};
use crate::event::{half, rational, Rational, SProbability, StateSet};
use crate::lcg::Lcg;
use crate::par;

/// Default cap on `|S|` for cube enumeration.
pub const DEFAULT_STATE_CAP: usize = 6;
/// Default denominator bound for random rationals.
pub const DEFAULT_DENOMINATOR_BOUND: u64 = 64;

/// Set partitions of `0..n` as restricted growth strings, in lexicographic
/// order: `block[i]` is the block of element `i`.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    current: Option<Vec<usize>>,
}

impl SetPartitions {
    pub fn new(n: usize) -> Self {
        SetPartitions {
            current: (n > 0).then(|| vec![0; n]),
        }
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let a = self.current.as_mut().expect("checked above");
        let n = a.len();
        let prefix_max: Vec<usize> = a
            .iter()
            .scan(0, |m, &x| {
                let before = *m;
                *m = (*m).max(x);
                Some(before)
            })
            .collect();
        match (1..n).rev().find(|&i| a[i] <= prefix_max[i]) {
            Some(i) => {
                a[i] += 1;
                a[i + 1..].iter_mut().for_each(|x| *x = 0);
            }
            None => self.current = None,
        }
        Some(out)
    }
}

/// The Boolean subalgebra of the two-valued cube whose atoms are the
/// indicators of the blocks of `blocks`.
pub fn subalgebra_of_partition(states: &StateSet, blocks: &[usize]) -> EventSet {
    let k = blocks.iter().max().map_or(0, |m| m + 1);
    let atoms: Vec<SProbability> = (0..k)
        .map(|b| {
            let values = blocks
                .iter()
                .map(|&x| Rational::from_integer((x == b).into()))
                .collect();
            SProbability::new(states.clone(), values).expect("two-valued")
        })
        .collect();
    boolean_from_atoms(&atoms).expect("indicator atoms of a partition")
}

fn check_cap(states: &StateSet, cap: usize) -> Result<()> {
    if states.len() > cap {
        Err(Error::StateSetTooLarge {
            size: states.len(),
            cap,
        })
    } else {
        Ok(())
    }
}

/// One Boolean subalgebra of the two-valued cube per set partition of `S`.
pub fn enumerate_boolean_subalgebras(
    states: &StateSet,
) -> Result<impl Iterator<Item = EventSet> + '_> {
    enumerate_boolean_subalgebras_capped(states, DEFAULT_STATE_CAP)
}

pub fn enumerate_boolean_subalgebras_capped(
    states: &StateSet,
    cap: usize,
) -> Result<impl Iterator<Item = EventSet> + '_> {
    check_cap(states, cap)?;
    Ok(SetPartitions::new(states.len()).map(move |p| subalgebra_of_partition(states, &p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleOutcome {
    EmbeddingFound,
    NoEmbedding,
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub outcome: OracleOutcome,
    pub witness: Option<EventSet>,
    pub searched: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl OracleResult {
    fn out_of_scope(note: String) -> Self {
        OracleResult {
            outcome: OracleOutcome::OutOfScope,
            witness: None,
            searched: 0,
            notes: vec![note],
        }
    }
}

/// Smallest Boolean subalgebra of the two-valued cube (by size, then
/// canonical order) containing every queried event.
pub fn boolean_embedding_concrete(events: &[SProbability]) -> OracleResult {
    boolean_embedding_concrete_capped(events, DEFAULT_STATE_CAP)
}

pub fn boolean_embedding_concrete_capped(events: &[SProbability], cap: usize) -> OracleResult {
    let Some(first) = events.first() else {
        return OracleResult::out_of_scope("no events queried".into());
    };
    let states = first.states();
    if events.iter().any(|e| e.states() != states) {
        return OracleResult::out_of_scope("events use different state sets".into());
    }
    if let Some(e) = events.iter().find(|e| !e.is_two_valued()) {
        return OracleResult::out_of_scope(format!("{e} is not two-valued"));
    }
    if states.len() > cap {
        return OracleResult::out_of_scope(format!(
            "{} states exceed the enumeration cap of {cap}",
            states.len()
        ));
    }
    let partitions: Vec<Vec<usize>> = SetPartitions::new(states.len()).collect();
    let searched = partitions.len();
    let found = par::map_slice(&partitions, |p| {
        let sub = subalgebra_of_partition(states, p);
        events.iter().all(|e| sub.contains(e)).then_some(sub)
    });
    let witness = found
        .into_iter()
        .flatten()
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.events().cmp(b.events())));
    let scope_note = "only set-representable Boolean algebras were searched".to_string();
    match witness {
        Some(w) => OracleResult {
            outcome: OracleOutcome::EmbeddingFound,
            witness: Some(w),
            searched,
            notes: vec![],
        },
        None => OracleResult {
            outcome: OracleOutcome::NoEmbedding,
            witness: None,
            searched,
            notes: vec![scope_note],
        },
    }
}

/// SATURATION certificate when the forced closure of `E ∪ {q}` contains an
/// element that is out of range or not proper.
pub fn refute_by_saturation(
    set: &EventSet,
    q: &SProbability,
    budget: Budget,
) -> Result<Option<Certificate>> {
    if !verify_axioms(set).is_algebra() {
        return Err(Error::NotAnAlgebra);
    }
    let result = saturate(set, std::slice::from_ref(q), budget)?;
    Ok(contradiction_certificate(&result))
}

pub(crate) fn contradiction_certificate(
    result: &crate::algebra::SaturationResult,
) -> Option<Certificate> {
    if result.outcome != SaturationOutcome::Contradiction {
        return None;
    }
    let w = result.contradiction.as_ref()?;
    Some(
        Certificate::new(Rule::Saturation)
            .with("derived", WitnessValue::Values(w.values.clone()))
            .with("trace", WitnessValue::Trace(result.trace.clone()))
            .note(w.explanation.clone()),
    )
}

// ---------------------------------------------------------------------------
// MO2 interpolation configurations

/// `0 < q < g < v < 1` and `0 < q < h < v < 1` with `g, h` incomparable
/// elements of an MO2 sub-algebra and `q` outside it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interpolation {
    pub mo2: EventSet,
    pub g: SProbability,
    pub h: SProbability,
    pub q: SProbability,
    pub v: SProbability,
    /// The Boolean algebra holding the configuration.
    pub host: EventSet,
}

/// All MO2 sub-algebras `{0, a, a', b, b', 1}` of `host`.
fn mo2_subalgebras(host: &EventSet) -> Vec<[SProbability; 4]> {
    let middle: Vec<&SProbability> = host.iter().filter(|e| !e.is_constant_bound()).collect();
    let incomparable =
        |x: &SProbability, y: &SProbability| !x.le_unchecked(y) && !y.le_unchecked(x);
    let mut out = Vec::new();
    for (i, a) in middle.iter().enumerate() {
        let ac = a.complement();
        if ac <= **a || !incomparable(a, &ac) {
            continue;
        }
        for b in &middle[i + 1..] {
            let bc = b.complement();
            if bc <= **b || **b == ac {
                continue;
            }
            let four = [(*a).clone(), ac.clone(), (*b).clone(), bc];
            let ok = (0..4).all(|x| (x + 1..4).all(|y| incomparable(&four[x], &four[y])));
            if ok && mo_n(&[(four[0].clone(), four[1].clone()), (four[2].clone(), four[3].clone())]).is_ok() {
                out.push(four);
            }
        }
    }
    out
}

/// Every interpolation configuration inside the Boolean algebra `host`.
pub fn interpolations_in(host: &EventSet) -> Vec<Interpolation> {
    let mut out = Vec::new();
    for four in mo2_subalgebras(host) {
        let mo2 = EventSet::new(host.states().clone(), four.iter().cloned()).expect("same states");
        // Incomparable, non-complementary pairs.
        for (gi, hi) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            let (g, h) = (&four[gi], &four[hi]);
            for q in host.iter() {
                if q.is_zero() || mo2.contains(q) || !q.lt_unchecked(g) || !q.lt_unchecked(h) {
                    continue;
                }
                for v in host.iter() {
                    if v.is_one() || !g.lt_unchecked(v) || !h.lt_unchecked(v) {
                        continue;
                    }
                    out.push(Interpolation {
                        mo2: mo2.clone(),
                        g: g.clone(),
                        h: h.clone(),
                        q: q.clone(),
                        v: v.clone(),
                        host: host.clone(),
                    });
                }
            }
        }
    }
    out
}

/// Exhaustive search over all Boolean subalgebras of the two-valued cube.
pub fn two_valued_interpolations(states: &StateSet) -> Result<Vec<Interpolation>> {
    let hosts: Vec<EventSet> = enumerate_boolean_subalgebras(states)?.collect();
    Ok(par::map_slice(&hosts, interpolations_in)
        .into_iter()
        .flatten()
        .collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct HostRouteStats {
    /// Random Boolean algebras generated.
    pub algebras: usize,
    /// MO2 sub-algebras found inside them.
    pub mo2_subalgebras: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CandidateRouteStats {
    /// Random MO2 algebras generated.
    pub mo2_instances: usize,
    /// Draws where no varying `q` or proper `v` fit between the bounds.
    pub rejected: usize,
    /// `(q, v)` pairs whose forced closure was computed.
    pub tested: usize,
    pub contradictions: usize,
    pub closed_not_boolean: usize,
    pub budget_exceeded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub size: usize,
    pub trials: usize,
    pub denominator_bound: u64,
    pub seed: u64,
    pub host_route: HostRouteStats,
    pub candidate_route: CandidateRouteStats,
    pub counterexamples: Vec<Interpolation>,
}

/// Largest state set accepted by [`mo2_interpolation_scan`].
pub const SCAN_MAX_SIZE: usize = 3;

const SCAN_BUDGET: Budget = Budget {
    max_elements: 512,
    max_rounds: 16,
};

enum Trial {
    Host { mo2: usize, found: Vec<Interpolation> },
    Candidate(CandidateOutcome),
}

enum CandidateOutcome {
    NoMo2,
    Rejected,
    Contradiction,
    ClosedNotBoolean,
    BudgetExceeded,
    Counterexample(Interpolation),
}

/// Seeded search for MO2 interpolation configurations inside Boolean
/// algebras over `size ≤ 3` states. Even trials draw a random Boolean
/// algebra and search it exhaustively; odd trials draw a random MO2 and a
/// candidate pair `(q, v)` and saturate. A closure that is Boolean is a
/// counterexample.
pub fn mo2_interpolation_scan(
    size: usize,
    trials: usize,
    denominator_bound: u64,
    seed: u64,
) -> Result<ScanReport> {
    if size == 0 || size > SCAN_MAX_SIZE {
        return Err(Error::UnsupportedSize(size));
    }
    if trials == 0 || denominator_bound < 2 {
        return Err(Error::HypothesisViolated(
            "trials must be positive and the denominator bound at least 2".into(),
        ));
    }
    let states = StateSet::numbered(size)?;
    // One independent seed per trial keeps the run reproducible under
    // parallel evaluation.
    let mut master = Lcg::new(seed);
    let seeds: Vec<u64> = (0..trials).map(|_| master.next_u64()).collect();
    let outcomes = par::map_range(trials, |t| {
        let mut rng = Lcg::new(seeds[t]);
        if t % 2 == 0 {
            host_trial(&mut rng, &states, denominator_bound)
        } else {
            Trial::Candidate(candidate_trial(&mut rng, &states, denominator_bound))
        }
    });

    let mut report = ScanReport {
        size,
        trials,
        denominator_bound,
        seed,
        host_route: HostRouteStats::default(),
        candidate_route: CandidateRouteStats::default(),
        counterexamples: Vec::new(),
    };
    for outcome in outcomes {
        match outcome {
            Trial::Host { mo2, found } => {
                report.host_route.algebras += 1;
                report.host_route.mo2_subalgebras += mo2;
                report.counterexamples.extend(found);
            }
            Trial::Candidate(c) => {
                let stats = &mut report.candidate_route;
                if !matches!(c, CandidateOutcome::NoMo2) {
                    stats.mo2_instances += 1;
                }
                match c {
                    CandidateOutcome::NoMo2 => {}
                    CandidateOutcome::Rejected => stats.rejected += 1,
                    CandidateOutcome::Contradiction => {
                        stats.tested += 1;
                        stats.contradictions += 1;
                    }
                    CandidateOutcome::ClosedNotBoolean => {
                        stats.tested += 1;
                        stats.closed_not_boolean += 1;
                    }
                    CandidateOutcome::BudgetExceeded => {
                        stats.tested += 1;
                        stats.budget_exceeded += 1;
                    }
                    CandidateOutcome::Counterexample(i) => {
                        stats.tested += 1;
                        report.counterexamples.push(i);
                    }
                }
            }
        }
    }
    Ok(report)
}

fn host_trial(rng: &mut Lcg, states: &StateSet, bound: u64) -> Trial {
    if states.len() < 2 {
        return Trial::Host {
            mo2: 0,
            found: Vec::new(),
        };
    }
    let host = match crate::random::random_boolean(rng, states, bound) {
        Ok(h) => h,
        Err(_) => {
            return Trial::Host {
                mo2: 0,
                found: Vec::new(),
            }
        }
    };
    Trial::Host {
        mo2: mo2_subalgebras(&host).len(),
        found: interpolations_in(&host),
    }
}

/// Uniform multiple of `1/d` in `[lo, hi]`, if any.
fn draw_between(rng: &mut Lcg, lo: &Rational, hi: &Rational, d: u64) -> Option<Rational> {
    let scale = Rational::from_integer(d.into());
    let lo_k = (lo * &scale).ceil().to_integer();
    let hi_k = (hi * &scale).floor().to_integer();
    let lo_k: u64 = lo_k.try_into().ok()?;
    let hi_k: u64 = hi_k.try_into().ok()?;
    (lo_k <= hi_k).then(|| rational(rng.range(lo_k, hi_k) as i64, d as i64))
}

fn candidate_trial(rng: &mut Lcg, states: &StateSet, bound: u64) -> CandidateOutcome {
    let Some(mo2) = crate::random::random_mo_n(rng, states, 2, bound, 50) else {
        return CandidateOutcome::NoMo2;
    };
    let Ok(four) = crate::construct::mo2_generators(&mo2) else {
        return CandidateOutcome::NoMo2;
    };
    let (gi, hi) = [(0, 2), (0, 3), (1, 2), (1, 3)][rng.below(4) as usize];
    let (g, h) = (&four[gi], &four[hi]);
    let d = rng.range(2, bound);
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    let low: Vec<Rational> = (0..states.len()).map(|s| g.value(s).min(h.value(s)).clone()).collect();
    let high: Vec<Rational> = (0..states.len()).map(|s| g.value(s).max(h.value(s)).clone()).collect();
    // q needs a value above 1/2 under both g and h, v one below 1/2 above both.
    let h2 = half();
    let q_states: Vec<usize> = (0..states.len()).filter(|&s| low[s] > h2).collect();
    let v_states: Vec<usize> = (0..states.len()).filter(|&s| high[s] < h2).collect();
    if q_states.is_empty() || v_states.is_empty() {
        return CandidateOutcome::Rejected;
    }
    let sq = q_states[rng.below(q_states.len() as u64) as usize];
    let sv = v_states[rng.below(v_states.len() as u64) as usize];
    let above_half = rational((d / 2 + 1) as i64, d as i64);
    let below_half = rational(((d + 1) / 2 - 1) as i64, d as i64);
    let mut qv = Vec::with_capacity(states.len());
    let mut vv = Vec::with_capacity(states.len());
    for s in 0..states.len() {
        let q_lo = if s == sq { &above_half } else { &zero };
        let v_hi = if s == sv { &below_half } else { &one };
        let (Some(q), Some(v)) = (
            draw_between(rng, q_lo, &low[s], d),
            draw_between(rng, &high[s], v_hi, d),
        ) else {
            return CandidateOutcome::Rejected;
        };
        qv.push(q);
        vv.push(v);
    }
    let q = SProbability::new(states.clone(), qv).expect("in range");
    let v = SProbability::new(states.clone(), vv).expect("in range");
    let shape_ok = q.is_varying()
        && v.is_varying()
        && !mo2.contains(&q)
        && q.lt_unchecked(g)
        && q.lt_unchecked(h)
        && g.lt_unchecked(&v)
        && h.lt_unchecked(&v);
    if !shape_ok {
        return CandidateOutcome::Rejected;
    }
    let Ok(result) = saturate(&mo2, &[q.clone(), v.clone()], SCAN_BUDGET) else {
        return CandidateOutcome::Rejected;
    };
    match result.outcome {
        SaturationOutcome::Contradiction => CandidateOutcome::Contradiction,
        SaturationOutcome::BudgetExceeded => CandidateOutcome::BudgetExceeded,
        SaturationOutcome::Closed => {
            let closure = result.closure.expect("closed");
            if is_boolean(&closure).unwrap_or(false) {
                CandidateOutcome::Counterexample(Interpolation {
                    mo2,
                    g: g.clone(),
                    h: h.clone(),
                    q,
                    v,
                    host: closure,
                })
            } else {
                CandidateOutcome::ClosedNotBoolean
            }
        }
    }
}
