//! Constructions: 0,1-extensions, Boolean algebras from atoms, atom
//! splitting, MOn builders and the Boolean completion of MO2 plus one event.

use serde::Serialize;

use crate::algebra::{atoms, is_boolean, verify_axioms, EventSet};
use crate::error::{Error, Result};
use crate::event::{
    format_raw, in_unit_range, is_varying_raw, raw_difference, raw_sum, Rational, SProbability,
    StateSet,
};
use crate::par;

/// Largest atom count accepted by [`boolean_from_atoms`].
pub const MAX_ATOMS: usize = 16;

/// Relates a base algebra over `S` to its 0,1-extension over `S ∪ {s̄}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtensionMap {
    pub base_states: StateSet,
    pub extended_states: StateSet,
    /// Position of `s̄` in `extended_states`.
    pub new_state_index: usize,
    /// `(p, (p,0), (p,1))` for every base event `p`, in base order.
    pub event_pairs: Vec<(SProbability, SProbability, SProbability)>,
}

impl ExtensionMap {
    pub fn new_state(&self) -> &str {
        self.extended_states.label(self.new_state_index)
    }

    pub fn base(&self) -> EventSet {
        EventSet::from_sorted_unchecked(
            self.base_states.clone(),
            self.event_pairs.iter().map(|(p, _, _)| p.clone()).collect(),
        )
    }

    /// `(q, c)`: `q` with value `c` at `s̄`.
    pub fn lift(&self, q: &SProbability, c: Rational) -> Result<SProbability> {
        if q.states() != &self.base_states {
            return Err(Error::StateSetMismatch);
        }
        check_unit(self.new_state(), &c)?;
        Ok(q.inserted(&self.extended_states, self.new_state_index, c))
    }

    /// Splits `q̄` into its restriction to `S` and its value at `s̄`.
    pub fn restrict(&self, lifted: &SProbability) -> Result<(SProbability, Rational)> {
        if lifted.states() != &self.extended_states {
            return Err(Error::StateSetMismatch);
        }
        let c = lifted.value(self.new_state_index).clone();
        Ok((lifted.removed(&self.base_states, self.new_state_index), c))
    }
}

fn check_unit(state: &str, c: &Rational) -> Result<()> {
    if in_unit_range(std::slice::from_ref(c)) {
        Ok(())
    } else {
        Err(Error::ValueOutOfRange {
            state: state.to_string(),
            value: c.to_string(),
        })
    }
}

// Full verification is quadratic-to-cubic in the set size; run it on small
// constructions in debug builds only.
fn debug_verify(set: &EventSet) {
    if cfg!(debug_assertions) && set.len() <= 256 {
        debug_assert!(verify_axioms(set).is_algebra(), "construction is not an algebra");
    }
}

/// Product of two event sets over disjoint state sets: all concatenations
/// `(p, r)` with `p ∈ a`, `r ∈ b`.
pub fn product(a: &EventSet, b: &EventSet) -> Result<EventSet> {
    let mut labels = a.states().labels().to_vec();
    labels.extend(b.states().labels().iter().cloned());
    let states = StateSet::new(labels)?;
    let events = a
        .iter()
        .flat_map(|p| {
            b.iter().map(|r| {
                let mut values = p.values().to_vec();
                values.extend(r.values().iter().cloned());
                SProbability::from_raw_unchecked(states.clone(), values)
            })
        })
        .collect::<Vec<_>>();
    EventSet::from_exact(states, events)
}

/// `{(p,0), (p,1) : p ∈ E}` over `S ∪ {new_state}`, with `s̄` appended last.
pub fn zero_one_extension(set: &EventSet, new_state: &str) -> Result<(EventSet, ExtensionMap)> {
    let two = EventSet::new(StateSet::new([new_state])?, [])?;
    let extended = product(set, &two)?;
    let extended_states = extended.states().clone();
    let index = set.states().len();
    let event_pairs = set
        .iter()
        .map(|p| {
            (
                p.clone(),
                p.inserted(&extended_states, index, Rational::from_integer(0.into())),
                p.inserted(&extended_states, index, Rational::from_integer(1.into())),
            )
        })
        .collect();
    let map = ExtensionMap {
        base_states: set.states().clone(),
        extended_states,
        new_state_index: index,
        event_pairs,
    };
    Ok((extended, map))
}

/// Recognises `Ē` as a 0,1-extension of some base set, trying states from
/// last to first. Needs at least two states.
pub fn detect_extension(set: &EventSet) -> Option<ExtensionMap> {
    let states = set.states();
    if states.len() < 2 || set.len() % 2 != 0 {
        return None;
    }
    (0..states.len())
        .rev()
        .find_map(|k| extension_at(set, k))
}

fn extension_at(set: &EventSet, k: usize) -> Option<ExtensionMap> {
    let states = set.states();
    if !set.iter().all(|e| e.value(k).is_integer()) {
        return None;
    }
    let base_states = states.without_state(k).ok()?;
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    let mut event_pairs = Vec::new();
    for e in set.iter().filter(|e| *e.value(k) == zero) {
        let p = e.removed(&base_states, k);
        let high = p.inserted(states, k, one.clone());
        if !set.contains(&high) {
            return None;
        }
        event_pairs.push((p, e.clone(), high));
    }
    if event_pairs.len() * 2 != set.len() {
        return None;
    }
    event_pairs.sort_by(|a, b| a.0.cmp(&b.0));
    Some(ExtensionMap {
        base_states,
        extended_states: states.clone(),
        new_state_index: k,
        event_pairs,
    })
}

/// `q` with value `c` appended at a new state labelled `new_state`.
pub fn lift_event(q: &SProbability, c: Rational, new_state: &str) -> Result<SProbability> {
    check_unit(new_state, &c)?;
    let index = q.states().len();
    let states = q.states().with_state_at(index, new_state)?;
    Ok(q.inserted(&states, index, c))
}

fn check_atoms(atom_list: &[SProbability]) -> Result<StateSet> {
    let n = atom_list.len();
    if n > MAX_ATOMS {
        return Err(Error::AtomCountTooLarge { count: n, cap: MAX_ATOMS });
    }
    let Some(first) = atom_list.first() else {
        return Err(Error::AtomsDontSumToOne("0".into()));
    };
    let states = first.states().clone();
    if atom_list.iter().any(|a| a.states() != &states) {
        return Err(Error::StateSetMismatch);
    }
    // A single atom is only possible for the two-element algebra {0, 1}.
    let lone_one = n == 1 && first.is_one();
    if !lone_one {
        if let Some(a) = atom_list.iter().find(|a| !a.is_varying()) {
            return Err(Error::AtomsNotVarying(a.to_string()));
        }
    }
    for (i, a) in atom_list.iter().enumerate() {
        if let Some(b) = atom_list[i + 1..].iter().find(|b| !a.perp_unchecked(b)) {
            return Err(Error::AtomsNotOrthogonal(a.to_string(), b.to_string()));
        }
    }
    let total = atom_list
        .iter()
        .skip(1)
        .fold(first.values().to_vec(), |acc, a| raw_sum(&acc, a.values()));
    if !total.iter().all(|v| *v == Rational::from_integer(1.into())) {
        return Err(Error::AtomsDontSumToOne(format_raw(&total)));
    }
    Ok(states)
}

/// `p_I = Σ_{i∈I} atom_i` for every bitmask `I < 2^n`, indexed by `I`.
pub fn boolean_from_atoms_indexed(atom_list: &[SProbability]) -> Result<Vec<SProbability>> {
    let states = check_atoms(atom_list)?;
    let zero = vec![Rational::from_integer(0.into()); states.len()];
    Ok(par::map_range(1usize << atom_list.len(), |mask| {
        let values = atom_list
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(zero.clone(), |acc, (_, a)| raw_sum(&acc, a.values()));
        SProbability::from_raw_unchecked(states.clone(), values)
    }))
}

/// The Boolean algebra `{p_I : I ⊆ N}` generated by pairwise orthogonal,
/// varying atoms summing to 1.
pub fn boolean_from_atoms(atom_list: &[SProbability]) -> Result<EventSet> {
    let states = check_atoms(atom_list)?;
    let mut events = boolean_from_atoms_indexed(atom_list)?;
    events.sort();
    let set = EventSet::from_sorted_unchecked(states, events);
    debug_verify(&set);
    Ok(set)
}

/// Refines the atom `p1` of a Boolean `E` into `q` and `p1 − q`. The new
/// atom list is `q, p1 − q`, then the remaining atoms of `E`.
pub fn split_atom(set: &EventSet, p1: &SProbability, q: &SProbability) -> Result<EventSet> {
    if q.states() != set.states() || p1.states() != set.states() {
        return Err(Error::StateSetMismatch);
    }
    if !is_boolean(set)? {
        return Err(Error::NotBoolean);
    }
    let atom_list = atoms(set)?;
    if !atom_list.contains(p1) {
        return Err(Error::NotAnAtom(p1.to_string()));
    }
    if !q.lt_unchecked(p1) {
        return Err(Error::NotBelowAtom(q.to_string(), p1.to_string()));
    }
    let rest = p1.difference(q)?;
    if !rest.is_proper() {
        return Err(Error::DifferenceNotProper(rest.to_string()));
    }
    if !q.is_varying() {
        return Err(Error::NotVarying(q.to_string()));
    }
    let mut refined = vec![q.clone(), rest];
    refined.extend(atom_list.into_iter().filter(|a| a != p1));
    boolean_from_atoms(&refined)
}

/// `{0, 1}` together with the listed complementary pairs, required to be
/// varying and pairwise incomparable.
pub fn mo_n(pairs: &[(SProbability, SProbability)]) -> Result<EventSet> {
    let Some((first, _)) = pairs.first() else {
        return Err(Error::HypothesisViolated("no pairs given".into()));
    };
    let states = first.states().clone();
    let mut elements = Vec::with_capacity(pairs.len() * 2);
    for (a, b) in pairs {
        if a.states() != &states || b.states() != &states {
            return Err(Error::StateSetMismatch);
        }
        if a.complement() != *b {
            return Err(Error::NotComplementaryPair(a.to_string(), b.to_string()));
        }
        elements.push(a);
        elements.push(b);
    }
    if let Some(e) = elements.iter().find(|e| !e.is_varying()) {
        return Err(Error::NotVarying(e.to_string()));
    }
    for (i, a) in elements.iter().enumerate() {
        if let Some(b) = elements[i + 1..]
            .iter()
            .find(|b| a.le_unchecked(b) || b.le_unchecked(a))
        {
            return Err(Error::ComparableElements(a.to_string(), b.to_string()));
        }
    }
    let set = EventSet::new(states, elements.into_iter().cloned())?;
    let report = verify_axioms(&set);
    if !report.is_algebra() {
        let detail = report
            .violations
            .first()
            .map(|c| {
                c.witnesses
                    .iter()
                    .map(|w| format!("{}={}", w.name, witness_text(&w.value)))
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .unwrap_or_default();
        return Err(Error::AxiomCViolated(detail));
    }
    Ok(set)
}

fn witness_text(value: &crate::certificate::WitnessValue) -> String {
    use crate::certificate::WitnessValue as W;
    match value {
        W::Event(p) => p.to_string(),
        W::Values(v) => format_raw(v),
        W::Scalar(r) => r.to_string(),
        W::State(s) => s.clone(),
        W::Algebra(a) => format!("{} events", a.len()),
        W::Trace(t) => format!("{} steps", t.len()),
    }
}

/// The four non-constant elements of an MO2 as `[a, a', b, b']`, with `a`
/// and `b` the canonical-order minima of their pairs.
pub fn mo2_generators(set: &EventSet) -> Result<[SProbability; 4]> {
    if set.len() != 6 || set.zero_index().is_none() || set.one_index().is_none() {
        return Err(Error::NotMO2);
    }
    if !verify_axioms(set).is_algebra() {
        return Err(Error::NotMO2);
    }
    let middle: Vec<&SProbability> = set.iter().filter(|e| !e.is_constant_bound()).collect();
    for (i, a) in middle.iter().enumerate() {
        if middle[i + 1..]
            .iter()
            .any(|b| a.le_unchecked(b) || b.le_unchecked(a))
        {
            return Err(Error::NotMO2);
        }
    }
    let a = middle[0].clone();
    let ac = a.complement();
    let b = middle
        .iter()
        .find(|e| ***e != a && ***e != ac)
        .map(|e| (*e).clone())
        .ok_or(Error::NotMO2)?;
    let bc = b.complement();
    Ok([a, ac, b, bc])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mo2Completion {
    pub p1: SProbability,
    pub p2: SProbability,
    /// `q, p1 − q, p2 − q, 1 + q − p1 − p2`.
    pub atoms: Vec<SProbability>,
    pub algebra: EventSet,
}

const COMPLETION_PARTS: [&str; 3] = ["p1 - q", "p2 - q", "1 + q - p1 - p2"];

/// Boolean completion of an MO2 `E` together with `q`. The roles of `p1` and
/// `p2` are tried over all four choices from the two complementary pairs.
pub fn complete_mo2(set: &EventSet, q: &SProbability) -> Result<Mo2Completion> {
    if q.states() != set.states() {
        return Err(Error::StateSetMismatch);
    }
    let [a, ac, b, bc] = mo2_generators(set)?;
    if set.contains(q) {
        return Err(Error::EventInSet(q.to_string()));
    }
    if !q.is_varying() {
        return Err(Error::NotVarying(q.to_string()));
    }
    let one = vec![Rational::from_integer(1.into()); q.values().len()];
    let mut best: Option<(usize, String)> = None;
    for (p1, p2) in [(&a, &b), (&a, &bc), (&ac, &b), (&ac, &bc)] {
        let parts = [
            raw_difference(p1.values(), q.values()),
            raw_difference(p2.values(), q.values()),
            raw_difference(
                &raw_sum(&one, q.values()),
                &raw_sum(p1.values(), p2.values()),
            ),
        ];
        let passed = parts
            .iter()
            .take_while(|v| in_unit_range(v) && is_varying_raw(v))
            .count();
        if passed == parts.len() {
            let mut atom_list = vec![q.clone()];
            atom_list.extend(
                parts
                    .into_iter()
                    .map(|v| SProbability::from_raw_unchecked(q.states().clone(), v)),
            );
            let algebra = boolean_from_atoms(&atom_list)?;
            if !set.is_subset_of(&algebra) || !algebra.contains(q) {
                return Err(Error::Inconsistent(
                    "MO2 completion does not contain its input".into(),
                ));
            }
            return Ok(Mo2Completion {
                p1: p1.clone(),
                p2: p2.clone(),
                atoms: atom_list,
                algebra,
            });
        }
        if best.as_ref().is_none_or(|(n, _)| passed > *n) {
            let failing = &parts[passed];
            best = Some((
                passed,
                format!(
                    "{} = {} is not a varying S-probability (p1 = {p1}, p2 = {p2})",
                    COMPLETION_PARTS[passed],
                    format_raw(failing)
                ),
            ));
        }
    }
    Err(Error::HypothesisViolated(best.map(|(_, m)| m).unwrap_or_default()))
}

pub fn mo2_boolean_completion(set: &EventSet, q: &SProbability) -> Result<EventSet> {
    complete_mo2(set, q).map(|c| c.algebra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{is_concrete, is_lattice};
    use crate::event::rational;

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
                &["0", "1", "1", "0"],
                &["0", "1", "0", "1"],
                &["1", "0", "1", "0"],
            ],
        )
    }

    #[test]
    fn extension_of_trivial_algebra() {
        let base = EventSet::new(st(1), []).unwrap();
        let (ext, map) = zero_one_extension(&base, "t").unwrap();
        assert_eq!(ext.len(), 4);
        assert_eq!(ext.states().labels(), ["s1", "t"]);
        assert_eq!(map.new_state(), "t");
        assert!(is_boolean(&ext).unwrap());
        assert_eq!(
            zero_one_extension(&base, "s1").unwrap_err(),
            Error::DuplicateStateLabel("s1".into())
        );
    }

    #[test]
    fn extension_preserves_and_reflects_structure() {
        let s = st(3);
        let four = set(&s, &[&["3/4", "1/4", "1/4"], &["1/4", "3/4", "3/4"]]);
        let (ext, _) = zero_one_extension(&four, "t").unwrap();
        assert_eq!(ext.len(), 8);
        assert!(is_boolean(&ext).unwrap());

        let (ext, map) = zero_one_extension(&mo2(), "t").unwrap();
        assert_eq!(ext.len(), 12);
        assert!(verify_axioms(&ext).is_algebra());
        assert!(!is_boolean(&ext).unwrap());
        assert!(is_lattice(&ext) && is_concrete(&ext));
        assert_eq!(map.base(), mo2());
        assert_eq!(detect_extension(&ext), Some(map));
    }

    #[test]
    fn detection_rejects_non_extensions() {
        assert_eq!(detect_extension(&mo2()), None);
        let s = st(2);
        assert_eq!(detect_extension(&set(&s, &[&["3/4", "1/4"]])), None);
    }

    #[test]
    fn lift_examples() {
        let s = st(3);
        let q = ev(&s, &["3/8", "1/2", "7/8"]);
        let lifted = lift_event(&q, rational(1, 2), "t").unwrap();
        assert_eq!(lifted.values(), ev(&st(4), &["3/8", "1/2", "7/8", "1/2"]).values());
        let (_, map) = zero_one_extension(&mo2(), "t").unwrap();
        let p = ev(&st(4), &["1", "0", "0", "1"]);
        assert_eq!(map.lift(&p, rational(0, 1)).unwrap(), map.event_pairs.iter().find(|t| t.0 == p).unwrap().1);
        let half_lift = map.lift(&p, rational(1, 2)).unwrap();
        assert_eq!(map.restrict(&half_lift).unwrap(), (p.clone(), rational(1, 2)));
        assert!(matches!(lift_event(&q, rational(3, 2), "t"), Err(Error::ValueOutOfRange { .. })));
    }

    #[test]
    fn boolean_from_atoms_examples() {
        let s = st(4);
        let e = boolean_from_atoms(&[
            ev(&s, &["1/4", "0", "0", "1"]),
            ev(&s, &["3/4", "0", "0", "0"]),
            ev(&s, &["0", "1", "1", "0"]),
        ])
        .unwrap();
        assert_eq!(e.len(), 8);
        assert!(e.contains(&ev(&s, &["1/4", "1", "1", "1"])));
        assert!(is_boolean(&e).unwrap());

        let units: Vec<_> = (0..4)
            .map(|i| {
                let lits: Vec<&str> = (0..4).map(|j| if i == j { "1" } else { "0" }).collect();
                ev(&s, &lits)
            })
            .collect();
        let cube = boolean_from_atoms(&units).unwrap();
        assert_eq!(cube.len(), 16);
        assert!(is_concrete(&cube));
        assert_eq!(atoms(&cube).unwrap().len(), 4);

        let s2 = st(2);
        let small = boolean_from_atoms(&[ev(&s2, &["3/4", "1/4"]), ev(&s2, &["1/4", "3/4"])]).unwrap();
        assert_eq!(small.len(), 4);
        assert!(is_boolean(&small).unwrap());
    }

    #[test]
    fn boolean_from_atoms_rejections() {
        let s = st(2);
        assert!(matches!(
            boolean_from_atoms(&[ev(&s, &["1/2", "1/4"]), ev(&s, &["1/2", "3/4"])]),
            Err(Error::AtomsNotVarying(_))
        ));
        assert!(matches!(
            boolean_from_atoms(&[ev(&s, &["3/4", "1/4"]), ev(&s, &["3/4", "1/4"])]),
            Err(Error::AtomsNotOrthogonal(..))
        ));
        assert!(matches!(
            boolean_from_atoms(&[ev(&s, &["3/4", "1/4"]), ev(&s, &["1/8", "3/4"])]),
            Err(Error::AtomsDontSumToOne(_))
        ));
        let one = boolean_from_atoms(&[SProbability::one(&s)]).unwrap();
        assert_eq!(one, EventSet::new(s, []).unwrap());
    }

    #[test]
    fn indexed_order_is_subset_order() {
        let s = st(2);
        let a = [ev(&s, &["3/4", "1/4"]), ev(&s, &["1/4", "3/4"])];
        let indexed = boolean_from_atoms_indexed(&a).unwrap();
        assert!(indexed[0].is_zero());
        assert_eq!(indexed[1], a[0]);
        assert_eq!(indexed[2], a[1]);
        assert!(indexed[3].is_one());
    }

    #[test]
    fn split_atom_examples() {
        let s = st(4);
        let e = set(&s, &[&["1", "0", "0", "1"], &["0", "1", "1", "0"]]);
        let p1 = ev(&s, &["1", "0", "0", "1"]);
        let q = ev(&s, &["1/4", "0", "0", "1"]);
        let out = split_atom(&e, &p1, &q).unwrap();
        let expected = boolean_from_atoms(&[
            ev(&s, &["1/4", "0", "0", "1"]),
            ev(&s, &["3/4", "0", "0", "0"]),
            ev(&s, &["0", "1", "1", "0"]),
        ])
        .unwrap();
        assert_eq!(out, expected);
        assert!(e.is_subset_of(&out) && out.contains(&q));

        let s3 = st(3);
        let b = boolean_from_atoms(&[ev(&s3, &["7/8", "3/4", "1/8"]), ev(&s3, &["1/8", "1/4", "7/8"])]).unwrap();
        let q = ev(&s3, &["3/4", "1/8", "0"]);
        let out = split_atom(&b, &ev(&s3, &["7/8", "3/4", "1/8"]), &q).unwrap();
        assert_eq!(out.len(), 8);
        assert!(is_boolean(&out).unwrap() && b.is_subset_of(&out) && out.contains(&q));
    }

    #[test]
    fn split_atom_rejections() {
        let s = st(2);
        let e = boolean_from_atoms(&[ev(&s, &["3/4", "1/4"]), ev(&s, &["1/4", "3/4"])]).unwrap();
        let p1 = ev(&s, &["3/4", "1/4"]);
        assert!(matches!(
            split_atom(&e, &p1, &ev(&s, &["1/2", "1/4"])),
            Err(Error::DifferenceNotProper(_))
        ));
        // The slack 1/2 at the second state leaves (1/2,1/8) non-varying.
        assert!(matches!(
            split_atom(&e, &p1, &ev(&s, &["1/4", "1/8"])),
            Err(Error::DifferenceNotProper(_))
        ));
        assert!(matches!(
            split_atom(&e, &ev(&s, &["1", "1"]), &ev(&s, &["1/4", "1/8"])),
            Err(Error::NotAnAtom(_))
        ));
        assert!(matches!(
            split_atom(&e, &p1, &ev(&s, &["7/8", "1/8"])),
            Err(Error::NotBelowAtom(..))
        ));
        assert_eq!(split_atom(&mo2(), &ev(&st(4), &["1", "0", "0", "1"]), &ev(&st(4), &["1/4", "0", "0", "1"])), Err(Error::NotBoolean));
    }

    #[test]
    fn mo_n_examples() {
        let s = st(4);
        let built = mo_n(&[
            (ev(&s, &["1", "0", "0", "1"]), ev(&s, &["0", "1", "1", "0"])),
            (ev(&s, &["0", "1", "0", "1"]), ev(&s, &["1", "0", "1", "0"])),
        ])
        .unwrap();
        assert_eq!(built, mo2());
        assert!(!is_boolean(&built).unwrap());

        let ex4 = mo_n(&[
            (ev(&s, &["1", "0", "1/2", "1/2"]), ev(&s, &["0", "1", "1/2", "1/2"])),
            (ev(&s, &["1/2", "1/2", "0", "1"]), ev(&s, &["1/2", "1/2", "1", "0"])),
        ])
        .unwrap();
        assert_eq!(ex4.len(), 6);
        assert!(!is_boolean(&ex4).unwrap());

        let mo1 = mo_n(&[(ev(&s, &["1", "0", "0", "1"]), ev(&s, &["0", "1", "1", "0"]))]).unwrap();
        assert!(is_boolean(&mo1).unwrap());
    }

    #[test]
    fn mo_n_rejections() {
        let s = st(2);
        assert!(matches!(
            mo_n(&[(ev(&s, &["3/4", "1/4"]), ev(&s, &["1/4", "1/4"]))]),
            Err(Error::NotComplementaryPair(..))
        ));
        assert!(matches!(
            mo_n(&[
                (ev(&s, &["3/4", "1/4"]), ev(&s, &["1/4", "3/4"])),
                (ev(&s, &["7/8", "1/4"]), ev(&s, &["1/8", "3/4"])),
            ]),
            Err(Error::ComparableElements(..))
        ));
    }

    fn th7_instance() -> (EventSet, SProbability) {
        let s = st(4);
        let e = mo_n(&[
            (
                ev(&s, &["5/6", "5/6", "1/6", "1/6"]),
                ev(&s, &["1/6", "1/6", "5/6", "5/6"]),
            ),
            (
                ev(&s, &["5/6", "1/6", "5/6", "1/6"]),
                ev(&s, &["1/6", "5/6", "1/6", "5/6"]),
            ),
        ])
        .unwrap();
        (e, ev(&s, &["3/4", "1/12", "1/12", "1/12"]))
    }

    #[test]
    fn mo2_completion_builds_sixteen_element_algebra() {
        let (e, q) = th7_instance();
        let c = complete_mo2(&e, &q).unwrap();
        assert_eq!(c.algebra.len(), 16);
        assert!(is_boolean(&c.algebra).unwrap());
        assert!(e.is_subset_of(&c.algebra) && c.algebra.contains(&q));
        let s = e.states().clone();
        assert_eq!(c.p1, ev(&s, &["5/6", "5/6", "1/6", "1/6"]));
        assert_eq!(c.atoms[3], ev(&s, &["1/12", "1/12", "1/12", "3/4"]));
        // p1' = (p2 − q) + (1 + q − p1 − p2)
        assert_eq!(c.atoms[2].ortho_sum(&c.atoms[3]).unwrap(), c.p1.complement());
    }

    #[test]
    fn mo2_completion_rejections() {
        let (e, _) = th7_instance();
        let s = e.states().clone();
        let q = ev(&s, &["1", "1/12", "1/12", "1/12"]);
        assert!(matches!(complete_mo2(&e, &q), Err(Error::HypothesisViolated(_))));
        let q = ev(&s, &["3/4", "1/12", "1/12", "1/12"]);
        assert_eq!(complete_mo2(&boolean_from_atoms(&[q.clone(), q.complement()]).unwrap(), &q), Err(Error::NotMO2));
        // The original parameters give a non-varying p1 − q.
        let e2 = mo_n(&[
            (ev(&s, &["1", "0", "3/4", "1/4"]), ev(&s, &["0", "1", "1/4", "3/4"])),
            (ev(&s, &["3/4", "1/4", "1", "0"]), ev(&s, &["1/4", "3/4", "0", "1"])),
        ])
        .unwrap();
        let err = complete_mo2(&e2, &ev(&s, &["3/4", "0", "3/4", "0"])).unwrap_err();
        assert!(matches!(err, Error::HypothesisViolated(m) if m.contains("p1 - q")));
    }
}
