use numev::classify::check_th4;
use numev::construct::{boolean_from_atoms_indexed, mo2_boolean_completion};
use numev::random::{
    random_algebra, random_atoms, random_boolean, random_event, random_mo2_instance, random_mo_n,
    random_perturbation, random_split_instance,
};
use numev::search::{boolean_embedding_concrete, enumerate_boolean_subalgebras};
use numev::{
    atoms, boolean_from_atoms, classify, is_boolean, is_concrete, is_lattice, is_orthomodular,
    mo2_interpolation_scan, poset_join, poset_meet, rational, replay, saturate, split_atom,
    verify_axioms, zero_one_extension, Budget, ClassifyConfig, EventSet, Lcg, OracleOutcome,
    ReciprocityClass, SProbability, SaturationOutcome, StateSet, VerdictKind,
};
use proptest::prelude::*;

fn event_from(states: &StateSet, numerators: &[u64], d: u64) -> SProbability {
    let values = numerators.iter().map(|&k| rational(k.min(d) as i64, d as i64)).collect();
    SProbability::new(states.clone(), values).unwrap()
}

/// Three events over a common state set, values multiples of `1/d`.
fn triple() -> impl Strategy<Value = [SProbability; 3]> {
    (1usize..=4, 2u64..=16).prop_flat_map(|(n, d)| {
        prop::collection::vec(0..=d, 3 * n).prop_map(move |k| {
            let states = StateSet::numbered(n).unwrap();
            [0, 1, 2].map(|i| event_from(&states, &k[i * n..(i + 1) * n], d))
        })
    })
}

fn algebra() -> impl Strategy<Value = EventSet> {
    any::<u64>().prop_map(|seed| random_algebra(&mut Lcg::new(seed), 4, 16).unwrap())
}

fn dual(c: ReciprocityClass) -> ReciprocityClass {
    match c {
        ReciprocityClass::Below => ReciprocityClass::Above,
        ReciprocityClass::Above => ReciprocityClass::Below,
        other => other,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn complement_is_an_involution([p, _, _] in triple()) {
        prop_assert_eq!(p.complement().complement(), p);
    }

    #[test]
    fn leq_is_a_partial_order([p, q, r] in triple()) {
        prop_assert!(p.leq(&p).unwrap());
        if p.leq(&q).unwrap() && q.leq(&p).unwrap() {
            prop_assert_eq!(&p, &q);
        }
        if p.leq(&q).unwrap() && q.leq(&r).unwrap() {
            prop_assert!(p.leq(&r).unwrap());
        }
    }

    #[test]
    fn orthogonal_sums_stay_in_range([p, q, r] in triple()) {
        if p.orthogonal(&q).unwrap() {
            let s = p.ortho_sum(&q).unwrap();
            prop_assert!(s.values().iter().all(|v| *v <= rational(1, 1)));
            prop_assert_eq!(&s, &q.ortho_sum(&p).unwrap());
            if s.orthogonal(&r).unwrap() {
                let right = q.ortho_sum(&r).unwrap();
                prop_assert_eq!(s.ortho_sum(&r).unwrap(), p.ortho_sum(&right).unwrap());
            }
        } else {
            prop_assert!(p.ortho_sum(&q).is_err());
        }
    }

    #[test]
    fn difference_is_complement_of_sum_with_complement([p, q, _] in triple()) {
        if p.leq(&q).unwrap() {
            let expected = p.ortho_sum(&q.complement()).unwrap().complement();
            prop_assert_eq!(q.difference(&p).unwrap(), expected);
        } else {
            prop_assert!(q.difference(&p).is_err());
        }
    }

    #[test]
    fn reciprocity_is_symmetric_and_dual([p, q, _] in triple()) {
        prop_assume!(p.is_proper() && q.is_proper());
        let c = p.reciprocity(&q).unwrap();
        prop_assert_eq!(c, q.reciprocity(&p).unwrap());
        prop_assert_eq!(dual(c), p.complement().reciprocity(&q.complement()).unwrap());
    }

    #[test]
    fn algebra_elements_are_varying_and_operations_are_lattice_operations(e in algebra()) {
        prop_assert!(verify_axioms(&e).is_algebra());
        for p in e.iter() {
            prop_assert!(p.is_constant_bound() || p.is_varying());
            for q in e.iter() {
                if p.orthogonal(q).unwrap() {
                    let s = p.ortho_sum(q).unwrap();
                    prop_assert!(e.contains(&s));
                    prop_assert_eq!(poset_join(&e, p, q).unwrap(), Some(s));
                }
                if p.leq(q).unwrap() {
                    if let Some(m) = poset_meet(&e, q, &p.complement()).unwrap() {
                        prop_assert_eq!(q.difference(p).unwrap(), m);
                    }
                }
            }
        }
    }

    #[test]
    fn boolean_implies_orthomodular_implies_algebra(seed in any::<u64>()) {
        let mut rng = Lcg::new(seed);
        let e = random_algebra(&mut rng, 4, 16).unwrap();
        let e = if rng.coin() { random_perturbation(&mut rng, &e, 16).unwrap() } else { e };
        let algebra = verify_axioms(&e).is_algebra();
        match (is_boolean(&e), is_orthomodular(&e)) {
            (Ok(b), Ok(o)) => {
                prop_assert!(algebra);
                prop_assert!(!b || o);
            }
            _ => prop_assert!(!algebra),
        }
    }

    #[test]
    fn saturation_of_an_algebra_is_idempotent(e in algebra()) {
        let r = saturate(&e, &[], Budget::default()).unwrap();
        prop_assert_eq!(r.outcome, SaturationOutcome::Closed);
        prop_assert_eq!(r.closure.as_ref(), Some(&e));
    }

    #[test]
    fn contradictions_replay_and_never_close(seed in any::<u64>()) {
        let mut rng = Lcg::new(seed);
        let e = random_algebra(&mut rng, 3, 8).unwrap();
        let q = random_event(&mut rng, e.states(), 8);
        let r = saturate(&e, std::slice::from_ref(&q), Budget::default()).unwrap();
        if r.outcome == SaturationOutcome::Contradiction {
            let inputs = e.with_event(&q).unwrap();
            prop_assert!(numev::algebra::replay_contradiction_trace(&inputs, &r.trace));
            let last = r.trace.last().unwrap();
            let result = SProbability::new(e.states().clone(), last.result.clone());
            prop_assert!(result.map(|x| !x.is_proper()).unwrap_or(true));
        }
        if let Some(c) = &r.closure {
            prop_assert!(verify_axioms(c).is_algebra());
            prop_assert!(e.is_subset_of(c) && c.contains(&q));
        }
    }

    #[test]
    fn extension_preserves_and_reflects_structure(seed in any::<u64>()) {
        let mut rng = Lcg::new(seed);
        let e = random_algebra(&mut rng, 3, 16).unwrap();
        let e = if rng.coin() { random_perturbation(&mut rng, &e, 16).unwrap() } else { e };
        let (ext, map) = zero_one_extension(&e, "t").unwrap();
        prop_assert_eq!(verify_axioms(&e).is_algebra(), verify_axioms(&ext).is_algebra());
        prop_assert_eq!(is_lattice(&e), is_lattice(&ext));
        prop_assert_eq!(is_boolean(&e).ok(), is_boolean(&ext).ok());
        prop_assert_eq!(is_concrete(&e), is_concrete(&ext));
        prop_assert_eq!(map.base(), e);
    }

    #[test]
    fn atom_lists_round_trip(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = Lcg::new(seed);
        let states = StateSet::numbered(n).unwrap();
        let list = random_atoms(&mut rng, &states, n, 16).unwrap();
        let indexed = boolean_from_atoms_indexed(&list).unwrap();
        for i in 0..indexed.len() {
            for j in 0..indexed.len() {
                prop_assert_eq!(indexed[i].orthogonal(&indexed[j]).unwrap(), i & j == 0);
            }
        }
        let e = boolean_from_atoms(&list).unwrap();
        prop_assert_eq!(boolean_from_atoms(&atoms(&e).unwrap()).unwrap(), e);
    }

    #[test]
    fn split_doubles_the_algebra(seed in any::<u64>(), n in 3usize..=5) {
        let mut rng = Lcg::new(seed);
        let inst = random_split_instance(&mut rng, &StateSet::numbered(n).unwrap(), 16).unwrap();
        let out = split_atom(&inst.algebra, &inst.p1, &inst.q).unwrap();
        prop_assert!(is_boolean(&out).unwrap());
        prop_assert_eq!(out.len(), 2 * inst.algebra.len());
        prop_assert!(inst.algebra.is_subset_of(&out) && out.contains(&inst.q));
    }

    #[test]
    fn mo2_completion_contains_inputs(seed in any::<u64>()) {
        let mut rng = Lcg::new(seed);
        let inst = random_mo2_instance(&mut rng, &StateSet::numbered(4).unwrap(), 16).unwrap();
        prop_assume!(inst.q.is_varying());
        let b = mo2_boolean_completion(&inst.algebra, &inst.q).unwrap();
        prop_assert!(inst.algebra.is_subset_of(&b) && b.contains(&inst.q));
        prop_assert!(is_boolean(&b).unwrap());
    }

    #[test]
    fn mo_n_is_never_boolean(seed in any::<u64>(), pairs in 2usize..=3) {
        let mut rng = Lcg::new(seed);
        if let Some(e) = random_mo_n(&mut rng, &StateSet::numbered(4).unwrap(), pairs, 16, 50) {
            prop_assert!(!is_boolean(&e).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn classify_certificates_replay(seed in any::<u64>()) {
        let mut rng = Lcg::new(seed);
        let e = random_algebra(&mut rng, 4, 8).unwrap();
        let q = random_event(&mut rng, e.states(), 8);
        prop_assume!(q.is_varying() && !e.contains(&q));
        let cfg = ClassifyConfig::default();
        let v = classify(&e, &q, &cfg).unwrap();
        prop_assert_eq!(&v, &classify(&e, &q, &cfg).unwrap());
        if let Some(c) = &v.certificate {
            prop_assert!(replay(c, &e, Some(&q)), "{} does not replay", c.rule);
        }
        if v.kind == VerdictKind::Destructive {
            let r = saturate(&e, std::slice::from_ref(&q), cfg.budget).unwrap();
            prop_assert_ne!(r.outcome, SaturationOutcome::Closed);
        }
    }

    #[test]
    fn reciprocity_and_oracle_agree_on_two_valued_input(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = Lcg::new(seed);
        let states = StateSet::numbered(n).unwrap();
        let subs: Vec<EventSet> = enumerate_boolean_subalgebras(&states).unwrap().collect();
        let e = &subs[rng.below(subs.len() as u64) as usize];
        let k: Vec<u64> = (0..n).map(|_| rng.below(2)).collect();
        let q = event_from(&states, &k, 1);
        prop_assume!(q.is_varying() && !e.contains(&q));
        if check_th4(e, &q).unwrap().is_some() {
            let mut events = e.events().to_vec();
            events.push(q.clone());
            prop_assert_ne!(boolean_embedding_concrete(&events).outcome, OracleOutcome::EmbeddingFound);
        }
    }

    #[test]
    fn oracle_witness_is_smallest(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = Lcg::new(seed);
        let states = StateSet::numbered(n).unwrap();
        let events: Vec<SProbability> = (0..rng.range(1, 3))
            .map(|_| {
                let k: Vec<u64> = (0..n).map(|_| rng.below(2)).collect();
                event_from(&states, &k, 1)
            })
            .collect();
        let r = boolean_embedding_concrete(&events);
        prop_assert_eq!(r.outcome, OracleOutcome::EmbeddingFound);
        let w = r.witness.unwrap();
        prop_assert!(verify_axioms(&w).is_algebra() && is_boolean(&w).unwrap());
        prop_assert!(events.iter().all(|x| w.contains(x)));
        let smallest = enumerate_boolean_subalgebras(&states)
            .unwrap()
            .filter(|s| events.iter().all(|x| s.contains(x)))
            .map(|s| s.len())
            .min();
        prop_assert_eq!(Some(w.len()), smallest);
    }

    #[test]
    fn random_booleans_embed_in_their_refinements(seed in any::<u64>()) {
        let mut rng = Lcg::new(seed);
        let e = random_boolean(&mut rng, &StateSet::numbered(3).unwrap(), 16).unwrap();
        prop_assert!(is_boolean(&e).unwrap());
        prop_assert!(is_orthomodular(&e).unwrap());
    }
}

#[test]
fn scan_reports_are_reproducible() {
    let a = mo2_interpolation_scan(3, 200, 16, 9).unwrap();
    let b = mo2_interpolation_scan(3, 200, 16, 9).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert!(a.counterexamples.is_empty());
}
