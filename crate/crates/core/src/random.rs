//! Seeded generators for random algebras and instances, driven by [`Lcg`].
//!
//! All values are multiples of `1/d` for a denominator `d` drawn from
//! `2..=denominator_bound`, so every reduced denominator is within the bound.

use crate::algebra::EventSet;
use crate::construct::{boolean_from_atoms, mo_n, zero_one_extension};
use crate::error::{Error, Result};
use crate::event::{rational, SProbability, StateSet};
use crate::lcg::Lcg;

fn check_bound(bound: u64) -> Result<()> {
    if bound < 2 {
        return Err(Error::HypothesisViolated("denominator bound must be at least 2".into()));
    }
    Ok(())
}

fn event(states: &StateSet, numerators: &[u64], d: u64) -> SProbability {
    let values = numerators.iter().map(|&k| rational(k as i64, d as i64)).collect();
    SProbability::new(states.clone(), values).expect("numerators within [0, d]")
}

/// Atoms where `dominant[s] = Some(i)` makes atom `i` exceed 1/2 at state
/// `s`. Every atom must dominate somewhere; with at least two atoms each is
/// then varying.
fn atoms_from_dominants(
    rng: &mut Lcg,
    states: &StateSet,
    n_atoms: usize,
    d: u64,
    dominant: &[Option<usize>],
) -> Vec<SProbability> {
    let mut numerators = vec![vec![0u64; states.len()]; n_atoms];
    for (s, dom) in dominant.iter().enumerate() {
        match *dom {
            Some(i) => {
                let k = rng.range(d / 2 + 1, d);
                numerators[i][s] = k;
                let rest = rng.composition(d - k, n_atoms - 1);
                let others = (0..n_atoms).filter(|&j| j != i);
                for (j, r) in others.zip(rest) {
                    numerators[j][s] = r;
                }
            }
            None => {
                for (j, r) in rng.composition(d, n_atoms).into_iter().enumerate() {
                    numerators[j][s] = r;
                }
            }
        }
    }
    numerators.iter().map(|n| event(states, n, d)).collect()
}

fn random_dominants(rng: &mut Lcg, n_states: usize, n_atoms: usize) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..n_states).collect();
    rng.shuffle(&mut order);
    let mut dominant = vec![None; n_states];
    for (rank, &s) in order.iter().enumerate() {
        dominant[s] = if rank < n_atoms {
            Some(rank)
        } else if rng.coin() {
            Some(rng.below(n_atoms as u64) as usize)
        } else {
            None
        };
    }
    dominant
}

/// `n_atoms` varying, pairwise orthogonal S-probabilities summing to 1.
pub fn random_atoms(
    rng: &mut Lcg,
    states: &StateSet,
    n_atoms: usize,
    denominator_bound: u64,
) -> Result<Vec<SProbability>> {
    check_bound(denominator_bound)?;
    if n_atoms < 2 || n_atoms > states.len() {
        return Err(Error::HypothesisViolated(format!(
            "{n_atoms} varying atoms need between 2 and {} states",
            states.len()
        )));
    }
    let d = rng.range(2, denominator_bound);
    let dominant = random_dominants(rng, states.len(), n_atoms);
    Ok(atoms_from_dominants(rng, states, n_atoms, d, &dominant))
}

/// Boolean algebra with between 2 and `|S|` random atoms.
pub fn random_boolean(rng: &mut Lcg, states: &StateSet, denominator_bound: u64) -> Result<EventSet> {
    let n = rng.range(2, states.len().max(2) as u64) as usize;
    boolean_from_atoms(&random_atoms(rng, states, n, denominator_bound)?)
}

/// An S-probability with arbitrary values.
pub fn random_event(rng: &mut Lcg, states: &StateSet, denominator_bound: u64) -> SProbability {
    let d = rng.range(2, denominator_bound.max(2));
    let numerators: Vec<u64> = (0..states.len()).map(|_| rng.range(0, d)).collect();
    event(states, &numerators, d)
}

/// MOn built from `n_pairs` random varying events by rejection; `None`
/// when no attempt succeeds.
pub fn random_mo_n(
    rng: &mut Lcg,
    states: &StateSet,
    n_pairs: usize,
    denominator_bound: u64,
    attempts: usize,
) -> Option<EventSet> {
    'attempt: for _ in 0..attempts {
        let mut pairs: Vec<(SProbability, SProbability)> = Vec::with_capacity(n_pairs);
        for _ in 0..n_pairs {
            let p = random_event(rng, states, denominator_bound);
            if !p.is_varying() {
                continue 'attempt;
            }
            let pc = p.complement();
            pairs.push((p, pc));
        }
        if let Ok(set) = mo_n(&pairs) {
            return Some(set);
        }
    }
    None
}

/// An MO2 `{0, p1, p1', p2, p2', 1}` with a candidate `q` meeting the
/// hypotheses of the MO2 completion: `p1 = c0 + c1`, `p2 = c0 + c2`, `q = c0`
/// for random atoms `c0..c3`. Needs at least four states.
#[derive(Debug, Clone)]
pub struct Mo2Instance {
    pub algebra: EventSet,
    pub p1: SProbability,
    pub p2: SProbability,
    pub q: SProbability,
}

pub fn random_mo2_instance(
    rng: &mut Lcg,
    states: &StateSet,
    denominator_bound: u64,
) -> Result<Mo2Instance> {
    let c = random_atoms(rng, states, 4, denominator_bound)?;
    let p1 = c[0].ortho_sum(&c[1])?;
    let p2 = c[0].ortho_sum(&c[2])?;
    let algebra = mo_n(&[(p1.clone(), p1.complement()), (p2.clone(), p2.complement())])?;
    Ok(Mo2Instance {
        algebra,
        p1,
        p2,
        q: c[0].clone(),
    })
}

/// A Boolean algebra, one of its atoms `p1` and a varying `q < p1` with
/// `p1 − q` varying. Needs at least three states.
#[derive(Debug, Clone)]
pub struct SplitInstance {
    pub algebra: EventSet,
    pub atoms: Vec<SProbability>,
    pub p1: SProbability,
    pub q: SProbability,
}

pub fn random_split_instance(
    rng: &mut Lcg,
    states: &StateSet,
    denominator_bound: u64,
) -> Result<SplitInstance> {
    check_bound(denominator_bound)?;
    let n_states = states.len();
    if n_states < 3 {
        return Err(Error::HypothesisViolated("atom splitting needs at least 3 states".into()));
    }
    let n_atoms = rng.range(2, n_states as u64 - 1) as usize;
    let mut dominant = random_dominants(rng, n_states, n_atoms);
    // Atom 0 must dominate two states: one for q, one for p1 − q.
    let owned: Vec<usize> = (0..n_states).filter(|&s| dominant[s] == Some(0)).collect();
    let (s_q, s_rest) = if owned.len() >= 2 {
        (owned[0], owned[1])
    } else {
        let free = (0..n_states)
            .find(|&s| dominant[s].is_none_or(|i| i != 0 && (0..n_states).filter(|&t| dominant[t] == Some(i)).count() > 1))
            .expect("more states than atoms");
        dominant[free] = Some(0);
        (owned[0].min(free), owned[0].max(free))
    };
    let d = rng.range(2, denominator_bound);
    let atoms = atoms_from_dominants(rng, states, n_atoms, d, &dominant);
    let p1 = atoms[0].clone();

    let p1_num: Vec<u64> = p1
        .values()
        .iter()
        .map(|v| (v * rational(d as i64, 1)).to_integer().try_into().expect("small"))
        .collect();
    let numerators: Vec<u64> = (0..n_states)
        .map(|s| {
            if s == s_q {
                rng.range(d / 2 + 1, p1_num[s])
            } else if s == s_rest {
                // Keep p1 − q above 1/2 here.
                rng.range(0, p1_num[s] - (d / 2 + 1))
            } else {
                rng.range(0, p1_num[s])
            }
        })
        .collect();
    let q = event(states, &numerators, d);
    let algebra = boolean_from_atoms(&atoms)?;
    Ok(SplitInstance {
        algebra,
        atoms,
        p1,
        q,
    })
}

/// Mixture used for property checks: Boolean algebras, MOn and
/// 0,1-extensions, over `2..=max_states` states.
pub fn random_algebra(rng: &mut Lcg, max_states: usize, denominator_bound: u64) -> Result<EventSet> {
    let n_states = rng.range(2, max_states.max(2) as u64) as usize;
    let states = StateSet::numbered(n_states)?;
    match rng.below(3) {
        0 => random_boolean(rng, &states, denominator_bound),
        1 => {
            let n_pairs = rng.range(2, 3) as usize;
            match random_mo_n(rng, &states, n_pairs, denominator_bound, 200) {
                Some(set) => Ok(set),
                None => random_boolean(rng, &states, denominator_bound),
            }
        }
        _ => {
            if n_states < 3 {
                return random_boolean(rng, &states, denominator_bound);
            }
            let base_states = StateSet::numbered(n_states - 1)?;
            let base = if rng.coin() {
                random_boolean(rng, &base_states, denominator_bound)?
            } else {
                random_mo_n(rng, &base_states, 2, denominator_bound, 200)
                    .map_or_else(|| random_boolean(rng, &base_states, denominator_bound), Ok)?
            };
            let label = format!("s{n_states}");
            Ok(zero_one_extension(&base, &label)?.0)
        }
    }
}

/// A perturbation of `set`: a dropped element, an extra random event, or a
/// missing `0`. The result may or may not still be an algebra.
pub fn random_perturbation(rng: &mut Lcg, set: &EventSet, denominator_bound: u64) -> Result<EventSet> {
    let states = set.states().clone();
    let mut events: Vec<SProbability> = set.iter().cloned().collect();
    match rng.below(3) {
        0 => {
            let middle: Vec<usize> = (0..events.len())
                .filter(|&i| !events[i].is_constant_bound())
                .collect();
            if !middle.is_empty() {
                events.remove(middle[rng.below(middle.len() as u64) as usize]);
            }
            EventSet::from_exact(states, events)
        }
        1 => {
            events.push(random_event(rng, &states, denominator_bound));
            EventSet::from_exact(states, events)
        }
        _ => {
            events.retain(|e| !e.is_zero());
            EventSet::from_exact(states, events)
        }
    }
}
