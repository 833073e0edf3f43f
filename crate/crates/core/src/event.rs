//! Exact scalars, state sets and S-probabilities.
//!
//! An [`SProbability`] maps every state of a finite, ordered [`StateSet`] to
//! an exact rational in `[0,1]`. All predicates here are pointwise.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// The scalar used everywhere. Always normalised (lowest terms, positive
/// denominator).
pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn half() -> Rational {
    rational(1, 2)
}

/// Parses `"3/4"`, `"1"` or a finite decimal such as `"0.25"` into an exact
/// rational. Signs are accepted; range checks belong to the caller.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::InvalidRational(text.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = parse_integer(n).ok_or_else(bad)?;
        let d: BigInt = parse_integer(d).ok_or_else(bad)?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        let (neg, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        if frac_part.is_empty()
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
            || !int_digits.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let digits = format!("{int_digits}{frac_part}");
        let numer: BigInt = digits.parse().map_err(|_| bad())?;
        let denom = num_traits::pow(BigInt::from(10), frac_part.len());
        let value = Rational::new(numer, denom);
        return Ok(if neg { -value } else { value });
    }
    parse_integer(t).map(Rational::from_integer).ok_or_else(bad)
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub(crate) fn serialize_rational<S: Serializer>(
    value: &Rational,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    serializer.collect_str(value)
}

pub(crate) fn serialize_rationals<S: Serializer>(
    values: &[Rational],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    serializer.collect_seq(values.iter().map(|v| v.to_string()))
}

/// Ordered, duplicate-free list of state labels. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateSet(Arc<[String]>);

impl StateSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyStateSet);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateStateLabel(l.clone()));
            }
        }
        Ok(StateSet(labels.into()))
    }

    /// `s1, s2, ..., sn`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| format!("s{i}")))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn label(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }

    /// Copy of this state set with `label` inserted at `index`.
    pub fn with_state_at(&self, index: usize, label: &str) -> Result<Self> {
        if self.index_of(label).is_some() {
            return Err(Error::DuplicateStateLabel(label.to_string()));
        }
        let mut labels = self.0.to_vec();
        labels.insert(index, label.to_string());
        Ok(StateSet(labels.into()))
    }

    /// Copy of this state set without the state at `index`.
    pub fn without_state(&self, index: usize) -> Result<Self> {
        let mut labels = self.0.to_vec();
        labels.remove(index);
        Self::new(labels)
    }

    fn same(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Serialize for StateSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

/// Relation between two proper S-probabilities with respect to `1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReciprocityClass {
    /// Pointwise minimum is at most 1/2 everywhere, maximum is not always at least 1/2.
    Below,
    /// Pointwise maximum is at least 1/2 everywhere, minimum is not always at most 1/2.
    Above,
    /// Both of the above.
    Both,
    Neither,
}

impl ReciprocityClass {
    pub fn is_below(self) -> bool {
        matches!(self, Self::Below | Self::Both)
    }

    pub fn is_above(self) -> bool {
        matches!(self, Self::Above | Self::Both)
    }
}

/// A numerical event: one probability per state.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SProbability {
    states: StateSet,
    values: Vec<Rational>,
}

impl SProbability {
    pub fn new(states: StateSet, values: Vec<Rational>) -> Result<Self> {
        if values.len() != states.len() {
            return Err(Error::LengthMismatch {
                expected: states.len(),
                actual: values.len(),
            });
        }
        let one = Rational::one();
        for (i, v) in values.iter().enumerate() {
            if v.is_negative() || *v > one {
                return Err(Error::ValueOutOfRange {
                    state: states.label(i).to_string(),
                    value: v.to_string(),
                });
            }
        }
        Ok(SProbability { states, values })
    }

    /// Builds an event from rational literals, e.g. `&["1/4", "0", "0", "1"]`.
    pub fn parse(states: &StateSet, literals: &[&str]) -> Result<Self> {
        let values = literals
            .iter()
            .map(|l| parse_rational(l))
            .collect::<Result<Vec<_>>>()?;
        Self::new(states.clone(), values)
    }

    pub fn constant(states: &StateSet, value: Rational) -> Result<Self> {
        Self::new(states.clone(), vec![value; states.len()])
    }

    pub fn zero(states: &StateSet) -> Self {
        SProbability {
            states: states.clone(),
            values: vec![Rational::zero(); states.len()],
        }
    }

    pub fn one(states: &StateSet) -> Self {
        SProbability {
            states: states.clone(),
            values: vec![Rational::one(); states.len()],
        }
    }

    pub(crate) fn from_raw_unchecked(states: StateSet, values: Vec<Rational>) -> Self {
        debug_assert_eq!(states.len(), values.len());
        SProbability { states, values }
    }

    pub fn states(&self) -> &StateSet {
        &self.states
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, index: usize) -> &Rational {
        &self.values[index]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.values.iter().all(One::is_one)
    }

    pub fn is_constant_bound(&self) -> bool {
        self.is_zero() || self.is_one()
    }

    /// Every value is 0 or 1.
    pub fn is_two_valued(&self) -> bool {
        self.values.iter().all(|v| v.is_zero() || v.is_one())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.states.same(&other.states) {
            Ok(())
        } else {
            Err(Error::StateSetMismatch)
        }
    }

    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.le_unchecked(other))
    }

    pub(crate) fn le_unchecked(&self, other: &Self) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    pub(crate) fn lt_unchecked(&self, other: &Self) -> bool {
        self != other && self.le_unchecked(other)
    }

    pub fn complement(&self) -> Self {
        let one = Rational::one();
        SProbability {
            states: self.states.clone(),
            values: self.values.iter().map(|v| &one - v).collect(),
        }
    }

    /// `self ⊥ other`, i.e. `self ≤ 1 − other` pointwise.
    pub fn orthogonal(&self, other: &Self) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.perp_unchecked(other))
    }

    pub(crate) fn perp_unchecked(&self, other: &Self) -> bool {
        let one = Rational::one();
        self.values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| a + b <= one)
    }

    /// Pointwise sum of two orthogonal events.
    pub fn ortho_sum(&self, other: &Self) -> Result<Self> {
        if !self.orthogonal(other)? {
            return Err(Error::NotOrthogonal(self.to_string(), other.to_string()));
        }
        Ok(SProbability {
            states: self.states.clone(),
            values: raw_sum(&self.values, &other.values),
        })
    }

    /// `self − lower`, defined when `lower ≤ self`.
    pub fn difference(&self, lower: &Self) -> Result<Self> {
        if !lower.leq(self)? {
            return Err(Error::NotComparable(lower.to_string(), self.to_string()));
        }
        Ok(SProbability {
            states: self.states.clone(),
            values: raw_difference(&self.values, &lower.values),
        })
    }

    /// Some value exceeds 1/2 and some value is below 1/2.
    pub fn is_varying(&self) -> bool {
        is_varying_raw(&self.values)
    }

    /// Varying, or one of the constants 0 and 1.
    pub fn is_proper(&self) -> bool {
        is_proper_raw(&self.values)
    }

    pub fn reciprocity(&self, other: &Self) -> Result<ReciprocityClass> {
        self.check_same(other)?;
        for p in [self, other] {
            if !p.is_proper() {
                return Err(Error::NotProper(p.to_string()));
            }
        }
        Ok(self.reciprocity_unchecked(other))
    }

    pub(crate) fn reciprocity_unchecked(&self, other: &Self) -> ReciprocityClass {
        let h = half();
        let below = self
            .values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| a.min(b) <= &h);
        let above = self
            .values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| a.max(b) >= &h);
        match (below, above) {
            (true, true) => ReciprocityClass::Both,
            (true, false) => ReciprocityClass::Below,
            (false, true) => ReciprocityClass::Above,
            (false, false) => ReciprocityClass::Neither,
        }
    }

    /// Copy with `value` inserted at state position `index` over `states`.
    pub(crate) fn inserted(&self, states: &StateSet, index: usize, value: Rational) -> Self {
        let mut values = self.values.clone();
        values.insert(index, value);
        SProbability::from_raw_unchecked(states.clone(), values)
    }

    /// Copy with the state at `index` removed.
    pub(crate) fn removed(&self, states: &StateSet, index: usize) -> Self {
        let mut values = self.values.clone();
        values.remove(index);
        SProbability::from_raw_unchecked(states.clone(), values)
    }
}

pub(crate) fn raw_sum(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn raw_difference(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn in_unit_range(values: &[Rational]) -> bool {
    let one = Rational::one();
    values.iter().all(|v| !v.is_negative() && *v <= one)
}

pub(crate) fn is_varying_raw(values: &[Rational]) -> bool {
    let h = half();
    values.iter().any(|v| *v > h) && values.iter().any(|v| *v < h)
}

pub(crate) fn is_proper_raw(values: &[Rational]) -> bool {
    values.iter().all(Zero::is_zero) || values.iter().all(One::is_one) || is_varying_raw(values)
}

pub(crate) fn format_raw(values: &[Rational]) -> String {
    let parts: Vec<String> = values.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

impl Ord for SProbability {
    fn cmp(&self, other: &Self) -> Ordering {
        self.values
            .cmp(&other.values)
            .then_with(|| self.states.cmp(&other.states))
    }
}

impl PartialOrd for SProbability {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_raw(&self.values))
    }
}

impl fmt::Debug for SProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for SProbability {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_rationals(&self.values, serializer)
    }
}
