use thiserror::Error;

/// Errors raised by the event, algebra, construction, classification and
/// search layers. Variants carry enough context to be shown to a user.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("state set is empty")]
    EmptyStateSet,
    #[error("duplicate state label `{0}`")]
    DuplicateStateLabel(String),
    #[error("events are defined over different state sets")]
    StateSetMismatch,
    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("value {value} at state `{state}` lies outside [0,1]")]
    ValueOutOfRange { state: String, value: String },
    #[error("invalid rational literal `{0}`")]
    InvalidRational(String),

    #[error("{0} and {1} are not orthogonal")]
    NotOrthogonal(String, String),
    #[error("{0} is not below {1}")]
    NotComparable(String, String),
    #[error("{0} is not proper")]
    NotProper(String),
    #[error("{0} is not varying")]
    NotVarying(String),

    #[error("{0} is not an element of the event set")]
    ElementNotInSet(String),
    #[error("{0} already belongs to the event set")]
    EventInSet(String),
    #[error("event set is not an algebra of S-probabilities")]
    NotAnAlgebra,
    #[error("event set is not a Boolean algebra")]
    NotBoolean,
    #[error("event set is a Boolean algebra; the rule needs a non-Boolean one")]
    BooleanInput,

    #[error("atom {0} is not varying")]
    AtomsNotVarying(String),
    #[error("atoms {0} and {1} are not orthogonal")]
    AtomsNotOrthogonal(String, String),
    #[error("atoms do not sum to 1 (sum is {0})")]
    AtomsDontSumToOne(String),
    #[error("{count} atoms exceed the cap of {cap}")]
    AtomCountTooLarge { count: usize, cap: usize },
    #[error("{0} is not an atom of the algebra")]
    NotAnAtom(String),
    #[error("{0} is not strictly below the atom {1}")]
    NotBelowAtom(String, String),
    #[error("difference {0} is not proper")]
    DifferenceNotProper(String),
    #[error("{0} and {1} are not complements of each other")]
    NotComplementaryPair(String, String),
    #[error("{0} and {1} are comparable")]
    ComparableElements(String, String),
    #[error("axiom (c) fails for the constructed set: {0}")]
    AxiomCViolated(String),
    #[error("event set is not an MO2 algebra")]
    NotMO2,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("not a 0,1-extension: {0}")]
    NotExtension(String),

    #[error("state set of size {size} exceeds the cap of {cap}")]
    StateSetTooLarge { size: usize, cap: usize },
    #[error("unsupported size {0}")]
    UnsupportedSize(usize),
    #[error("budget must be positive")]
    InvalidBudget,

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case identifier of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyStateSet => "empty_state_set",
            Error::DuplicateStateLabel(_) => "duplicate_state_label",
            Error::StateSetMismatch => "state_set_mismatch",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::ValueOutOfRange { .. } => "value_out_of_range",
            Error::InvalidRational(_) => "invalid_rational",
            Error::NotOrthogonal(..) => "not_orthogonal",
            Error::NotComparable(..) => "not_comparable",
            Error::NotProper(_) => "not_proper",
            Error::NotVarying(_) => "not_varying",
            Error::ElementNotInSet(_) => "element_not_in_set",
            Error::EventInSet(_) => "event_in_set",
            Error::NotAnAlgebra => "not_an_algebra",
            Error::NotBoolean => "not_boolean",
            Error::BooleanInput => "boolean_input",
            Error::AtomsNotVarying(_) => "atoms_not_varying",
            Error::AtomsNotOrthogonal(..) => "atoms_not_orthogonal",
            Error::AtomsDontSumToOne(_) => "atoms_dont_sum_to_one",
            Error::AtomCountTooLarge { .. } => "atom_count_too_large",
            Error::NotAnAtom(_) => "not_an_atom",
            Error::NotBelowAtom(..) => "not_below_atom",
            Error::DifferenceNotProper(_) => "difference_not_proper",
            Error::NotComplementaryPair(..) => "not_complementary_pair",
            Error::ComparableElements(..) => "comparable_elements",
            Error::AxiomCViolated(_) => "axiom_c_violated",
            Error::NotMO2 => "not_mo2",
            Error::HypothesisViolated(_) => "hypothesis_violated",
            Error::NotExtension(_) => "not_extension",
            Error::StateSetTooLarge { .. } => "state_set_too_large",
            Error::UnsupportedSize(_) => "unsupported_size",
            Error::InvalidBudget => "invalid_budget",
            Error::Inconsistent(_) => "inconsistent",
        }
    }

    /// Malformed input as opposed to a violated precondition.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::EmptyStateSet
                | Error::DuplicateStateLabel(_)
                | Error::LengthMismatch { .. }
                | Error::ValueOutOfRange { .. }
                | Error::InvalidRational(_)
        )
    }
}
