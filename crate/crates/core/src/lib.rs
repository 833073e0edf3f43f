//! Exact arithmetic on S-probabilities: algebras of numerical events,
//! their order structure, and the question of whether adding one more event
//! keeps an algebra embeddable in a Boolean one.

pub mod algebra;
pub mod certificate;
pub mod classify;
pub mod construct;
pub mod error;
pub mod event;
pub mod lcg;
pub mod par;
pub mod random;
pub mod search;

pub use algebra::{
    atoms, is_boolean, is_concrete, is_lattice, is_orthomodular, poset_join, poset_meet, saturate,
    structure, verify_axioms, AxiomReport, Budget, DerivationOp, DerivationStep, EventSet,
    SaturationOutcome, SaturationResult, StructureReport,
};
pub use certificate::{Certificate, Rule, Witness, WitnessValue};
pub use error::{Error, Result};
pub use event::{half, parse_rational, rational, Rational, ReciprocityClass, SProbability, StateSet};
pub use construct::{
    boolean_from_atoms, complete_mo2, detect_extension, lift_event, mo2_boolean_completion, mo_n,
    split_atom, zero_one_extension, ExtensionMap, Mo2Completion,
};
pub use classify::{classify, replay, ClassifyConfig, Direction, Verdict, VerdictKind};
pub use lcg::Lcg;
pub use search::{
    boolean_embedding_concrete, enumerate_boolean_subalgebras, mo2_interpolation_scan,
    refute_by_saturation, two_valued_interpolations, Interpolation, OracleOutcome, OracleResult,
    ScanReport,
};
