use numev::construct::{complete_mo2, lift_event};
use numev::search::boolean_embedding_concrete_capped;
use numev::{
    boolean_from_atoms, classify, mo2_interpolation_scan, mo_n, parse_rational, saturate,
    split_atom, structure, verify_axioms, zero_one_extension, Budget, Certificate, ClassifyConfig,
    EventSet, SProbability, SaturationOutcome, VerdictKind,
};
use serde_json::{json, Value};
use thiserror::Error;

use crate::problem::{ProblemError, ProblemFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;
pub const EXIT_PARSE: i32 = 5;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Core(#[from] numev::Error),
    #[error("{0}")]
    Precondition(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("environment variable {name}: {message}")]
    Env { name: String, message: String },
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Problem(_) | CommandError::Io { .. } | CommandError::Env { .. } => EXIT_PARSE,
            CommandError::Core(e) if e.is_input_error() => EXIT_PARSE,
            CommandError::Core(numev::Error::Inconsistent(_)) => EXIT_INTERNAL,
            CommandError::Core(_) | CommandError::Precondition(_) => EXIT_PRECONDITION,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CommandError::Problem(e) => e.kind(),
            CommandError::Core(e) => e.kind(),
            CommandError::Precondition(_) => "precondition",
            CommandError::Io { .. } => "io_error",
            CommandError::Env { .. } => "environment",
        }
    }
}

pub type CommandResult = Result<Outcome, CommandError>;

#[derive(Debug, Default)]
pub struct Outcome {
    pub result: Value,
    pub certificates: Vec<Certificate>,
    pub trace: Option<Value>,
    pub exit: i32,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            result,
            ..Outcome::default()
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn candidate(p: &ProblemFile, command: &str) -> Result<SProbability, CommandError> {
    p.candidate_event()
        .cloned()
        .ok_or_else(|| CommandError::Precondition(format!("{command} needs a candidate event")))
}

fn named<'a>(p: &'a ProblemFile, name: &str) -> Result<&'a SProbability, CommandError> {
    p.event(name)
        .ok_or_else(|| CommandError::Precondition(format!("no event named `{name}`")))
}

fn all_with_constants(p: &ProblemFile) -> EventSet {
    EventSet::new(p.states.clone(), p.all_events()).expect("events share the state set")
}

pub fn verify(p: &ProblemFile) -> CommandResult {
    let set = all_with_constants(p);
    let report = verify_axioms(&set);
    Ok(Outcome {
        result: json!({
            "elements": set.len(),
            "axioms": {
                "is_algebra": report.is_algebra(),
                "holds_a": report.holds_a,
                "holds_b": report.holds_b,
                "holds_c": report.holds_c,
                "all_proper": report.all_proper,
                "non_proper": report.non_proper_witnesses,
                "truncated": report.truncated,
                "warnings": report.warnings,
            },
            "structure": structure(&set),
        }),
        certificates: report.violations,
        ..Outcome::default()
    })
}

pub fn classify_cmd(p: &ProblemFile, cfg: &ClassifyConfig) -> CommandResult {
    let q = candidate(p, "classify")?;
    let e = p.base_set();
    let v = classify(&e, &q, cfg)?;
    let exit = if v.kind == VerdictKind::Unknown { EXIT_UNKNOWN } else { EXIT_OK };
    Ok(Outcome {
        result: json!({
            "candidate": p.candidate,
            "q": q,
            "elements": e.len(),
            "verdict": v.kind,
            "direction": v.direction,
            "rule": v.rule(),
            "rules_attempted": v.rules_attempted,
            "notes": v.notes,
        }),
        certificates: v.certificate.into_iter().collect(),
        trace: None,
        exit,
    })
}

pub fn closure(p: &ProblemFile, budget: Budget) -> CommandResult {
    let e = p.base_set();
    let extra: Vec<SProbability> = p.candidate_event().cloned().into_iter().collect();
    let r = saturate(&e, &extra, budget)?;
    let exit = if r.outcome == SaturationOutcome::BudgetExceeded { EXIT_UNKNOWN } else { EXIT_OK };
    Ok(Outcome {
        result: json!({
            "outcome": r.outcome,
            "rounds": r.rounds,
            "budget": budget,
            "elements": r.closure.as_ref().map(EventSet::len),
            "closure": r.closure,
            "contradiction": r.contradiction,
        }),
        certificates: Vec::new(),
        trace: Some(to_value(&r.trace)),
        exit,
    })
}

pub fn extend(p: &ProblemFile, state: &str, lift: Option<(&str, &str)>) -> CommandResult {
    let base = all_with_constants(p);
    let (ext, _) = zero_one_extension(&base, state)?;
    let mut result = json!({
        "state": state,
        "elements": ext.len(),
        "extension": ext,
        "structure": structure(&ext),
    });
    if let Some((event, value)) = lift {
        let q = named(p, event)?;
        let c = parse_rational(value)?;
        let lifted = lift_event(q, c, state)?;
        result["lifted"] = json!({
            "event": event,
            "value": lifted,
            "in_extension": ext.contains(&lifted),
        });
    }
    Ok(Outcome::ok(result))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    BooleanFromAtoms,
    Mo,
    SplitAtom,
    CompleteMo2,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::BooleanFromAtoms => "boolean-from-atoms",
            Construction::Mo => "mo",
            Construction::SplitAtom => "split-atom",
            Construction::CompleteMo2 => "complete-mo2",
        }
    }
}

fn algebra_result(kind: Construction, algebra: &EventSet) -> Value {
    json!({
        "construction": kind.name(),
        "elements": algebra.len(),
        "algebra": algebra,
        "structure": structure(algebra),
    })
}

pub fn construct(p: &ProblemFile, kind: Construction, atom: Option<&str>) -> CommandResult {
    let result = match kind {
        Construction::BooleanFromAtoms => algebra_result(kind, &boolean_from_atoms(&p.all_events())?),
        Construction::Mo => {
            // Each listed event with its complement; a listed complement of an
            // earlier event is skipped.
            let mut pairs: Vec<(SProbability, SProbability)> = Vec::new();
            for e in p.all_events() {
                if !pairs.iter().any(|(a, b)| *a == e || *b == e) {
                    let c = e.complement();
                    pairs.push((e, c));
                }
            }
            algebra_result(kind, &mo_n(&pairs)?)
        }
        Construction::SplitAtom => {
            let name = atom.ok_or_else(|| CommandError::Precondition("split-atom needs --atom".into()))?;
            let p1 = named(p, name)?.clone();
            let q = candidate(p, "split-atom")?;
            let mut r = algebra_result(kind, &split_atom(&p.base_set(), &p1, &q)?);
            r["atom"] = json!(p1);
            r["q"] = json!(q);
            r
        }
        Construction::CompleteMo2 => {
            let q = candidate(p, "complete-mo2")?;
            let c = complete_mo2(&p.base_set(), &q)?;
            let mut r = algebra_result(kind, &c.algebra);
            r["p1"] = json!(c.p1);
            r["p2"] = json!(c.p2);
            r["atoms"] = json!(c.atoms);
            r
        }
    };
    Ok(Outcome::ok(result))
}

pub fn oracle(p: &ProblemFile, cap: usize) -> CommandResult {
    let r = boolean_embedding_concrete_capped(&p.all_events(), cap);
    Ok(Outcome::ok(json!({
        "outcome": r.outcome,
        "searched": r.searched,
        "elements": r.witness.as_ref().map(EventSet::len),
        "witness": r.witness,
        "notes": r.notes,
    })))
}

pub fn scan(size: usize, trials: usize, seed: u64, bound: u64) -> CommandResult {
    let r = mo2_interpolation_scan(size, trials, bound, seed)?;
    let exit = if r.counterexamples.is_empty() { EXIT_OK } else { EXIT_INTERNAL };
    Ok(Outcome {
        result: to_value(&r),
        exit,
        ..Outcome::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::parse_problem;

    fn problem(text: &str) -> ProblemFile {
        parse_problem(text).unwrap()
    }

    const MO2: &str = r#"{"states":["s1","s2","s3","s4"],"events":{
        "p1":["1","0","0","1"],"p2":["0","1","0","1"],"p1'":["0","1","1","0"],"p2'":["1","0","1","0"],
        "q":["1","1","0","0"]},"candidate":"q"}"#;

    #[test]
    fn verify_reports_structure() {
        let mut p = problem(MO2);
        p.events.pop();
        p.candidate = None;
        let out = verify(&p).unwrap();
        assert_eq!(out.result["axioms"]["is_algebra"], json!(true));
        assert_eq!(out.result["structure"]["is_boolean"], json!(false));
        assert_eq!(out.result["structure"]["is_concrete"], json!(true));
        assert!(out.certificates.is_empty());
    }

    #[test]
    fn classify_and_oracle_on_mo2() {
        let p = problem(MO2);
        let out = classify_cmd(&p, &ClassifyConfig::default()).unwrap();
        assert_eq!(out.result["verdict"], json!("critical"));
        assert_eq!(out.result["rule"], json!("ORACLE"));
        let out = oracle(&p, 6).unwrap();
        assert_eq!(out.result["outcome"], json!("embedding_found"));
        assert_eq!(out.result["elements"], json!(16));
    }

    #[test]
    fn missing_candidate_is_a_precondition_error() {
        let mut p = problem(MO2);
        p.candidate = None;
        let err = classify_cmd(&p, &ClassifyConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_PRECONDITION);
    }

    #[test]
    fn closure_exceeding_budget_is_unknown() {
        let p = problem(MO2);
        let tight = Budget { max_elements: 7, max_rounds: 32 };
        assert_eq!(closure(&p, tight).unwrap().exit, EXIT_UNKNOWN);
        assert_eq!(closure(&p, Budget::default()).unwrap().exit, EXIT_OK);
    }
}
