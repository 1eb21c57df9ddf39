//! Replaying a solver model through the interpreter.

use serde::Serialize;

use super::{run, Bindings, Cell, Outcome, StrValue, Value, DEFAULT_FUEL};
use crate::sema::{ResolvedUnit, VarKind};
use crate::solver::{Model, SVal};
use crate::syntax::{Mode, Ty};
use crate::vcgen::{CheckObligation, SymRole, Vc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayVerdict {
    /// The same check fails at the same place on the model's inputs.
    Confirmed,
    /// The run does not reproduce the failure although no abstraction lies
    /// on the path.
    Spurious,
    /// The path crosses a loop cut or a call abstraction, so the model need
    /// not describe a real execution.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Replay {
    pub verdict: ReplayVerdict,
    pub inputs: Bindings,
    pub outcome: Outcome,
}

/// Entry value of each parameter of the obligation's subprogram. Entry
/// versions are the first versions of parameter symbols; parameters absent
/// from the VC get the smallest in-range value.
pub fn model_inputs(unit: &ResolvedUnit, subprogram: &str, vc: &Vc, model: &Model) -> Bindings {
    let entry = |ident: &str, role: SymRole| {
        vc.symbols
            .iter()
            .find(|s| s.ident == ident && s.role == role && s.version == 1)
            .and_then(|s| model.get(&s.id).cloned())
    };
    let mut out = Bindings::new();
    for v in unit.symbols.variables_of(subprogram) {
        let VarKind::Param(mode) = v.kind else {
            continue;
        };
        let key = v.name.to_lowercase();
        let value = match &v.ty {
            Ty::Str => {
                let first = entry(&format!("{key}'first"), SymRole::Bound)
                    .and_then(|x| x.as_int())
                    .unwrap_or(1);
                let last = entry(&format!("{key}'last"), SymRole::Bound)
                    .and_then(|x| x.as_int())
                    .unwrap_or(first - 1);
                let arr = entry(&key, SymRole::Array);
                let cells = (first..=last)
                    .map(|i| match arr.as_ref() {
                        Some(SVal::Arr(a)) => match a.get(i) {
                            SVal::Char(ch) => Cell { ch: *ch, init: true },
                            SVal::Wrap(ch, init) => Cell { ch: *ch, init: *init },
                            _ => Cell { ch: ' ', init: true },
                        },
                        _ => Cell { ch: ' ', init: mode != Mode::Out },
                    })
                    .collect();
                Value::Str(StrValue { first, last, cells })
            }
            ty => {
                let fallback = match ty {
                    Ty::Int(r) => Value::Int(0.clamp(r.lo, r.hi)),
                    Ty::Bool => Value::Bool(false),
                    _ => Value::Char(' '),
                };
                match entry(&key, SymRole::Scalar) {
                    Some(SVal::Int(i)) => Value::Int(i),
                    Some(SVal::Bool(b)) => Value::Bool(b),
                    Some(SVal::Char(c)) => Value::Char(c),
                    _ => fallback,
                }
            }
        };
        out.insert(v.name.clone(), value);
    }
    out
}

/// Runs the model's inputs and compares the outcome with the obligation.
pub fn replay(unit: &ResolvedUnit, obligation: &CheckObligation, vc: &Vc, model: &Model) -> Replay {
    let inputs = model_inputs(unit, &obligation.subprogram, vc, model);
    let outcome = run(unit, &obligation.subprogram, &inputs, DEFAULT_FUEL);
    let reproduced = matches!(outcome.failure(), Some((kind, span)) if kind == obligation.kind && *span == obligation.span);
    let verdict = if reproduced {
        ReplayVerdict::Confirmed
    } else if vc.cut_crossed {
        ReplayVerdict::NotApplicable
    } else {
        ReplayVerdict::Spurious
    };
    Replay {
        verdict,
        inputs,
        outcome,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{check_validity, DomainBounds, SolveResult};
    use crate::testing::Fixture;
    use crate::vcgen::{split_vc, CheckKind};

    fn first_cex(scenario: &str, kind: CheckKind) -> (Fixture, CheckObligation, Vc, Model) {
        let fx = Fixture::scenario(scenario);
        let vcs = fx.vcs("Erase");
        let i = vcs.obligations.iter().position(|o| o.kind == kind).unwrap();
        for cv in vcs.vcs_of(i) {
            for leaf in split_vc(&cv.vc) {
                if let SolveResult::Counterexample(m) = check_validity(&leaf.vc, &DomainBounds::default()).unwrap() {
                    let o = vcs.obligations[i].clone();
                    return (fx, o, leaf.vc, m);
                }
            }
        }
        panic!("no counterexample");
    }

    #[test]
    fn index_counterexample_is_confirmed() {
        let (fx, o, vc, m) = first_cex("s2_index", CheckKind::ArrayIndex);
        let r = replay(&fx.unit, &o, &vc, &m);
        assert_eq!(r.verdict, ReplayVerdict::Confirmed, "{:?}", r.outcome);
        assert_eq!(r.inputs["S"].as_str().first, 2);
    }

    #[test]
    fn frame_counterexample_is_not_applicable() {
        let (fx, o, vc, m) = first_cex("s3_frame", CheckKind::Postcondition);
        assert!(vc.cut_crossed);
        assert_eq!(replay(&fx.unit, &o, &vc, &m).verdict, ReplayVerdict::NotApplicable);
    }
}
