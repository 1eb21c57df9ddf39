//! Possible-fix hints attached to unproved checks.

use std::collections::{BTreeMap, BTreeSet};

use super::{FixHint, HintKind};
use crate::sema::{FunctionClass, FunctionKind, LoopShape, ResolvedUnit};
use crate::solver::{check_validity, DomainBounds, SolveResult};
use crate::syntax::{Body, Expr, ExprKind, SourceSpan, Stmt, StmtKind, Subprogram};
use crate::vcgen::logic::Term;
use crate::vcgen::{Hypothesis, LoopDecision, SymRole, Vc};

/// Source variables (lowercase) the goal mentions, directly or as call
/// arguments. String bounds are left out: no statement can change them.
pub fn tracked_variables(vc: &Vc) -> BTreeSet<String> {
    let mut free = BTreeSet::new();
    vc.goal.free_syms(&mut free);
    vc.symbols
        .iter()
        .filter(|s| free.contains(&s.id) && matches!(s.role, SymRole::Scalar | SymRole::Array))
        .filter(|s| !s.ident.contains('@'))
        .map(|s| s.ident.clone())
        .collect()
}

fn mentioned(e: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    e.walk(&mut |x| {
        if let ExprKind::Name(id) = &x.kind {
            out.insert(id.key());
        }
    });
    out
}

fn contains(outer: &SourceSpan, inner: &SourceSpan) -> bool {
    outer.file == inner.file
        && outer.offset <= inner.offset
        && inner.offset < outer.offset + outer.length as usize
}

struct Walk<'a> {
    loops: &'a BTreeMap<usize, (&'a LoopShape, &'a LoopDecision)>,
    tracked: BTreeSet<String>,
}

impl<'a> Walk<'a> {
    /// The nearest loop before `point` (or before the end when `None`)
    /// that writes a tracked variable without an invariant about it.
    fn stmts(&mut self, stmts: &'a [Stmt], point: Option<&SourceSpan>, in_loop: bool) -> Option<(&'a LoopShape, String)> {
        for s in stmts.iter().rev() {
            if self.tracked.is_empty() {
                return None;
            }
            match point {
                Some(p) if contains(&s.span, p) => {
                    if let Some(hit) = self.nested(s, Some(p), in_loop) {
                        return Some(hit);
                    }
                }
                Some(p) if s.span.file == p.file && s.span.offset > p.offset => {}
                _ => {
                    if let Some(hit) = self.nested(s, None, in_loop) {
                        return Some(hit);
                    }
                    if let StmtKind::Assign { target, .. } = &s.kind {
                        if let (ExprKind::Name(id), false) = (&target.kind, in_loop) {
                            self.tracked.remove(&id.key());
                        }
                    }
                }
            }
        }
        None
    }

    fn nested(&mut self, s: &'a Stmt, point: Option<&SourceSpan>, in_loop: bool) -> Option<(&'a LoopShape, String)> {
        match &s.kind {
            StmtKind::For { body, id, .. } => {
                if point.is_some() {
                    if let Some(hit) = self.stmts(body, point, true) {
                        return Some(hit);
                    }
                }
                if let Some(hit) = self.candidate(*id) {
                    return Some(hit);
                }
                if point.is_none() {
                    return self.stmts(body, None, true);
                }
                None
            }
            StmtKind::If { branches, otherwise } => {
                let saved = self.tracked.clone();
                let mut found = None;
                for body in branches.iter().map(|(_, b)| b).chain(otherwise.iter()) {
                    self.tracked = saved.clone();
                    if let Some(hit) = self.stmts(body, point, in_loop) {
                        found = Some(hit);
                        break;
                    }
                }
                self.tracked = saved;
                found
            }
            _ => None,
        }
    }

    fn candidate(&self, id: usize) -> Option<(&'a LoopShape, String)> {
        let (shape, decision) = self.loops.get(&id)?;
        if matches!(decision, LoopDecision::Unroll(_)) {
            return None;
        }
        let hit: Vec<&String> = shape.write_set.intersection(&self.tracked).collect();
        if hit.is_empty() {
            return None;
        }
        let about: BTreeSet<String> = shape.invariants.iter().flat_map(mentioned).collect();
        if hit.iter().any(|v| about.contains(*v)) {
            return None;
        }
        Some((shape, hit[0].clone()))
    }
}

/// Reverse walk from the check back through the body, looking for a loop
/// abstracted by its (missing) invariant that modifies a variable the goal
/// depends on.
pub fn hint_loop_invariant(
    unit: &ResolvedUnit,
    sp: &Subprogram,
    vc: &Vc,
    check_span: &SourceSpan,
    at_end: bool,
    loops: &[(LoopShape, LoopDecision)],
) -> Option<FixHint> {
    let Body::Stmts { stmts, .. } = &sp.body else {
        return None;
    };
    let index: BTreeMap<usize, (&LoopShape, &LoopDecision)> = loops.iter().map(|(s, d)| (s.id, (s, d))).collect();
    let mut walk = Walk {
        loops: &index,
        tracked: tracked_variables(vc),
    };
    let point = (!at_end).then_some(check_span);
    let (shape, var) = walk.stmts(stmts, point, false)?;
    let name = unit
        .symbols
        .variable(&sp.name.name, &var)
        .map_or(var.clone(), |v| v.name.clone());
    let span = &shape.loop_span;
    Some(FixHint {
        kind: HintKind::LoopInvariant,
        lines: vec![format!(
            "loop at {}:{} should mention {name} in a loop invariant",
            span.file, span.line
        )],
        spans: vec![span.point()],
    })
}

fn called(t: &Term, out: &mut BTreeSet<String>) {
    if let Term::App(f, _) = t {
        out.insert(f.to_string());
    }
    for c in t.children() {
        called(c, out);
    }
}

/// Suggests a contract for a regular function without postcondition whose
/// call appears in the goal.
pub fn hint_function_contract(
    unit: &ResolvedUnit,
    vc: &Vc,
    classes: &BTreeMap<String, FunctionClass>,
) -> Option<FixHint> {
    let mut calls = BTreeSet::new();
    called(&vc.goal, &mut calls);
    for f in calls {
        let Some(class) = classes.get(&f) else {
            continue;
        };
        let Some(info) = unit.symbols.subprogram(&f) else {
            continue;
        };
        if class.kind == FunctionKind::RegularFunction && !info.has_post {
            return Some(FixHint {
                kind: HintKind::FunctionContract,
                lines: vec![
                    format!("you should consider adding a postcondition to function {}", info.name),
                    "or turning it into an expression function".into(),
                ],
                spans: Vec::new(),
            });
        }
    }
    None
}

/// Re-proves a failed check inside a precondition with the left operands
/// of the enclosing `and` assumed; suggests `and then` if that succeeds.
pub fn hint_and_then(vc: &Vc, and_lefts: &[Term], pre_span: &SourceSpan, bounds: &DomainBounds) -> Option<FixHint> {
    if and_lefts.is_empty() {
        return None;
    }
    let mut strengthened = vc.clone();
    strengthened.hypotheses.extend(and_lefts.iter().map(|t| Hypothesis {
        formula: t.clone(),
        span: None,
    }));
    match check_validity(&strengthened, bounds) {
        Ok(SolveResult::Proved) => Some(FixHint {
            kind: HintKind::AndThen,
            lines: vec![format!(
                "use \"and then\" instead of \"and\" in the precondition at {}:{}",
                pre_span.file, pre_span.line
            )],
            spans: Vec::new(),
        }),
        _ => None,
    }
}
