//! Diagnostics that do not come from a failed check: flow findings, info
//! notes, lints and inconsistency warnings.

use std::collections::BTreeMap;

use super::{Diagnostic, Severity};
use crate::flow::Finding;
use crate::sema::{CallGraph, FunctionClass, LoopShape, ResolvedUnit};
use crate::solver::{check_consistency, Consistency, DomainBounds};
use crate::syntax::{pretty, Body, Expr, ExprKind, Quantifier, SourceSpan, Subprogram};
use crate::vcgen::{LoopDecision, SubprogramVcs};

pub fn flow_diagnostics(findings: &[Finding]) -> Vec<Diagnostic> {
    findings
        .iter()
        .map(|f| Diagnostic::new(Severity::Medium, f.span.clone(), "flow", f.message()))
        .collect()
}

/// First call in the body of `sp` to a subprogram of its own call cycle.
fn recursive_call<'a>(sp: &'a Subprogram, graph: &CallGraph) -> Option<&'a SourceSpan> {
    let Body::Expr(body) = &sp.body else {
        return None;
    };
    let mut found = None;
    body.walk(&mut |e| {
        if let (None, ExprKind::Call(f, _)) = (found, &e.kind) {
            if graph.same_cycle(&sp.name.name, &f.name) {
                found = Some(&f.span);
            }
        }
    });
    found
}

/// Notes about proof decisions: loops that could not be unrolled and
/// expression functions whose body cannot be used.
pub fn info_notes(
    unit: &ResolvedUnit,
    graph: &CallGraph,
    loops: &[(LoopShape, LoopDecision)],
    classes: &BTreeMap<String, FunctionClass>,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (shape, decision) in loops {
        if let LoopDecision::CannotUnroll(reason) = decision {
            out.push(Diagnostic::new(
                Severity::Info,
                shape.loop_span.clone(),
                "info",
                format!("cannot unroll loop ({reason})"),
            ));
        }
    }
    for sp in unit.unit.subprograms() {
        let Some(class) = classes.get(&sp.name.key()) else {
            continue;
        };
        let Some(reason) = &class.unavailability_reason else {
            continue;
        };
        let span = recursive_call(sp, graph).unwrap_or(&sp.name.span);
        let mut d = Diagnostic::new(
            Severity::Info,
            span.clone(),
            "info",
            "expression function body not available for proof".into(),
        );
        d.continuation.push(format!("({reason})"));
        out.push(d);
    }
    out
}

fn suspicious(e: &Expr) -> Option<Diagnostic> {
    let ExprKind::Quantified {
        quantifier: Quantifier::Some,
        var,
        body,
        ..
    } = &e.kind
    else {
        return None;
    };
    let ExprKind::If {
        cond,
        then,
        elsifs,
        otherwise,
    } = &body.unparen().kind
    else {
        return None;
    };
    let trivial_else = match otherwise {
        None => true,
        Some(o) => matches!(o.unparen().kind, ExprKind::Bool(true)),
    };
    if !elsifs.is_empty() || !trivial_else {
        return None;
    }
    let (x, p, q) = (&var.name, pretty(cond), pretty(then));
    let mut d = Diagnostic::new(Severity::Warning, e.span.clone(), "lint", "suspicious expression".into());
    d.notes.push(format!("did you mean (for all {x} => (if {p} then {q}))"));
    d.notes.push(format!("or (for some {x} => {p} and then {q}) instead?"));
    Some(d)
}

/// Existential quantifications over an if-expression without else, which
/// hold as soon as the condition is false somewhere.
pub fn lint_suspicious_quantifier(unit: &ResolvedUnit) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for sp in unit.unit.subprograms() {
        sp.walk_exprs(&mut |e| out.extend(suspicious(e)));
    }
    out
}

/// Contexts (body entry, branch entries) whose hypotheses have no model
/// within the bounds. Nested contexts of a dead context are not reported.
pub fn warn_inconsistencies(vcs: &SubprogramVcs, bounds: &DomainBounds) -> Vec<Diagnostic> {
    let mut dead: BTreeMap<(&str, usize), bool> = BTreeMap::new();
    let mut order = Vec::new();
    for c in &vcs.contexts {
        let key = (&*c.span.file, c.span.offset);
        let unsat = matches!(check_consistency(&c.vc, bounds), Ok(Consistency::NoModelWithinBounds));
        match dead.get_mut(&key) {
            Some(d) => *d &= unsat,
            None => {
                dead.insert(key, unsat);
                order.push(c);
            }
        }
    }
    let mut out = Vec::new();
    for c in order {
        if !dead[&(&*c.span.file, c.span.offset)] {
            continue;
        }
        let parent_dead = c
            .parent
            .as_ref()
            .is_some_and(|p| dead.get(&(&*p.file, p.offset)).copied().unwrap_or(false));
        if parent_dead {
            continue;
        }
        let mut d = Diagnostic::new(
            Severity::Warning,
            c.span.clone(),
            "proof_warning",
            "context is unsatisfiable (dead code or contradictory contract?)".into(),
        );
        d.snippet = Some(c.span.point());
        out.push(d);
    }
    out
}
