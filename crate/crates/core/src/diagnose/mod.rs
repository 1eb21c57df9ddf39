//! User-facing diagnostics: messages, counterexample excerpts, fix hints,
//! info notes, lints and inconsistency warnings.

mod hints;
mod notes;

use std::fmt::Write;

use serde::Serialize;

pub use hints::{hint_and_then, hint_function_contract, hint_loop_invariant, tracked_variables};
pub use notes::{flow_diagnostics, info_notes, lint_suspicious_quantifier, warn_inconsistencies};

use crate::interp::{Bindings, ReplayVerdict};
use crate::solver::Model;
use crate::syntax::{highlight_span, render_snippet, SourceMap, SourceSpan};
use crate::vcgen::{CheckObligation, Leaf, SymRole, Vc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Medium,
    Warning,
    Info,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Medium => "medium",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HintKind {
    FunctionContract,
    LoopInvariant,
    AndThen,
    SuspiciousQuantifier,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixHint {
    pub kind: HintKind,
    /// First line follows "possible fix: "; later lines are indented.
    pub lines: Vec<String>,
    /// Spans shown with a caret snippet below the hint.
    pub spans: Vec<SourceSpan>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub span: SourceSpan,
    pub bindings: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    /// Subprogram inputs, including string bounds.
    pub bindings: Vec<(String, String)>,
    pub trace: Vec<TracePoint>,
    /// Values of the symbols occurring in the failed sub-goal.
    pub excerpt: Vec<(String, String)>,
    pub replay: Option<ReplayVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: SourceSpan,
    /// Check kind name, or `flow`, `info`, `lint`, `proof_warning`.
    pub kind: String,
    pub check_id: Option<String>,
    pub message: String,
    /// Extra lines aligned under the message text.
    pub continuation: Vec<String>,
    /// Extra lines indented by two spaces, after the snippet.
    pub notes: Vec<String>,
    /// Span highlighted under the main line, if any.
    pub snippet: Option<SourceSpan>,
    pub counterexample: Option<Counterexample>,
    pub reason: Option<String>,
    pub fixes: Vec<FixHint>,
    /// Tie-breaker among diagnostics at the same place.
    #[serde(skip)]
    pub ordinal: usize,
}

impl Diagnostic {
    pub fn new(severity: Severity, span: SourceSpan, kind: &str, message: String) -> Diagnostic {
        Diagnostic {
            severity,
            span,
            kind: kind.to_string(),
            check_id: None,
            message,
            continuation: Vec::new(),
            notes: Vec::new(),
            snippet: None,
            counterexample: None,
            reason: None,
            fixes: Vec::new(),
            ordinal: 0,
        }
    }

    fn sort_key(&self) -> (&str, u32, u32, &str, usize) {
        (&self.span.file, self.span.line, self.span.column, &self.kind, self.ordinal)
    }
}

/// Orders diagnostics by file, line, column, kind and ordinal.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

#[derive(Clone, Debug, Default)]
pub struct RenderOptions {
    pub counterexamples: bool,
    pub trace: bool,
}

/// Everything known about one unproved obligation.
pub struct Unproved<'a> {
    pub obligation: &'a CheckObligation,
    /// Whole property text, for property checks.
    pub property: Option<&'a str>,
    /// First sub-goal that was not proved.
    pub leaf: &'a Leaf,
    pub model: Option<&'a Model>,
    pub inputs: Option<&'a Bindings>,
    pub replay: Option<ReplayVerdict>,
    pub hints: Vec<FixHint>,
}

/// Builds the diagnostic for an unproved check.
pub fn render(u: Unproved<'_>, sources: &SourceMap, options: &RenderOptions) -> Diagnostic {
    let o = u.obligation;
    let mut message = o.kind.message(o.variable.as_deref());
    let leaf_text = u.leaf.text.as_deref();
    let has_contract_hint = u.hints.iter().any(|h| h.kind == HintKind::FunctionContract);
    if !o.kind.is_runtime() {
        if let Some(text) = leaf_text {
            if has_contract_hint || Some(text) != u.property {
                let _ = write!(message, ", cannot prove {text}");
            }
        }
    }
    let mut d = Diagnostic::new(Severity::Medium, o.span.clone(), o.kind.name(), message);
    d.check_id = Some(o.id.clone());
    d.snippet = Some(highlight_span(sources, &o.span));
    if o.kind.is_runtime() {
        d.reason = Some(o.kind.reason().to_string());
    }
    if let (true, Some(model)) = (options.counterexamples, u.model) {
        d.counterexample = Some(counterexample(&u.leaf.vc, model, u.inputs, o, u.replay));
    }
    let mut hints = u.hints;
    hints.sort_by_key(|h| h.kind);
    hints.dedup_by_key(|h| h.kind);
    d.fixes = hints;
    d
}

/// Values of the free symbols of the leaf goal: plain variables first,
/// then attributes, each in declaration order.
pub fn excerpt(vc: &Vc, model: &Model) -> Vec<(String, String)> {
    let mut free = std::collections::BTreeSet::new();
    vc.goal.free_syms(&mut free);
    let names = vc.names();
    let mut plain = Vec::new();
    let mut attrs = Vec::new();
    for s in &vc.symbols {
        if !free.contains(&s.id) || s.role == SymRole::Fresh || s.def.is_some() {
            continue;
        }
        let Some(value) = model.render(vc, &s.id) else {
            continue;
        };
        let name = names.get(&s.id).cloned().unwrap_or_else(|| s.base.clone());
        if s.role == SymRole::Bound {
            attrs.push((name, value));
        } else {
            plain.push((name, value));
        }
    }
    plain.extend(attrs);
    plain
}

fn counterexample(
    vc: &Vc,
    model: &Model,
    inputs: Option<&Bindings>,
    o: &CheckObligation,
    replay: Option<ReplayVerdict>,
) -> Counterexample {
    let excerpt = excerpt(vc, model);
    let mut bindings = Vec::new();
    for (name, v) in inputs.into_iter().flatten() {
        bindings.push((name.clone(), v.to_string()));
        if let crate::interp::Value::Str(s) = v {
            bindings.push((format!("{name}'First"), s.first.to_string()));
            bindings.push((format!("{name}'Last"), s.last.to_string()));
        }
    }
    let mut trace = Vec::new();
    if !bindings.is_empty() {
        let entry = vc
            .hypotheses
            .iter()
            .find_map(|h| h.span.clone())
            .unwrap_or_else(|| o.span.clone());
        trace.push(TracePoint {
            span: entry,
            bindings: bindings.clone(),
        });
    }
    trace.push(TracePoint {
        span: o.span.clone(),
        bindings: excerpt.clone(),
    });
    Counterexample {
        bindings,
        trace,
        excerpt,
        replay,
    }
}

fn snippet_lines(out: &mut String, sources: &SourceMap, span: &SourceSpan) {
    let Some(line) = sources.line_text(span) else {
        return;
    };
    let tag = (span.length <= 1).then_some("here");
    for l in render_snippet(span, line, tag) {
        let _ = writeln!(out, "{l}");
    }
}

/// Text rendering in the fixed order: main line, snippet, counterexample,
/// reason, fixes.
pub fn render_text(d: &Diagnostic, sources: &SourceMap, options: &RenderOptions) -> String {
    let mut out = String::new();
    let head = format!("{}: {}: ", d.span.location(), d.severity.as_str());
    let _ = writeln!(out, "{head}{}", d.message);
    let pad = " ".repeat(head.chars().count());
    for c in &d.continuation {
        let _ = writeln!(out, "{pad}{c}");
    }
    if let Some(s) = &d.snippet {
        snippet_lines(&mut out, sources, s);
    }
    for n in &d.notes {
        let _ = writeln!(out, "  {n}");
    }
    if let Some(cex) = &d.counterexample {
        for (i, (name, value)) in cex.excerpt.iter().enumerate() {
            let lead = if i == 0 { "  e.g. when " } else { "        and " };
            let _ = writeln!(out, "{lead}{name} = {value}");
        }
        if options.trace {
            for p in &cex.trace {
                let vals: Vec<String> = p.bindings.iter().map(|(n, v)| format!("{n} = {v}")).collect();
                let _ = writeln!(out, "  trace at {}: {}", p.span.location(), vals.join(", "));
            }
        }
    }
    if let Some(r) = &d.reason {
        let _ = writeln!(out, "  reason for check: {r}");
    }
    for f in &d.fixes {
        for (i, l) in f.lines.iter().enumerate() {
            let lead = if i == 0 { "  possible fix: " } else { "  " };
            let _ = writeln!(out, "{lead}{l}");
        }
        for s in &f.spans {
            snippet_lines(&mut out, sources, s);
        }
    }
    out
}

#[derive(Serialize)]
struct JsonDiagnostic<'a> {
    severity: Severity,
    file: &'a str,
    line: u32,
    column: u32,
    kind: &'a str,
    message: String,
    reason: Option<&'a str>,
    fix: Vec<String>,
    counterexample: Option<JsonCex<'a>>,
    check_id: Option<&'a str>,
}

#[derive(Serialize)]
struct JsonCex<'a> {
    bindings: &'a [(String, String)],
    excerpt: &'a [(String, String)],
    trace: &'a [TracePoint],
    replay: Option<ReplayVerdict>,
}

/// One JSON object per diagnostic.
pub fn to_json(d: &Diagnostic) -> serde_json::Value {
    let mut message = d.message.clone();
    for c in &d.continuation {
        message.push(' ');
        message.push_str(c);
    }
    for n in &d.notes {
        message.push('\n');
        message.push_str(n);
    }
    let j = JsonDiagnostic {
        severity: d.severity,
        file: &d.span.file,
        line: d.span.line,
        column: d.span.column,
        kind: &d.kind,
        message,
        reason: d.reason.as_deref(),
        fix: d.fixes.iter().map(|f| f.lines.join(" ")).collect(),
        counterexample: d.counterexample.as_ref().map(|c| JsonCex {
            bindings: &c.bindings,
            excerpt: &c.excerpt,
            trace: &c.trace,
            replay: c.replay,
        }),
        check_id: d.check_id.as_deref(),
    };
    serde_json::to_value(j).expect("diagnostics serialize")
}

#[cfg(test)]
mod tests;
