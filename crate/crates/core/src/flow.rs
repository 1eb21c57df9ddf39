//! Definite-initialization analysis by forward dataflow.
//!
//! Arrays are tracked as a single cell, so element-wise initialization never
//! makes a whole string "initialized"; variables under Relaxed_Initialization
//! are left to proof.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::sema::{SymbolTable, VarKind};
use crate::syntax::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Uninitialized,
    Maybe,
    Initialized,
}

impl Init {
    pub fn meet(self, other: Init) -> Init {
        self.min(other)
    }
}

/// Initialization status of the tracked variables at one program point.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct InitState {
    pub vars: BTreeMap<String, Init>,
}

impl InitState {
    pub fn get(&self, key: &str) -> Option<Init> {
        self.vars.get(key).copied()
    }

    fn meet(&self, other: &InitState) -> InitState {
        let mut vars = self.vars.clone();
        for (k, v) in &other.vars {
            let e = vars.entry(k.clone()).or_insert(*v);
            *e = e.meet(*v);
        }
        InitState { vars }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Finding {
    pub span: SourceSpan,
    pub variable: String,
    pub severity: &'static str,
}

impl Finding {
    pub fn message(&self) -> String {
        format!("\"{}\" might not be initialized", self.variable)
    }
}

struct Analyzer<'a> {
    names: BTreeMap<String, String>,
    post: Option<&'a Expr>,
    findings: BTreeSet<Finding>,
    /// Program points visited, for the fixpoint bound.
    steps: usize,
}

/// `None` is the unreachable state after a return.
type Flow = Option<InitState>;

fn join(a: Flow, b: Flow) -> Flow {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.meet(&b)),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Runs the analysis on one resolved subprogram.
pub fn analyze_init(sp: &Subprogram, symbols: &SymbolTable) -> Vec<Finding> {
    analyze_with_stats(sp, symbols).0
}

/// Like [`analyze_init`], also returning the number of statement visits.
pub fn analyze_with_stats(sp: &Subprogram, symbols: &SymbolTable) -> (Vec<Finding>, usize) {
    let Body::Stmts { locals, stmts, .. } = &sp.body else {
        return (Vec::new(), 0);
    };
    let mut state = InitState::default();
    let mut names = BTreeMap::new();
    for v in symbols.variables_of(&sp.name.name) {
        if v.relaxed {
            continue;
        }
        let init = match v.kind {
            VarKind::Param(Mode::Out) | VarKind::Local => Init::Uninitialized,
            VarKind::Param(_) => Init::Initialized,
        };
        let key = v.name.to_lowercase();
        names.insert(key.clone(), v.name.clone());
        state.vars.insert(key, init);
    }
    let mut a = Analyzer {
        names,
        post: sp.aspects.post.as_ref(),
        findings: BTreeSet::new(),
        steps: 0,
    };
    let bound = BTreeSet::new();
    for l in locals {
        if let Some(init) = &l.init {
            a.read(init, &state, &bound);
            state.vars.insert(l.name.key(), Init::Initialized);
        }
    }
    let end = a.stmts(stmts, Some(state));
    a.exit(&end);
    (a.findings.into_iter().collect(), a.steps)
}

impl Analyzer<'_> {
    fn report(&mut self, id: &Ident, state: &InitState, bound: &BTreeSet<String>) {
        let key = id.key();
        if bound.contains(&key) {
            return;
        }
        if let Some(init) = state.get(&key) {
            if init != Init::Initialized {
                self.findings.insert(Finding {
                    span: id.span.clone(),
                    variable: self.names[&key].clone(),
                    severity: "medium",
                });
            }
        }
    }

    fn read_range(&mut self, r: &RangeSpec, state: &InitState, bound: &BTreeSet<String>) {
        if let RangeSpec::Bounds(lo, hi) = r {
            self.read(lo, state, bound);
            self.read(hi, state, bound);
        }
    }

    /// Records reads of non-initialized variables in `e`. Bounds attributes
    /// and 'Initialized do not read the value.
    fn read(&mut self, e: &Expr, state: &InitState, bound: &BTreeSet<String>) {
        match &e.kind {
            ExprKind::Name(id) => self.report(id, state, bound),
            ExprKind::Attr(prefix, attr) => match attr {
                Attribute::Initialized | Attribute::Result => {
                    if let ExprKind::Index(_, i) = &prefix.kind {
                        self.read(i, state, bound);
                    }
                }
                Attribute::First | Attribute::Last | Attribute::Length | Attribute::Range => {
                    if !matches!(prefix.kind, ExprKind::Name(_)) {
                        self.read(prefix, state, bound);
                    }
                }
            },
            ExprKind::Quantified {
                var, range, body, ..
            } => {
                self.read_range(range, state, bound);
                let mut inner = bound.clone();
                inner.insert(var.key());
                self.read(body, state, &inner);
            }
            ExprKind::In(x, r) => {
                self.read(x, state, bound);
                self.read_range(r, state, bound);
            }
            ExprKind::Int(_) | ExprKind::Char(_) | ExprKind::Str(_) | ExprKind::Bool(_) => {}
            ExprKind::Binary(_, a, b) => {
                self.read(a, state, bound);
                self.read(b, state, bound);
            }
            ExprKind::Not(a) | ExprKind::Neg(a) | ExprKind::Paren(a) | ExprKind::Others(a) => {
                self.read(a, state, bound)
            }
            ExprKind::If {
                cond,
                then,
                elsifs,
                otherwise,
            } => {
                self.read(cond, state, bound);
                self.read(then, state, bound);
                for (c, x) in elsifs {
                    self.read(c, state, bound);
                    self.read(x, state, bound);
                }
                if let Some(o) = otherwise {
                    self.read(o, state, bound);
                }
            }
            ExprKind::Apply(p, args) => {
                self.read(p, state, bound);
                for a in args {
                    self.read(a, state, bound);
                }
            }
            ExprKind::Call(_, args) => {
                for a in args {
                    self.read(a, state, bound);
                }
            }
            ExprKind::Index(p, i) => {
                self.read(p, state, bound);
                self.read(i, state, bound);
            }
            ExprKind::Slice(p, lo, hi) => {
                self.read(p, state, bound);
                self.read(lo, state, bound);
                self.read(hi, state, bound);
            }
        }
    }

    fn exit(&mut self, state: &Flow) {
        if let (Some(post), Some(state)) = (self.post, state) {
            self.read(post, state, &BTreeSet::new());
        }
    }

    fn stmts(&mut self, stmts: &[Stmt], mut state: Flow) -> Flow {
        for s in stmts {
            state = self.stmt(s, state);
        }
        state
    }

    fn stmt(&mut self, s: &Stmt, state: Flow) -> Flow {
        self.steps += 1;
        let mut state = state?;
        let none = BTreeSet::new();
        match &s.kind {
            StmtKind::Null => Some(state),
            StmtKind::Assign { target, value } => {
                self.read(value, &state, &none);
                match &target.kind {
                    ExprKind::Name(id) => {
                        if state.vars.contains_key(&id.key()) {
                            state.vars.insert(id.key(), Init::Initialized);
                        }
                    }
                    ExprKind::Index(p, i) => {
                        self.read(i, &state, &none);
                        if let ExprKind::Name(id) = &p.kind {
                            if let Some(v) = state.vars.get_mut(&id.key()) {
                                *v = (*v).max(Init::Maybe);
                            }
                        }
                    }
                    _ => {}
                }
                Some(state)
            }
            StmtKind::If {
                branches,
                otherwise,
            } => {
                let mut out: Flow = None;
                for (c, body) in branches {
                    self.read(c, &state, &none);
                    out = join(out, self.stmts(body, Some(state.clone())));
                }
                let rest = match otherwise {
                    Some(body) => self.stmts(body, Some(state)),
                    None => Some(state),
                };
                join(out, rest)
            }
            StmtKind::For { range, body, .. } => {
                self.read_range(range, &state, &none);
                let mut head = state.clone();
                loop {
                    let end = self.stmts(body, Some(head.clone()));
                    let next = match end {
                        Some(end) => head.meet(&end),
                        None => head.clone(),
                    };
                    if next == head {
                        break;
                    }
                    head = next;
                }
                Some(head)
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    self.read(e, &state, &none);
                }
                self.exit(&Some(state));
                None
            }
            StmtKind::Assert(e) | StmtKind::LoopInvariant(e) => {
                self.read(e, &state, &none);
                Some(state)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sema::resolve;

    fn findings(src: &str) -> Vec<Finding> {
        let r = resolve(&parse_unit("t.adb", src).unwrap()).unwrap();
        let mut out = Vec::new();
        for sp in r.unit.subprograms() {
            out.extend(analyze_init(sp, &r.symbols));
        }
        out
    }

    #[test]
    fn lattice() {
        use Init::*;
        assert_eq!(Initialized.meet(Maybe), Maybe);
        assert_eq!(Maybe.meet(Uninitialized), Uninitialized);
        assert_eq!(Initialized.meet(Initialized), Initialized);
    }

    #[test]
    fn erase_with_invariant_reading_elements() {
        let f = findings(
            "function All_Blanks (S : String) return Boolean is
  (for all J in S'Range => S (J) = ' ');
procedure Erase (S : out String) with Post => All_Blanks (S) is
begin
   for J in S'Range loop
      S (J) := ' ';
      pragma Loop_Invariant (for all K in S'First .. J => S (K) = ' ');
   end loop;
end Erase;",
        );
        assert!(!f.is_empty());
        assert!(f.iter().all(|f| f.variable == "S"));
        assert_eq!(f[0].message(), "\"S\" might not be initialized");
        assert_eq!(f[0].severity, "medium");
    }

    #[test]
    fn aggregate_then_read() {
        let f = findings(
            "procedure P (S : out String; C : out Character) is
begin
   S := (others => ' ');
   C := S (S'First);
end P;",
        );
        assert!(f.is_empty(), "{f:?}");
    }

    #[test]
    fn one_branch_only() {
        let f = findings(
            "procedure P (B : Boolean; Y : out Integer) is
   V : Integer;
begin
   if B then V := 1; end if;
   Y := V;
end P;",
        );
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].variable, "V");
        assert_eq!(f[0].span.line, 5);
    }

    #[test]
    fn relaxed_variables_are_skipped() {
        let f = findings(
            "procedure Erase (S : out String) with Relaxed_Initialization => S is
begin
   for J in S'Range loop
      pragma Loop_Invariant (for all K in S'First .. J - 1 => S (K) = ' ');
      S (J) := ' ';
   end loop;
end Erase;",
        );
        assert!(f.is_empty());
    }

    #[test]
    fn bounds_and_initialized_are_not_reads() {
        let f = findings(
            "procedure P (S : out String; N : out Integer) is
begin
   N := S'Length + S'First;
   pragma Assert (S'Initialized or else N > 0);
end P;",
        );
        assert!(f.is_empty(), "{f:?}");
    }
}
