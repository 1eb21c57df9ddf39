//! Check collection and verification-condition generation.
//!
//! Subprogram bodies are executed symbolically: every assignment creates a
//! new version of its target, conditions and earlier checks become
//! hypotheses, and each check site yields one VC per path reaching it.
//! Loops are either unrolled or cut at their invariants.

mod checks;
pub mod logic;
mod split;
pub mod theory;
mod wp;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;

pub use checks::{CheckKind, CheckObligation};
pub use logic::{Elem, LOp, Sort, Sym, Term};
pub use split::{split_vc, Leaf};
pub use wp::{function_table, generate};

use crate::sema::{iteration_count, IterationCount, LoopShape};
use crate::syntax::SourceSpan;

/// Loops with at most this many static iterations are unrolled.
pub const UNROLL_LIMIT: u64 = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopDecision {
    Unroll(u64),
    UseInvariant,
    CannotUnroll(String),
}

/// Loops with invariants are cut; small static loops are unrolled.
pub fn decide_loop(shape: &LoopShape, unroll_limit: u64) -> LoopDecision {
    if !shape.invariants.is_empty() {
        return LoopDecision::UseInvariant;
    }
    match iteration_count(shape) {
        IterationCount::Static(n) if n <= unroll_limit => LoopDecision::Unroll(n),
        _ => LoopDecision::CannotUnroll("too many loop iterations".into()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymRole {
    /// Bound of an unconstrained string (`S'First`, `S'Last`).
    Bound,
    Scalar,
    Array,
    /// Variable introduced by splitting a universal goal.
    Fresh,
}

#[derive(Clone, Debug)]
pub struct SymbolDecl {
    pub id: Sym,
    /// Source-level name without version suffix.
    pub base: String,
    /// Identity shared by all versions of one program variable.
    pub ident: String,
    pub version: u32,
    pub sort: Sort,
    pub role: SymRole,
    /// Static range of integer symbols.
    pub range: Option<(i64, i64)>,
    /// Defined constants carry their value.
    pub def: Option<Term>,
    /// Index bounds of array symbols.
    pub bounds: Option<(Term, Term)>,
}

#[derive(Clone, Debug)]
pub struct Hypothesis {
    pub formula: Term,
    pub span: Option<SourceSpan>,
}

/// A source function as seen by the prover.
#[derive(Clone, Debug)]
pub struct FunDecl {
    pub name: String,
    pub params: Vec<Sym>,
    pub param_sorts: Vec<Sort>,
    pub result: Sort,
    pub result_range: Option<(i64, i64)>,
    pub pre: Option<Term>,
    pub post: Option<Term>,
    pub result_sym: Sym,
    /// Body, when available for proof.
    pub def: Option<Term>,
}

#[derive(Clone, Debug, Default)]
pub struct FunTable {
    pub funs: BTreeMap<Sym, FunDecl>,
}

impl FunTable {
    pub fn get(&self, key: &Sym) -> Option<&FunDecl> {
        self.funs.get(key)
    }

    pub fn is_uninterpreted(&self, key: &Sym) -> bool {
        self.funs.get(key).is_none_or(|f| f.def.is_none())
    }
}

/// A verification condition: hypotheses entail the goal.
#[derive(Clone, Debug)]
pub struct Vc {
    pub symbols: Vec<SymbolDecl>,
    pub hypotheses: Vec<Hypothesis>,
    pub goal: Term,
    pub functions: Arc<FunTable>,
    /// A loop cut or a call abstraction lies on the path.
    pub cut_crossed: bool,
}

impl Vc {
    pub fn symbol(&self, id: &Sym) -> Option<&SymbolDecl> {
        self.symbols.iter().find(|s| &s.id == id)
    }

    /// Display names: the newest version of a variable prints bare, older
    /// ones get 1, 2, ... counting backwards.
    pub fn names(&self) -> HashMap<Sym, String> {
        let mut by_ident: BTreeMap<&str, Vec<&SymbolDecl>> = BTreeMap::new();
        let mut out = HashMap::new();
        for s in &self.symbols {
            match s.role {
                SymRole::Scalar | SymRole::Array => by_ident.entry(&s.ident).or_default().push(s),
                SymRole::Bound | SymRole::Fresh => {
                    out.insert(s.id.clone(), s.base.clone());
                }
            }
        }
        for (_, mut versions) in by_ident {
            versions.sort_by_key(|s| std::cmp::Reverse(s.version));
            for (rank, s) in versions.into_iter().enumerate() {
                let name = if rank == 0 {
                    s.base.clone()
                } else {
                    format!("{}{}", s.base, rank)
                };
                out.insert(s.id.clone(), name);
            }
        }
        out
    }

    pub fn namer(&self) -> impl Fn(&Sym) -> String {
        let names = self.names();
        move |s: &Sym| names.get(s).cloned().unwrap_or_else(|| base_of(s))
    }

    pub fn show(&self, t: &Term) -> String {
        t.show(&self.namer())
    }

    /// Symbols (transitively) needed by the given terms, in arena order.
    pub(crate) fn closure(arena: &[SymbolDecl], terms: &[&Term]) -> Vec<SymbolDecl> {
        let index: HashMap<&Sym, &SymbolDecl> = arena.iter().map(|s| (&s.id, s)).collect();
        let mut seen = BTreeSet::new();
        let mut todo = BTreeSet::new();
        for t in terms {
            t.free_syms(&mut todo);
        }
        while let Some(s) = todo.pop_first() {
            if !seen.insert(s.clone()) {
                continue;
            }
            if let Some(d) = index.get(&s) {
                for t in d.def.iter().chain(d.bounds.iter().flat_map(|(a, b)| [a, b])) {
                    let mut more = BTreeSet::new();
                    t.free_syms(&mut more);
                    todo.extend(more.into_iter().filter(|m| !seen.contains(m)));
                }
            }
        }
        arena.iter().filter(|s| seen.contains(&s.id)).cloned().collect()
    }

    /// Rebuilds the signature after hypotheses or the goal changed.
    pub fn restrict_symbols(&mut self, arena: &[SymbolDecl]) {
        let mut terms: Vec<&Term> = self.hypotheses.iter().map(|h| &h.formula).collect();
        terms.push(&self.goal);
        self.symbols = Vc::closure(arena, &terms);
    }
}

/// Display base of an internal symbol id (`K#12` prints as `K`).
pub fn base_of(s: &Sym) -> String {
    s.split('#').next().unwrap_or(s).to_string()
}

/// One VC emitted for a check site.
#[derive(Clone, Debug)]
pub struct CheckVc {
    /// Index into [`SubprogramVcs::obligations`].
    pub obligation: usize,
    pub vc: Vc,
    /// Source text of the whole property for property checks.
    pub property: Option<String>,
    /// Left operands of enclosing `and` inside a precondition.
    pub and_lefts: Vec<Term>,
}

/// A branch or body entry whose path condition may be contradictory.
#[derive(Clone, Debug)]
pub struct Context {
    pub span: SourceSpan,
    pub parent: Option<SourceSpan>,
    pub vc: Vc,
}

#[derive(Clone, Debug)]
pub struct SubprogramVcs {
    pub subprogram: String,
    pub obligations: Vec<CheckObligation>,
    pub vcs: Vec<CheckVc>,
    pub contexts: Vec<Context>,
    pub loops: Vec<(LoopShape, LoopDecision)>,
}

impl SubprogramVcs {
    pub fn vcs_of(&self, obligation: usize) -> impl Iterator<Item = &CheckVc> {
        self.vcs.iter().filter(move |v| v.obligation == obligation)
    }
}

#[derive(Clone, Debug)]
pub struct GenOptions {
    pub unroll_limit: u64,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            unroll_limit: UNROLL_LIMIT,
        }
    }
}
