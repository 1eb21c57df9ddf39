//! Bounded-domain validity checking and model finding.
//!
//! Free symbols are enumerated in a fixed order over small windows:
//! string bounds first, then scalars, then array contents. Calls to
//! functions without an available body are given values lazily, subject to
//! their result range and contract. A result of [`SolveResult::Proved`]
//! therefore means "no counterexample within the bounds".

mod eval;
pub mod external;
mod smt;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;

pub use eval::{AppKey, ArrVal, Evaluator, Need, SVal};
pub use smt::export_smtlib;

use crate::vcgen::logic::{LOp, Sort, Sym, Term};
use crate::vcgen::{Elem, SymRole, SymbolDecl, Vc};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainBounds {
    pub int_lo: i64,
    pub int_hi: i64,
    pub first_lo: i64,
    pub first_hi: i64,
    pub last_lo: i64,
    pub last_hi: i64,
    pub max_len: i64,
    pub alphabet: Vec<char>,
    pub budget: u64,
    pub quant_limit: i64,
}

impl Default for DomainBounds {
    fn default() -> Self {
        DomainBounds {
            int_lo: -8,
            int_hi: 8,
            first_lo: 1,
            first_hi: 4,
            last_lo: 0,
            last_hi: 5,
            max_len: 4,
            alphabet: vec![' ', 'a', 'b'],
            budget: 10_000_000,
            quant_limit: 256,
        }
    }
}

impl DomainBounds {
    /// Default bounds with the budget scaled by proof level (x1, x10, x100).
    pub fn for_level(level: u8) -> DomainBounds {
        let d = DomainBounds::default();
        DomainBounds {
            budget: d.budget * 10u64.pow(level.min(2) as u32),
            ..d
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.int_lo > self.int_hi {
            return Err(format!("empty integer window {}..{}", self.int_lo, self.int_hi));
        }
        if self.max_len < 0 {
            return Err("negative maximum array length".into());
        }
        if self.alphabet.is_empty() {
            return Err("empty alphabet".into());
        }
        Ok(())
    }
}

/// Values ordered 0, 1, -1, 2, -2, ... within `lo ..= hi`.
pub fn ordered_window(lo: i64, hi: i64) -> Vec<i64> {
    let mut v: Vec<i64> = (lo..=hi).collect();
    v.sort_by_key(|x| (x.unsigned_abs(), *x < 0));
    v
}

/// A satisfying assignment, with defined symbols and chosen function
/// results included.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub values: BTreeMap<Sym, SVal>,
    pub apps: BTreeMap<AppKey, SVal>,
}

impl Model {
    pub fn get(&self, s: &Sym) -> Option<&SVal> {
        self.values.get(s)
    }

    /// Source-level rendering of a symbol's value; arrays are shown over
    /// their bounds, with `?` for uninitialized elements.
    pub fn render(&self, vc: &Vc, s: &Sym) -> Option<String> {
        let v = self.values.get(s)?;
        let decl = vc.symbol(s);
        match (v, decl.and_then(|d| d.bounds.as_ref())) {
            (SVal::Arr(a), Some((f, l))) => {
                let ev = self.evaluator(vc);
                let first = ev.eval(f).ok()?.as_int()?;
                let last = ev.eval(l).ok()?.as_int()?;
                let text: String = (first..=last)
                    .map(|i| match a.get(i) {
                        SVal::Char(c) | SVal::Wrap(c, true) => *c,
                        _ => '?',
                    })
                    .collect();
                Some(format!("({first} .. {last} => \"{text}\")"))
            }
            (v, _) => Some(v.to_string()),
        }
    }

    fn evaluator<'a>(&'a self, vc: &'a Vc) -> ModelEval<'a> {
        ModelEval { model: self, vc }
    }

    /// Evaluates a term of `vc` under this model.
    pub fn eval(&self, vc: &Vc, t: &Term) -> Result<SVal, Need> {
        self.evaluator(vc).eval(t)
    }
}

struct ModelEval<'a> {
    model: &'a Model,
    vc: &'a Vc,
}

impl ModelEval<'_> {
    fn eval(&self, t: &Term) -> Result<SVal, Need> {
        let assign: HashMap<Sym, SVal> = self.model.values.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let apps: HashMap<AppKey, SVal> = self.model.apps.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let defs = HashMap::new();
        Evaluator {
            assign: &assign,
            defs: &defs,
            funs: &self.vc.functions,
            apps: &apps,
            quant_limit: i64::MAX,
        }
        .eval(t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveResult {
    Proved,
    Counterexample(Model),
    ResourceOut,
}

impl SolveResult {
    pub fn is_proved(&self) -> bool {
        matches!(self, SolveResult::Proved)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Consistency {
    Satisfiable(Model),
    NoModelWithinBounds,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid bounds: {0}")]
    Bounds(String),
}

/// Searches for an assignment satisfying every hypothesis and falsifying
/// the goal.
pub fn check_validity(vc: &Vc, bounds: &DomainBounds) -> Result<SolveResult, SolverError> {
    bounds.validate().map_err(SolverError::Bounds)?;
    Ok(match Search::new(vc, bounds, true).run() {
        Outcome::Model(m) => SolveResult::Counterexample(m),
        Outcome::Exhausted => SolveResult::Proved,
        Outcome::Budget => SolveResult::ResourceOut,
    })
}

/// Searches for an assignment satisfying every hypothesis of `vc`.
pub fn check_consistency(vc: &Vc, bounds: &DomainBounds) -> Result<Consistency, SolverError> {
    bounds.validate().map_err(SolverError::Bounds)?;
    Ok(match Search::new(vc, bounds, false).run() {
        Outcome::Model(m) => Consistency::Satisfiable(m),
        Outcome::Exhausted => Consistency::NoModelWithinBounds,
        Outcome::Budget => Consistency::Unknown,
    })
}

enum Outcome {
    Model(Model),
    Exhausted,
    Budget,
}

struct Constraint {
    term: Term,
    /// Position in the enumeration order after which it can be evaluated.
    ready: usize,
}

struct Search<'a> {
    vc: &'a Vc,
    bounds: &'a DomainBounds,
    order: Vec<&'a SymbolDecl>,
    defs: HashMap<Sym, Term>,
    /// `ready[i]`: constraints evaluable once the first `i` symbols are set.
    ready: Vec<Vec<usize>>,
    constraints: Vec<Constraint>,
    assign: HashMap<Sym, SVal>,
    apps: HashMap<AppKey, SVal>,
    steps: u64,
    out_of_budget: bool,
    /// Pairs of (first, last) bound symbols of the same string.
    bound_pairs: HashMap<Sym, Sym>,
}

/// `x = t` hypotheses whose left side is a symbol become definitions,
/// provided the definition does not depend on the symbol itself.
fn extract_definitions(vc: &Vc) -> (HashMap<Sym, Term>, Vec<Term>) {
    let mut defs: HashMap<Sym, Term> = HashMap::new();
    for s in &vc.symbols {
        if let Some(d) = &s.def {
            defs.insert(s.id.clone(), d.clone());
        }
    }
    let declared: BTreeSet<&Sym> = vc
        .symbols
        .iter()
        .filter(|s| matches!(s.role, SymRole::Scalar | SymRole::Array))
        .map(|s| &s.id)
        .collect();
    let mut rest = Vec::new();
    for h in &vc.hypotheses {
        let f = h.formula.unlabel();
        if let Term::Bin(LOp::Eq, a, b) = f {
            if let Term::Var(x) = a.unlabel() {
                if declared.contains(x) && !defs.contains_key(x) && !depends_on(b, x, &defs) {
                    defs.insert(x.clone(), (**b).clone());
                    continue;
                }
            }
        }
        rest.push(h.formula.clone());
    }
    (defs, rest)
}

fn depends_on(t: &Term, x: &Sym, defs: &HashMap<Sym, Term>) -> bool {
    let mut seen = BTreeSet::new();
    let mut todo = BTreeSet::new();
    t.free_syms(&mut todo);
    while let Some(s) = todo.pop_first() {
        if &s == x {
            return true;
        }
        if !seen.insert(s.clone()) {
            continue;
        }
        if let Some(d) = defs.get(&s) {
            d.free_syms(&mut todo);
        }
    }
    false
}

/// Enumerated symbols a term depends on, through definitions.
fn roots(t: &Term, defs: &HashMap<Sym, Term>, out: &mut BTreeSet<Sym>) {
    let mut seen = BTreeSet::new();
    let mut todo = BTreeSet::new();
    t.free_syms(&mut todo);
    while let Some(s) = todo.pop_first() {
        if !seen.insert(s.clone()) {
            continue;
        }
        match defs.get(&s) {
            Some(d) => d.free_syms(&mut todo),
            None => {
                out.insert(s);
            }
        }
    }
}

impl<'a> Search<'a> {
    fn new(vc: &'a Vc, bounds: &'a DomainBounds, negate_goal: bool) -> Self {
        let (defs, mut formulas) = extract_definitions(vc);
        if negate_goal {
            formulas.push(Term::Not(Box::new(vc.goal.clone())));
        }
        let rank = |s: &SymbolDecl| match (s.role, s.sort) {
            (SymRole::Bound, _) => 0,
            (_, Sort::Array(_)) => 2,
            _ => 1,
        };
        let mut order: Vec<&SymbolDecl> = vc.symbols.iter().filter(|s| !defs.contains_key(&s.id)).collect();
        order.sort_by_key(|s| rank(s));
        // Defined integer symbols still carry their declared range.
        for s in &vc.symbols {
            if let (true, Some((lo, hi))) = (defs.contains_key(&s.id), s.range) {
                let v = Term::Var(s.id.clone());
                formulas.push(crate::vcgen::logic::within(v, Term::Int(lo), Term::Int(hi)));
            }
        }
        let position: HashMap<&Sym, usize> = order.iter().enumerate().map(|(i, s)| (&s.id, i)).collect();
        let mut ready = vec![Vec::new(); order.len() + 1];
        let mut constraints = Vec::new();
        for f in formulas {
            let mut r = BTreeSet::new();
            roots(&f, &defs, &mut r);
            let level = r.iter().filter_map(|s| position.get(s)).map(|p| p + 1).max().unwrap_or(0);
            ready[level].push(constraints.len());
            constraints.push(Constraint { term: f, ready: level });
        }
        let mut bound_pairs = HashMap::new();
        for s in &vc.symbols {
            if s.role == SymRole::Bound && s.ident.ends_with("'last") {
                let first_ident = s.ident.replace("'last", "'first");
                if let Some(f) = vc
                    .symbols
                    .iter()
                    .find(|f| f.ident == first_ident && f.role == SymRole::Bound)
                {
                    bound_pairs.insert(s.id.clone(), f.id.clone());
                }
            }
        }
        Search {
            vc,
            bounds,
            order,
            defs,
            ready,
            constraints,
            assign: HashMap::new(),
            apps: HashMap::new(),
            steps: 0,
            out_of_budget: false,
            bound_pairs,
        }
    }

    fn run(mut self) -> Outcome {
        match self.dfs(0) {
            Some(m) => Outcome::Model(m),
            None if self.out_of_budget => Outcome::Budget,
            None => Outcome::Exhausted,
        }
    }

    fn evaluator(&self) -> Evaluator<'_> {
        Evaluator {
            assign: &self.assign,
            defs: &self.defs,
            funs: &self.vc.functions,
            apps: &self.apps,
            quant_limit: self.bounds.quant_limit,
        }
    }

    /// Evaluates the constraints that became ready at `level`.
    fn check(&self, level: usize) -> Result<bool, Need> {
        let ev = self.evaluator();
        for &c in &self.ready[level] {
            debug_assert_eq!(self.constraints[c].ready, level);
            if !ev.eval_bool(&self.constraints[c].term)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn dfs(&mut self, level: usize) -> Option<Model> {
        if self.out_of_budget {
            return None;
        }
        match self.check(level) {
            Ok(false) => return None,
            Ok(true) => {}
            Err(Need::Choice(key)) => return self.choose(level, key),
            // Quantifier expansion overflow or ill-sorted terms: give up.
            Err(_) => {
                self.out_of_budget = true;
                return None;
            }
        }
        if level == self.order.len() {
            return Some(self.model());
        }
        let sym = self.order[level];
        for v in self.domain(sym) {
            self.steps += 1;
            if self.steps > self.bounds.budget {
                self.out_of_budget = true;
                return None;
            }
            self.assign.insert(sym.id.clone(), v);
            if let Some(m) = self.dfs(level + 1) {
                return Some(m);
            }
        }
        self.assign.remove(&sym.id);
        None
    }

    fn choose(&mut self, level: usize, key: AppKey) -> Option<Model> {
        let Some(decl) = self.vc.functions.get(&key.0).cloned() else {
            self.out_of_budget = true;
            return None;
        };
        let candidates: Vec<SVal> = match decl.result {
            Sort::Bool => vec![SVal::Bool(false), SVal::Bool(true)],
            Sort::Char => self.bounds.alphabet.iter().map(|c| SVal::Char(*c)).collect(),
            _ => {
                let (lo, hi) = decl.result_range.unwrap_or((i64::MIN, i64::MAX));
                ordered_window(self.bounds.int_lo.max(lo), self.bounds.int_hi.min(hi))
                    .into_iter()
                    .map(SVal::Int)
                    .collect()
            }
        };
        for v in candidates {
            if !self.contract_allows(&decl, &key.1, &v) {
                continue;
            }
            self.steps += 1;
            if self.steps > self.bounds.budget {
                self.out_of_budget = true;
                return None;
            }
            self.apps.insert(key.clone(), v);
            if let Some(m) = self.dfs(level) {
                return Some(m);
            }
        }
        self.apps.remove(&key);
        None
    }

    /// Whether `result` is consistent with the callee's contract on `args`.
    fn contract_allows(&self, decl: &crate::vcgen::FunDecl, args: &[SVal], result: &SVal) -> bool {
        let mut assign = self.assign.clone();
        for (p, a) in decl.params.iter().zip(args) {
            assign.insert(p.clone(), a.clone());
        }
        assign.insert(decl.result_sym.clone(), result.clone());
        let ev = Evaluator {
            assign: &assign,
            defs: &self.defs,
            funs: &self.vc.functions,
            apps: &self.apps,
            quant_limit: self.bounds.quant_limit,
        };
        let pre = decl.pre.as_ref().map(|p| ev.eval_bool(p));
        if let Some(Ok(false)) = pre {
            return true;
        }
        match decl.post.as_ref().map(|p| ev.eval_bool(p)) {
            Some(Ok(false)) => false,
            _ => true,
        }
    }

    fn domain(&self, s: &SymbolDecl) -> Vec<SVal> {
        let b = self.bounds;
        match s.sort {
            Sort::Bool => vec![SVal::Bool(false), SVal::Bool(true)],
            Sort::Char => b.alphabet.iter().map(|c| SVal::Char(*c)).collect(),
            Sort::Wrapper => wrapper_values(&b.alphabet),
            Sort::Int if s.role == SymRole::Bound => {
                let is_last = s.ident.ends_with("'last");
                let (lo, hi) = if is_last { (b.last_lo, b.last_hi) } else { (b.first_lo, b.first_hi) };
                let first = self
                    .bound_pairs
                    .get(&s.id)
                    .and_then(|f| self.assign.get(f))
                    .and_then(SVal::as_int);
                ordered_window(lo, hi)
                    .into_iter()
                    .filter(|v| match first {
                        Some(f) => v - f + 1 <= b.max_len,
                        None => true,
                    })
                    .map(SVal::Int)
                    .collect()
            }
            Sort::Int => {
                let (lo, hi) = s.range.unwrap_or((i64::MIN, i64::MAX));
                ordered_window(b.int_lo.max(lo), b.int_hi.min(hi))
                    .into_iter()
                    .map(SVal::Int)
                    .collect()
            }
            Sort::Array(elem) => self.array_domain(s, elem),
        }
    }

    /// Every content of an array over its bounds; other indices hold the
    /// first element value.
    fn array_domain(&self, s: &SymbolDecl, elem: Elem) -> Vec<SVal> {
        let elems = match elem {
            Elem::Char => self.bounds.alphabet.iter().map(|c| SVal::Char(*c)).collect(),
            Elem::Wrapper => wrapper_values(&self.bounds.alphabet),
        };
        let ev = self.evaluator();
        let (first, last) = match &s.bounds {
            Some((f, l)) => match (ev.eval(f), ev.eval(l)) {
                (Ok(SVal::Int(f)), Ok(SVal::Int(l))) => (f, l),
                _ => (1, 0),
            },
            None => (1, 0),
        };
        let len = (last - first + 1).max(0) as u32;
        let base = elems.len();
        let total = (base as u64).saturating_pow(len);
        if total > self.bounds.budget {
            return Vec::new();
        }
        let default = elems[0].clone();
        let mut out = Vec::with_capacity(total as usize);
        for n in 0..total {
            let mut a = ArrVal::constant(default.clone());
            let mut k = n;
            // First index varies slowest, so contents come in alphabet order.
            let mut digits = vec![0usize; len as usize];
            for d in digits.iter_mut().rev() {
                *d = (k % base as u64) as usize;
                k /= base as u64;
            }
            for (i, d) in digits.into_iter().enumerate() {
                a = a.set(first + i as i64, elems[d].clone());
            }
            out.push(SVal::Arr(Arc::new(a)));
        }
        out
    }

    fn model(&self) -> Model {
        let ev = self.evaluator();
        let mut values = BTreeMap::new();
        for s in &self.vc.symbols {
            if let Ok(v) = ev.eval(&Term::Var(s.id.clone())) {
                values.insert(s.id.clone(), v);
            }
        }
        let model = Model {
            values,
            apps: self.apps.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        };
        // Model honesty.
        for h in &self.vc.hypotheses {
            debug_assert_eq!(model.eval(self.vc, &h.formula), Ok(SVal::Bool(true)));
        }
        model
    }
}

fn wrapper_values(alphabet: &[char]) -> Vec<SVal> {
    let mut out = Vec::new();
    for &c in alphabet {
        out.push(SVal::Wrap(c, true));
    }
    for &c in alphabet {
        out.push(SVal::Wrap(c, false));
    }
    out
}
