//! Forward symbolic execution producing one VC per check and path.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::sema::{loop_shapes, static_int, write_set, CallGraph, FunctionClass, LoopShape, ResolvedUnit};
use crate::syntax::*;

use super::logic::{self, Elem, Sort, Sym, Term};
use super::{
    decide_loop, CheckKind, CheckObligation, CheckVc, Context, FunDecl, FunTable, GenOptions, Hypothesis,
    LoopDecision, SubprogramVcs, SymRole, SymbolDecl, Vc,
};

#[derive(Clone, Debug)]
struct StrVal {
    map: Term,
    first: Term,
    last: Term,
    /// Elements are init wrappers.
    relaxed: bool,
    /// Declared name of the root variable.
    root: Option<String>,
}

#[derive(Clone, Debug)]
enum Val {
    Scalar(Term),
    Str(StrVal),
}

#[derive(Clone, Debug, Default)]
struct State {
    env: BTreeMap<String, Val>,
    hyps: Vec<Hypothesis>,
    cut: bool,
}

impl State {
    fn assume(&mut self, formula: Term, span: Option<&SourceSpan>) {
        if formula == Term::Bool(true) {
            return;
        }
        self.hyps.push(Hypothesis {
            formula,
            span: span.cloned(),
        });
    }
}

#[derive(Clone, Debug)]
enum Guard {
    Cond(Term),
    Bind {
        var: Sym,
        lo: Term,
        hi: Term,
        earlier: Term,
    },
}

/// Expression-level context of a check.
#[derive(Clone, Debug)]
struct Ectx {
    emit: bool,
    guards: Vec<Guard>,
    in_pre: bool,
    and_lefts: Vec<Term>,
}

impl Ectx {
    fn checked() -> Ectx {
        Ectx {
            emit: true,
            guards: Vec::new(),
            in_pre: false,
            and_lefts: Vec::new(),
        }
    }

    fn pure() -> Ectx {
        Ectx {
            emit: false,
            ..Ectx::checked()
        }
    }

    /// Closes `goal` over the guards, innermost first.
    fn wrap(&self, goal: Term) -> Term {
        self.guards.iter().rev().fold(goal, |g, guard| match guard {
            Guard::Cond(c) => logic::implies(c.clone(), g),
            Guard::Bind { var, lo, hi, earlier } => Term::Quant {
                all: true,
                var: var.clone(),
                lo: Box::new(lo.clone()),
                hi: Box::new(hi.clone()),
                body: Box::new(logic::implies(earlier.clone(), g)),
            },
        })
    }
}

struct Emitted {
    kind: CheckKind,
    span: SourceSpan,
    expr: Expr,
    variable: Option<String>,
    vc: Vc,
    property: Option<String>,
    and_lefts: Vec<Term>,
}

struct Gen<'a> {
    unit: &'a ResolvedUnit,
    graph: &'a CallGraph,
    funs: Arc<FunTable>,
    opts: GenOptions,
    /// Subprogram under analysis.
    sp: Option<&'a Subprogram>,
    tag: &'static str,
    arena: Vec<SymbolDecl>,
    versions: HashMap<String, u32>,
    counter: usize,
    emitted: Vec<Emitted>,
    contexts: Vec<Context>,
    context_stack: Vec<SourceSpan>,
    entry_variant: Option<Term>,
    shapes: BTreeMap<usize, LoopShape>,
    decisions: Vec<(LoopShape, LoopDecision)>,
}

fn sort_of(ty: &Ty) -> Sort {
    match ty {
        Ty::Bool => Sort::Bool,
        Ty::Char => Sort::Char,
        _ => Sort::Int,
    }
}

fn range_of(ty: &Ty) -> Option<(i64, i64)> {
    match ty {
        Ty::Int(r) => Some((r.lo, r.hi)),
        _ => None,
    }
}

fn fun_key(name: &str) -> Sym {
    Arc::from(name.to_lowercase())
}

fn array_root(e: &Expr) -> Option<&Ident> {
    match &e.kind {
        ExprKind::Name(id) => Some(id),
        ExprKind::Paren(p) | ExprKind::Slice(p, _, _) | ExprKind::Index(p, _) => array_root(p),
        _ => None,
    }
}

/// Splits top-level conjunctions so each conjunct is its own hypothesis.
fn conjuncts(t: Term, out: &mut Vec<Term>) {
    match t {
        Term::Bin(logic::LOp::And, a, b) => {
            conjuncts(*a, out);
            conjuncts(*b, out);
        }
        Term::Label(l, inner) if matches!(*inner, Term::Bin(logic::LOp::And, _, _)) => {
            let _ = l;
            conjuncts(*inner, out);
        }
        t => out.push(t),
    }
}

impl<'a> Gen<'a> {
    fn new(unit: &'a ResolvedUnit, graph: &'a CallGraph, funs: Arc<FunTable>, opts: GenOptions, tag: &'static str) -> Self {
        Gen {
            unit,
            graph,
            funs,
            opts,
            sp: None,
            tag,
            arena: Vec::new(),
            versions: HashMap::new(),
            counter: 0,
            emitted: Vec::new(),
            contexts: Vec::new(),
            context_stack: Vec::new(),
            entry_variant: None,
            shapes: BTreeMap::new(),
            decisions: Vec::new(),
        }
    }

    fn next_id(&mut self, base: &str) -> Sym {
        self.counter += 1;
        Arc::from(format!("{base}#{}{}", self.tag, self.counter))
    }

    #[allow(clippy::too_many_arguments)]
    fn new_symbol(
        &mut self,
        base: &str,
        ident: &str,
        sort: Sort,
        role: SymRole,
        range: Option<(i64, i64)>,
        def: Option<Term>,
        bounds: Option<(Term, Term)>,
    ) -> Sym {
        let id = self.next_id(base);
        let v = self.versions.entry(ident.to_string()).or_insert(0);
        *v += 1;
        self.arena.push(SymbolDecl {
            id: id.clone(),
            base: base.to_string(),
            ident: ident.to_string(),
            version: *v,
            sort,
            role,
            range,
            def,
            bounds,
        });
        id
    }

    /// Quantifier binders are not part of any signature.
    fn binder(&mut self, name: &str) -> Sym {
        self.next_id(name)
    }

    fn make_vc(&self, st: &State, goal: Term) -> Vc {
        let mut terms: Vec<&Term> = st.hyps.iter().map(|h| &h.formula).collect();
        terms.push(&goal);
        let symbols = Vc::closure(&self.arena, &terms);
        let uninterpreted = terms
            .iter()
            .any(|t| t.mentions(&|x| matches!(x, Term::App(f, _) if self.funs.is_uninterpreted(f))));
        Vc {
            symbols,
            hypotheses: st.hyps.clone(),
            goal,
            functions: self.funs.clone(),
            cut_crossed: st.cut || uninterpreted,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn emit(
        &mut self,
        st: &mut State,
        ec: &Ectx,
        kind: CheckKind,
        span: &SourceSpan,
        expr: &Expr,
        variable: Option<String>,
        goal: Term,
    ) {
        if !ec.emit {
            return;
        }
        let property = goal.label().map(str::to_string);
        let wrapped = ec.wrap(goal);
        let mut vc = self.make_vc(st, wrapped.clone());
        if ec.in_pre && !ec.and_lefts.is_empty() {
            // Keep the symbols of the left operands for the re-proof hint.
            let mut terms: Vec<&Term> = vc.hypotheses.iter().map(|h| &h.formula).collect();
            terms.push(&vc.goal);
            terms.extend(ec.and_lefts.iter());
            let symbols = Vc::closure(&self.arena, &terms);
            vc.symbols = symbols;
        }
        self.emitted.push(Emitted {
            kind,
            span: span.clone(),
            expr: expr.clone(),
            variable,
            vc,
            property,
            and_lefts: if ec.in_pre { ec.and_lefts.clone() } else { Vec::new() },
        });
        let mut parts = Vec::new();
        conjuncts(wrapped, &mut parts);
        for p in parts {
            st.assume(p, Some(span));
        }
    }

    // ----- expressions -------------------------------------------------

    fn expr(&mut self, st: &mut State, ec: &mut Ectx, e: &Expr) -> Term {
        let t = self.expr_inner(st, ec, e);
        if e.ty == Ty::Bool && !matches!(e.kind, ExprKind::Paren(_) | ExprKind::Bool(_)) {
            Term::Label(Arc::from(pretty(e)), Box::new(t))
        } else {
            t
        }
    }

    fn arith_checks(&mut self, st: &mut State, ec: &Ectx, e: &Expr, result: &Term) {
        self.emit(
            st,
            ec,
            CheckKind::Overflow,
            &e.span,
            e,
            None,
            logic::within(result.clone(), logic::int(INT_FIRST), logic::int(INT_LAST)),
        );
    }

    fn expr_inner(&mut self, st: &mut State, ec: &mut Ectx, e: &Expr) -> Term {
        match &e.kind {
            ExprKind::Int(n) => Term::Int(*n),
            ExprKind::Char(c) => Term::Char(*c),
            ExprKind::Bool(b) => Term::Bool(*b),
            ExprKind::Str(_) | ExprKind::Others(_) | ExprKind::Apply(..) => Term::Bool(true),
            ExprKind::Name(id) => match st.env.get(&id.key()) {
                Some(Val::Scalar(t)) => t.clone(),
                _ => Term::Bool(true),
            },
            ExprKind::Paren(inner) => self.expr(st, ec, inner),
            ExprKind::Attr(prefix, attr) => self.attribute(st, ec, prefix, *attr),
            ExprKind::Binary(op, a, b) => self.binary(st, ec, e, *op, a, b),
            ExprKind::Not(a) => logic::not(self.expr(st, ec, a)),
            ExprKind::Neg(a) => {
                let x = self.expr(st, ec, a);
                let r = Term::Neg(Box::new(x));
                self.arith_checks(st, ec, e, &r);
                r
            }
            ExprKind::If {
                cond,
                then,
                elsifs,
                otherwise,
            } => {
                let mut arms = Vec::new();
                let c = self.expr(st, ec, cond);
                ec.guards.push(Guard::Cond(c.clone()));
                let t = self.expr(st, ec, then);
                ec.guards.pop();
                arms.push((c.clone(), t));
                let mut negs = vec![logic::not(c)];
                for (c, x) in elsifs {
                    let depth = ec.guards.len();
                    for n in &negs {
                        ec.guards.push(Guard::Cond(n.clone()));
                    }
                    let ct = self.expr(st, ec, c);
                    ec.guards.push(Guard::Cond(ct.clone()));
                    let xt = self.expr(st, ec, x);
                    ec.guards.truncate(depth);
                    arms.push((ct.clone(), xt));
                    negs.push(logic::not(ct));
                }
                let depth = ec.guards.len();
                for n in &negs {
                    ec.guards.push(Guard::Cond(n.clone()));
                }
                let other = match otherwise {
                    Some(o) => self.expr(st, ec, o),
                    None => Term::Bool(true),
                };
                ec.guards.truncate(depth);
                arms.into_iter()
                    .rev()
                    .fold(other, |acc, (c, t)| logic::ite(c, t, acc))
            }
            ExprKind::Quantified {
                quantifier,
                var,
                range,
                body,
            } => {
                let (lo, hi) = self.range(st, ec, range);
                let all = *quantifier == Quantifier::All;
                let key = var.key();
                let saved = st.env.get(&key).cloned();
                let earlier = if ec.emit {
                    let k2 = self.binder(&var.name);
                    st.env.insert(key.clone(), Val::Scalar(Term::Var(k2.clone())));
                    let b = self.expr(st, &mut Ectx::pure(), body);
                    Term::Quant {
                        all: true,
                        var: k2,
                        lo: Box::new(lo.clone()),
                        hi: Box::new(Term::Bool(true)),
                        body: Box::new(if all { b } else { logic::not(b) }),
                    }
                } else {
                    Term::Bool(true)
                };
                let k = self.binder(&var.name);
                let earlier = match earlier {
                    Term::Quant { all, var, lo, body, .. } => Term::Quant {
                        all,
                        var,
                        lo,
                        hi: Box::new(logic::sub(Term::Var(k.clone()), logic::int(1))),
                        body,
                    },
                    t => t,
                };
                st.env.insert(key.clone(), Val::Scalar(Term::Var(k.clone())));
                ec.guards.push(Guard::Bind {
                    var: k.clone(),
                    lo: lo.clone(),
                    hi: hi.clone(),
                    earlier,
                });
                let b = self.expr(st, ec, body);
                ec.guards.pop();
                match saved {
                    Some(v) => st.env.insert(key, v),
                    None => st.env.remove(&key),
                };
                Term::Quant {
                    all,
                    var: k,
                    lo: Box::new(lo),
                    hi: Box::new(hi),
                    body: Box::new(b),
                }
            }
            ExprKind::Index(p, i) => {
                let s = self.arr(st, ec, p);
                let idx = self.expr(st, ec, i);
                self.emit(
                    st,
                    ec,
                    CheckKind::ArrayIndex,
                    &i.span,
                    i,
                    None,
                    logic::within(idx.clone(), s.first.clone(), s.last.clone()),
                );
                let cell = logic::get(s.map.clone(), idx);
                if s.relaxed {
                    self.emit(
                        st,
                        ec,
                        CheckKind::InitCheck,
                        &e.span,
                        e,
                        s.root.clone(),
                        logic::eq(Term::InitOf(Box::new(cell.clone())), Term::Bool(true)),
                    );
                    Term::ValOf(Box::new(cell))
                } else {
                    cell
                }
            }
            ExprKind::Slice(..) => Term::Bool(true),
            ExprKind::In(x, r) => {
                let v = self.expr(st, ec, x);
                let (lo, hi) = self.range(st, ec, r);
                logic::within(v, lo, hi)
            }
            ExprKind::Call(id, args) => self.call(st, ec, e, id, args),
        }
    }

    fn attribute(&mut self, st: &mut State, ec: &mut Ectx, prefix: &Expr, attr: Attribute) -> Term {
        match attr {
            Attribute::First => self.arr(st, ec, prefix).first,
            Attribute::Last => self.arr(st, ec, prefix).last,
            Attribute::Length => {
                let s = self.arr(st, ec, prefix);
                logic::length(s.first, s.last)
            }
            Attribute::Range => Term::Bool(true),
            Attribute::Result => match st.env.get("'result") {
                Some(Val::Scalar(t)) => t.clone(),
                _ => Term::Bool(true),
            },
            Attribute::Initialized => match &prefix.kind {
                ExprKind::Index(p, i) => {
                    let s = self.arr(st, ec, p);
                    let idx = self.expr(st, ec, i);
                    self.emit(
                        st,
                        ec,
                        CheckKind::ArrayIndex,
                        &i.span,
                        i,
                        None,
                        logic::within(idx.clone(), s.first.clone(), s.last.clone()),
                    );
                    if s.relaxed {
                        Term::InitOf(Box::new(logic::get(s.map, idx)))
                    } else {
                        Term::Bool(true)
                    }
                }
                ExprKind::Name(id) => match st.env.get(&id.key()).cloned() {
                    Some(Val::Str(s)) if s.relaxed => self.all_initialized(&s),
                    _ => Term::Bool(true),
                },
                _ => Term::Bool(true),
            },
        }
    }

    fn all_initialized(&mut self, s: &StrVal) -> Term {
        let k = self.binder("K");
        Term::Quant {
            all: true,
            var: k.clone(),
            lo: Box::new(s.first.clone()),
            hi: Box::new(s.last.clone()),
            body: Box::new(logic::eq(
                Term::InitOf(Box::new(logic::get(s.map.clone(), Term::Var(k)))),
                Term::Bool(true),
            )),
        }
    }

    fn binary(&mut self, st: &mut State, ec: &mut Ectx, e: &Expr, op: BinOp, a: &Expr, b: &Expr) -> Term {
        use logic::LOp;
        match op {
            BinOp::AndThen | BinOp::OrElse => {
                let x = self.expr(st, ec, a);
                let g = if op == BinOp::AndThen { x.clone() } else { logic::not(x.clone()) };
                ec.guards.push(Guard::Cond(g));
                let y = self.expr(st, ec, b);
                ec.guards.pop();
                logic::bin(if op == BinOp::AndThen { LOp::And } else { LOp::Or }, x, y)
            }
            BinOp::And | BinOp::Or => {
                let x = self.expr(st, ec, a);
                if op == BinOp::And {
                    ec.and_lefts.push(x.clone());
                }
                let y = self.expr(st, ec, b);
                if op == BinOp::And {
                    ec.and_lefts.pop();
                }
                logic::bin(if op == BinOp::And { LOp::And } else { LOp::Or }, x, y)
            }
            _ if op.is_arithmetic() => {
                let x = self.expr(st, ec, a);
                let y = self.expr(st, ec, b);
                let lop = match op {
                    BinOp::Add => LOp::Add,
                    BinOp::Sub => LOp::Sub,
                    BinOp::Mul => LOp::Mul,
                    _ => LOp::Div,
                };
                if op == BinOp::Div {
                    self.emit(
                        st,
                        ec,
                        CheckKind::Division,
                        &e.span,
                        e,
                        None,
                        logic::bin(LOp::Ne, y.clone(), logic::int(0)),
                    );
                }
                let r = logic::bin(lop, x, y);
                self.arith_checks(st, ec, e, &r);
                r
            }
            _ if a.ty == Ty::Str => {
                let s = self.read_arr(st, ec, a);
                let t = self.read_arr(st, ec, b);
                let eq = self.string_eq(&s, &t);
                if op == BinOp::Ne {
                    logic::not(eq)
                } else {
                    eq
                }
            }
            _ => {
                let x = self.expr(st, ec, a);
                let y = self.expr(st, ec, b);
                let lop = match op {
                    BinOp::Eq => LOp::Eq,
                    BinOp::Ne => LOp::Ne,
                    BinOp::Lt => LOp::Lt,
                    BinOp::Le => LOp::Le,
                    BinOp::Gt => LOp::Gt,
                    _ => LOp::Ge,
                };
                logic::bin(lop, x, y)
            }
        }
    }

    fn string_eq(&mut self, s: &StrVal, t: &StrVal) -> Term {
        let empty = |v: &StrVal| matches!(&v.map, Term::Lit(x) if x.is_empty());
        let len_s = logic::length(s.first.clone(), s.last.clone());
        let len_t = logic::length(t.first.clone(), t.last.clone());
        if empty(t) {
            return logic::eq(len_s, logic::int(0));
        }
        if empty(s) {
            return logic::eq(len_t, logic::int(0));
        }
        let k = self.binder("k");
        let kv = Term::Var(k.clone());
        logic::and(
            logic::eq(len_s.clone(), len_t),
            Term::Quant {
                all: true,
                var: k,
                lo: Box::new(logic::int(0)),
                hi: Box::new(logic::sub(len_s, logic::int(1))),
                body: Box::new(logic::eq(
                    logic::get(s.map.clone(), logic::add(s.first.clone(), kv.clone())),
                    logic::get(t.map.clone(), logic::add(t.first.clone(), kv)),
                )),
            },
        )
    }

    fn range(&mut self, st: &mut State, ec: &mut Ectx, r: &RangeSpec) -> (Term, Term) {
        match r {
            RangeSpec::Bounds(lo, hi) => {
                let l = self.expr(st, ec, lo);
                let h = self.expr(st, ec, hi);
                (l, h)
            }
            RangeSpec::Of(p) => {
                let s = self.arr(st, ec, p);
                (s.first, s.last)
            }
        }
    }

    /// A string-valued expression, without reading its elements.
    fn arr(&mut self, st: &mut State, ec: &mut Ectx, e: &Expr) -> StrVal {
        match &e.kind {
            ExprKind::Name(id) => match st.env.get(&id.key()) {
                Some(Val::Str(s)) => s.clone(),
                _ => panic!("{} is not a string", id.name),
            },
            ExprKind::Paren(inner) => self.arr(st, ec, inner),
            ExprKind::Str(text) => StrVal {
                map: Term::Lit(Arc::from(text.as_str())),
                first: logic::int(1),
                last: logic::int(text.chars().count() as i64),
                relaxed: false,
                root: None,
            },
            ExprKind::Slice(p, lo, hi) => {
                let s = self.arr(st, ec, p);
                let l = self.expr(st, ec, lo);
                let h = self.expr(st, ec, hi);
                let nonempty = logic::le(l.clone(), h.clone());
                self.emit(
                    st,
                    ec,
                    CheckKind::ArrayIndex,
                    &lo.span,
                    lo,
                    None,
                    logic::implies(
                        nonempty.clone(),
                        logic::within(l.clone(), s.first.clone(), s.last.clone()),
                    ),
                );
                self.emit(
                    st,
                    ec,
                    CheckKind::ArrayIndex,
                    &hi.span,
                    hi,
                    None,
                    logic::implies(nonempty, logic::within(h.clone(), s.first.clone(), s.last.clone())),
                );
                StrVal {
                    first: l,
                    last: h,
                    ..s
                }
            }
            _ => panic!("unsupported string expression"),
        }
    }

    /// Reads a whole string: relaxed strings must be fully initialized and
    /// are unwrapped to plain characters.
    fn read_arr(&mut self, st: &mut State, ec: &mut Ectx, e: &Expr) -> StrVal {
        let s = self.arr(st, ec, e);
        if !s.relaxed {
            return s;
        }
        let goal = self.all_initialized(&s);
        self.emit(st, ec, CheckKind::InitCheck, &e.span, e, s.root.clone(), goal);
        StrVal {
            map: Term::Unwrap(Box::new(s.map.clone())),
            relaxed: false,
            ..s
        }
    }

    fn call(&mut self, st: &mut State, ec: &mut Ectx, e: &Expr, id: &Ident, args: &[Expr]) -> Term {
        let unit = self.unit;
        let callee = unit.unit.subprogram(&id.name).expect("resolved call");
        let mut callee_env = BTreeMap::new();
        let mut flat = Vec::new();
        for (p, a) in callee.params.iter().zip(args) {
            let var = unit
                .symbols
                .variable(&callee.name.name, &p.name.name)
                .expect("resolved parameter");
            if var.ty == Ty::Str {
                let s = if var.relaxed {
                    self.arr(st, ec, a)
                } else {
                    self.read_arr(st, ec, a)
                };
                flat.extend([s.map.clone(), s.first.clone(), s.last.clone()]);
                callee_env.insert(p.name.key(), Val::Str(s));
            } else {
                let v = self.expr(st, ec, a);
                self.range_check(st, ec, &var.ty, &v, a);
                flat.push(v.clone());
                callee_env.insert(p.name.key(), Val::Scalar(v));
            }
        }
        if ec.emit {
            let mut callee_state = State {
                env: callee_env.clone(),
                ..State::default()
            };
            if let Some(pre) = &callee.aspects.pre {
                let goal = self.expr(&mut callee_state, &mut Ectx::pure(), pre);
                let goal = match goal {
                    Term::Label(..) => goal,
                    g => Term::Label(Arc::from(pretty(pre)), Box::new(g)),
                };
                self.emit(st, ec, CheckKind::Precondition, &e.span, e, None, goal);
            }
            if let (Some(v), Some(caller_value), Some(sp)) =
                (&callee.aspects.variant, self.entry_variant.clone(), self.sp)
            {
                if self.graph.same_cycle(&sp.name.name, &callee.name.name) {
                    let value = self.expr(&mut callee_state, &mut Ectx::pure(), v);
                    self.emit(
                        st,
                        ec,
                        CheckKind::VariantDecrease,
                        &e.span,
                        e,
                        None,
                        logic::lt(value, caller_value),
                    );
                }
            }
        }
        Term::App(fun_key(&callee.name.name), flat)
    }

    fn range_check(&mut self, st: &mut State, ec: &Ectx, ty: &Ty, v: &Term, at: &Expr) {
        if let Ty::Int(r) = ty {
            if !r.is_full() {
                self.emit(
                    st,
                    ec,
                    CheckKind::Range,
                    &at.span,
                    at,
                    None,
                    logic::within(v.clone(), logic::int(r.lo), logic::int(r.hi)),
                );
            }
        }
    }

    // ----- declarations --------------------------------------------------

    fn var_info(&self, name: &str) -> Option<&'a crate::sema::VarInfo> {
        let sp = self.sp?;
        self.unit.symbols.variable(&sp.name.name, name)
    }

    /// Fresh symbols for a string parameter of unknown bounds.
    fn param_string(&mut self, name: &str, ident: &str, relaxed: bool) -> StrVal {
        let first = self.new_symbol(
            &format!("{name}'First"),
            &format!("{ident}'first"),
            Sort::Int,
            SymRole::Bound,
            Some((1, INT_LAST)),
            None,
            None,
        );
        let last = self.new_symbol(
            &format!("{name}'Last"),
            &format!("{ident}'last"),
            Sort::Int,
            SymRole::Bound,
            Some((INT_FIRST, INT_LAST)),
            None,
            None,
        );
        let (first, last) = (Term::Var(first), Term::Var(last));
        let map = self.array_version(name, ident, relaxed, &first, &last);
        StrVal {
            map: Term::Var(map),
            first,
            last,
            relaxed,
            root: Some(name.to_string()),
        }
    }

    fn array_version(&mut self, name: &str, ident: &str, relaxed: bool, first: &Term, last: &Term) -> Sym {
        let elem = if relaxed { Elem::Wrapper } else { Elem::Char };
        self.new_symbol(
            name,
            ident,
            Sort::Array(elem),
            SymRole::Array,
            None,
            None,
            Some((first.clone(), last.clone())),
        )
    }

    fn scalar_version(&mut self, name: &str, ident: &str, ty: &Ty) -> Sym {
        self.new_symbol(name, ident, sort_of(ty), SymRole::Scalar, range_of(ty), None, None)
    }

    fn bind_params(&mut self, sp: &Subprogram, st: &mut State) {
        for p in &sp.params {
            let var = self
                .unit
                .symbols
                .variable(&sp.name.name, &p.name.name)
                .expect("resolved parameter");
            let key = p.name.key();
            let val = if var.ty == Ty::Str {
                Val::Str(self.param_string(&var.name, &key, var.relaxed))
            } else {
                Val::Scalar(Term::Var(self.scalar_version(&var.name, &key, &var.ty)))
            };
            st.env.insert(key, val);
        }
    }

    fn assume_pre(&mut self, sp: &Subprogram, st: &mut State) {
        if let Some(pre) = &sp.aspects.pre {
            let mut ec = Ectx::checked();
            ec.in_pre = true;
            let t = self.expr(st, &mut ec, pre);
            let mut parts = Vec::new();
            conjuncts(t, &mut parts);
            for p in parts {
                st.assume(p, Some(&pre.span));
            }
        }
        if let Some(v) = &sp.aspects.variant {
            self.entry_variant = Some(self.expr(st, &mut Ectx::pure(), v));
        }
    }

    fn check_post(&mut self, st: &mut State, result: Option<Term>) {
        let Some(sp) = self.sp else { return };
        let Some(post) = &sp.aspects.post else { return };
        if let Some(r) = result {
            st.env.insert("'result".into(), Val::Scalar(r));
        }
        let t = self.expr(st, &mut Ectx::checked(), post);
        self.emit(st, &Ectx::checked(), CheckKind::Postcondition, &post.span, post, None, t);
        st.env.remove("'result");
    }

    fn push_context(&mut self, st: &State, span: &SourceSpan) {
        let vc = self.make_vc(st, Term::Bool(false));
        self.contexts.push(Context {
            span: span.clone(),
            parent: self.context_stack.last().cloned(),
            vc,
        });
        self.context_stack.push(span.clone());
    }

    // ----- statements ------------------------------------------------------

    fn block(&mut self, stmts: &[Stmt], states: Vec<State>) -> Vec<State> {
        let mut states = states;
        for s in stmts {
            let mut next = Vec::new();
            for st in states {
                next.extend(self.stmt(s, st));
            }
            states = next;
        }
        states
    }

    fn stmt(&mut self, s: &Stmt, mut st: State) -> Vec<State> {
        match &s.kind {
            StmtKind::Null => vec![st],
            StmtKind::Assign { target, value } => {
                self.assign(&mut st, target, value);
                vec![st]
            }
            StmtKind::If {
                branches,
                otherwise,
            } => {
                let mut out = Vec::new();
                for (cond, body) in branches {
                    let c = self.expr(&mut st, &mut Ectx::checked(), cond);
                    let mut then = st.clone();
                    then.assume(c.clone(), Some(&cond.span));
                    self.push_context(&then, &cond.span);
                    out.extend(self.block(body, vec![then]));
                    self.context_stack.pop();
                    st.assume(logic::not(c), Some(&cond.span));
                }
                match otherwise {
                    Some(body) => {
                        if let Some(first) = body.first() {
                            self.push_context(&st, &first.span);
                            out.extend(self.block(body, vec![st]));
                            self.context_stack.pop();
                        }
                    }
                    None => out.push(st),
                }
                out
            }
            StmtKind::For { .. } => self.for_loop(s, st),
            StmtKind::Return(e) => {
                let result_ty = self
                    .sp
                    .and_then(|sp| self.unit.symbols.subprogram(&sp.name.name))
                    .and_then(|i| i.result.clone());
                let result = e.as_ref().map(|e| {
                    let v = self.expr(&mut st, &mut Ectx::checked(), e);
                    if let Some(ty) = &result_ty {
                        self.range_check(&mut st, &Ectx::checked(), ty, &v, e);
                    }
                    v
                });
                self.check_post(&mut st, result);
                Vec::new()
            }
            StmtKind::Assert(e) => {
                let t = self.expr(&mut st, &mut Ectx::checked(), e);
                self.emit(&mut st, &Ectx::checked(), CheckKind::Assertion, &e.span, e, None, t);
                vec![st]
            }
            StmtKind::LoopInvariant(e) => {
                // Reached only in unrolled loops, which have no invariants.
                let t = self.expr(&mut st, &mut Ectx::checked(), e);
                self.emit(&mut st, &Ectx::checked(), CheckKind::LoopInvariantInit, &e.span, e, None, t);
                vec![st]
            }
        }
    }

    fn assign(&mut self, st: &mut State, target: &Expr, value: &Expr) {
        match &target.kind {
            ExprKind::Name(id) => {
                let key = id.key();
                let info = self.var_info(&id.name).expect("resolved variable");
                if let ExprKind::Others(c) = &value.kind {
                    let c = self.expr(st, &mut Ectx::checked(), c);
                    let Some(Val::Str(s)) = st.env.get(&key).cloned() else {
                        return;
                    };
                    let fill = if s.relaxed { Term::Wrap(Box::new(c)) } else { c };
                    let m = self.array_version(&info.name, &key, s.relaxed, &s.first, &s.last);
                    st.assume(
                        logic::eq(Term::Var(m.clone()), Term::Const(Box::new(fill))),
                        Some(&target.span),
                    );
                    st.env.insert(key, Val::Str(StrVal { map: Term::Var(m), ..s }));
                    return;
                }
                let v = self.expr(st, &mut Ectx::checked(), value);
                self.range_check(st, &Ectx::checked(), &info.ty, &v, value);
                let x = self.scalar_version(&info.name, &key, &info.ty);
                st.assume(logic::eq(Term::Var(x.clone()), v), Some(&target.span));
                st.env.insert(key, Val::Scalar(Term::Var(x)));
            }
            ExprKind::Index(p, i) => {
                let Some(root) = array_root(p) else { return };
                let key = root.key();
                let info = self.var_info(&root.name).expect("resolved variable");
                let Some(Val::Str(s)) = st.env.get(&key).cloned() else {
                    return;
                };
                let mut ec = Ectx::checked();
                let idx = self.expr(st, &mut ec, i);
                let v = self.expr(st, &mut ec, value);
                self.emit(
                    st,
                    &ec,
                    CheckKind::ArrayIndex,
                    &i.span,
                    i,
                    None,
                    logic::within(idx.clone(), s.first.clone(), s.last.clone()),
                );
                let elem = if s.relaxed {
                    let o = self.new_symbol("o", "o", Sort::Char, SymRole::Scalar, None, Some(v), None);
                    Term::Wrap(Box::new(Term::Var(o)))
                } else {
                    v
                };
                let m = self.array_version(&info.name, &key, s.relaxed, &s.first, &s.last);
                st.assume(
                    logic::eq(
                        Term::Var(m.clone()),
                        Term::Set(Box::new(s.map.clone()), Box::new(idx), Box::new(elem)),
                    ),
                    Some(&target.span),
                );
                st.env.insert(key, Val::Str(StrVal { map: Term::Var(m), ..s }));
            }
            _ => {}
        }
    }

    fn check_invariants(&mut self, invs: &[Stmt], kind: CheckKind, st: &mut State) {
        for s in invs {
            if let StmtKind::LoopInvariant(e) = &s.kind {
                let t = self.expr(st, &mut Ectx::checked(), e);
                self.emit(st, &Ectx::checked(), kind, &e.span, e, None, t);
            }
        }
    }

    fn for_loop(&mut self, s: &Stmt, mut st: State) -> Vec<State> {
        let StmtKind::For {
            var, range, body, id, ..
        } = &s.kind
        else {
            unreachable!()
        };
        let shape = self.shapes.get(id).cloned().expect("loop shape");
        let decision = decide_loop(&shape, self.opts.unroll_limit);
        if !self.decisions.iter().any(|(s, _)| s.id == *id) {
            self.decisions.push((shape.clone(), decision.clone()));
        }
        let (lo, hi) = self.range(&mut st, &mut Ectx::checked(), range);
        let key = var.key();
        let ident = format!("{key}@{id}");
        let saved = st.env.get(&key).cloned();
        let restore = |mut states: Vec<State>| {
            for st in &mut states {
                match &saved {
                    Some(v) => st.env.insert(key.clone(), v.clone()),
                    None => st.env.remove(&key),
                };
            }
            states
        };
        if let LoopDecision::Unroll(n) = decision {
            let first = match &lo {
                Term::Int(v) => *v,
                _ => static_int(range_lo(range)).unwrap_or(0),
            };
            let mut states = vec![st];
            for k in 0..n as i64 {
                for st in &mut states {
                    st.env.insert(key.clone(), Val::Scalar(Term::Int(first + k)));
                }
                states = self.block(body, states);
            }
            return restore(states);
        }

        let mut out = Vec::new();
        let mut empty = st.clone();
        empty.assume(logic::lt(hi.clone(), lo.clone()), Some(&shape.loop_span));
        out.push(empty);
        st.assume(logic::le(lo.clone(), hi.clone()), Some(&shape.loop_span));

        let first_inv = body.iter().position(|s| matches!(s.kind, StmtKind::LoopInvariant(_)));
        let (pre, invs, post) = match first_inv {
            Some(i) => {
                let n = body[i..]
                    .iter()
                    .take_while(|s| matches!(s.kind, StmtKind::LoopInvariant(_)))
                    .count();
                (&body[..i], &body[i..i + n], &body[i + n..])
            }
            None => (&body[..0], &body[..0], &body[..]),
        };

        // First iteration up to the invariants.
        if !invs.is_empty() {
            let mut init = st.clone();
            let j = self.scalar_version(&var.name, &ident, &Ty::integer());
            init.assume(logic::eq(Term::Var(j.clone()), lo.clone()), Some(&var.span));
            init.env.insert(key.clone(), Val::Scalar(Term::Var(j)));
            for mut s in self.block(pre, vec![init]) {
                self.check_invariants(invs, CheckKind::LoopInvariantInit, &mut s);
            }
        }

        // An arbitrary iteration, from the invariants on.
        let mut cut = st;
        cut.cut = true;
        for w in write_set(body) {
            let Some(info) = self.var_info(&w) else { continue };
            match cut.env.get(&w).cloned() {
                Some(Val::Str(s)) => {
                    let m = self.array_version(&info.name, &w, s.relaxed, &s.first, &s.last);
                    cut.env.insert(w, Val::Str(StrVal { map: Term::Var(m), ..s }));
                }
                Some(Val::Scalar(_)) => {
                    let x = self.scalar_version(&info.name, &w, &info.ty);
                    cut.env.insert(w, Val::Scalar(Term::Var(x)));
                }
                None => {}
            }
        }
        let j = self.scalar_version(&var.name, &ident, &Ty::integer());
        let jt = Term::Var(j);
        cut.assume(logic::within(jt.clone(), lo.clone(), hi.clone()), Some(&var.span));
        cut.env.insert(key.clone(), Val::Scalar(jt.clone()));
        for s in invs {
            if let StmtKind::LoopInvariant(e) = &s.kind {
                let t = self.expr(&mut cut, &mut Ectx::pure(), e);
                let mut parts = Vec::new();
                conjuncts(t, &mut parts);
                for p in parts {
                    cut.assume(p, Some(&e.span));
                }
            }
        }
        for ps in self.block(post, vec![cut]) {
            if !invs.is_empty() {
                let mut cont = ps.clone();
                cont.assume(logic::lt(jt.clone(), hi.clone()), Some(&shape.loop_span));
                let jn = self.scalar_version(&var.name, &ident, &Ty::integer());
                cont.assume(
                    logic::eq(Term::Var(jn.clone()), logic::add(jt.clone(), logic::int(1))),
                    Some(&var.span),
                );
                cont.env.insert(key.clone(), Val::Scalar(Term::Var(jn)));
                for mut s in self.block(pre, vec![cont]) {
                    self.check_invariants(invs, CheckKind::LoopInvariantPreserve, &mut s);
                }
            }
            let mut exit = ps;
            exit.assume(logic::eq(jt.clone(), hi.clone()), Some(&shape.loop_span));
            out.push(exit);
        }
        restore(out)
    }

    // ----- subprograms ----------------------------------------------------------

    fn subprogram(&mut self, sp: &'a Subprogram) {
        self.sp = Some(sp);
        self.shapes = loop_shapes(sp).into_iter().map(|s| (s.id, s)).collect();
        let mut st = State::default();
        self.bind_params(sp, &mut st);
        self.assume_pre(sp, &mut st);
        match &sp.body {
            Body::None => {}
            Body::Expr(e) => {
                let v = self.expr(&mut st, &mut Ectx::checked(), e);
                if let Some(ty) = self.unit.symbols.subprogram(&sp.name.name).and_then(|i| i.result.clone()) {
                    self.range_check(&mut st, &Ectx::checked(), &ty, &v, e);
                }
                self.check_post(&mut st, Some(v));
            }
            Body::Stmts {
                locals,
                stmts,
                begin_span,
                ..
            } => {
                self.push_context(&st, begin_span);
                for l in locals {
                    let key = l.name.key();
                    let info = self.var_info(&l.name.name).expect("resolved local");
                    let val = match (&info.ty, info.bounds) {
                        (Ty::Str, Some((lo, hi))) => {
                            let (first, last) = (logic::int(lo), logic::int(hi));
                            let m = self.array_version(&info.name, &key, info.relaxed, &first, &last);
                            Val::Str(StrVal {
                                map: Term::Var(m),
                                first,
                                last,
                                relaxed: info.relaxed,
                                root: Some(info.name.clone()),
                            })
                        }
                        (ty, _) => Val::Scalar(Term::Var(self.scalar_version(&info.name, &key, ty))),
                    };
                    st.env.insert(key, val);
                    if let Some(init) = &l.init {
                        let target = Expr::new(ExprKind::Name(l.name.clone()), l.name.span.clone());
                        self.assign(&mut st, &target, init);
                    }
                }
                let ends = self.block(stmts, vec![st]);
                self.context_stack.pop();
                if sp.kind == SubprogramKind::Procedure {
                    for mut st in ends {
                        self.check_post(&mut st, None);
                    }
                }
            }
        }
    }

    fn finish(self, sp: &Subprogram) -> SubprogramVcs {
        // Obligations in source order, numbered among equal locations.
        let mut keys: Vec<(SourceSpan, CheckKind, Option<String>)> = Vec::new();
        let mut exprs = Vec::new();
        for e in &self.emitted {
            let k = (e.span.clone(), e.kind, e.variable.clone());
            if !keys.contains(&k) {
                keys.push(k);
                exprs.push(e.expr.clone());
            }
        }
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by(|&a, &b| {
            let (sa, ka, _) = &keys[a];
            let (sb, kb, _) = &keys[b];
            (&sa.file, sa.line, sa.column, ka, sa.length).cmp(&(&sb.file, sb.line, sb.column, kb, sb.length))
        });
        let mut obligations = Vec::new();
        let mut index_of = HashMap::new();
        for &i in &order {
            let (span, kind, variable) = &keys[i];
            let ordinal = obligations
                .iter()
                .filter(|o: &&CheckObligation| {
                    o.kind == *kind && o.span.file == span.file && o.span.line == span.line && o.span.column == span.column
                })
                .count();
            index_of.insert(i, obligations.len());
            obligations.push(CheckObligation {
                id: format!("{}:{}:{}:{}:{}", span.file, span.line, span.column, kind.name(), ordinal),
                kind: *kind,
                span: span.clone(),
                expr: exprs[i].clone(),
                subprogram: sp.name.name.clone(),
                variable: variable.clone(),
            });
        }
        let vcs = self
            .emitted
            .into_iter()
            .map(|e| {
                let k = (e.span.clone(), e.kind, e.variable.clone());
                let i = keys.iter().position(|x| *x == k).unwrap();
                CheckVc {
                    obligation: index_of[&i],
                    vc: e.vc,
                    property: e.property,
                    and_lefts: e.and_lefts,
                }
            })
            .collect();
        let mut loops = self.decisions;
        loops.sort_by_key(|(s, _)| s.id);
        SubprogramVcs {
            subprogram: sp.name.name.clone(),
            obligations,
            vcs,
            contexts: self.contexts,
            loops,
        }
    }
}

fn range_lo(r: &RangeSpec) -> &Expr {
    match r {
        RangeSpec::Bounds(lo, _) => lo,
        RangeSpec::Of(p) => p,
    }
}

/// The prover's view of every function of the unit: contracts always,
/// bodies of expression functions when available for proof.
pub fn function_table(
    unit: &ResolvedUnit,
    graph: &CallGraph,
    classes: &BTreeMap<String, FunctionClass>,
) -> Arc<FunTable> {
    let mut table = FunTable::default();
    let mut gen = Gen::new(unit, graph, Arc::new(FunTable::default()), GenOptions::default(), "t");
    for sp in unit.unit.subprograms() {
        if sp.kind != SubprogramKind::Function {
            continue;
        }
        let key = fun_key(&sp.name.name);
        if table.funs.contains_key(&key) {
            continue;
        }
        gen.sp = Some(sp);
        let mut st = State::default();
        let mut params = Vec::new();
        let mut param_sorts = Vec::new();
        for p in &sp.params {
            let Some(var) = unit.symbols.variable(&sp.name.name, &p.name.name) else {
                continue;
            };
            let pkey = p.name.key();
            if var.ty == Ty::Str {
                let elem = if var.relaxed { Elem::Wrapper } else { Elem::Char };
                let m = gen.binder(&var.name);
                let f = gen.binder(&format!("{}'First", var.name));
                let l = gen.binder(&format!("{}'Last", var.name));
                params.extend([m.clone(), f.clone(), l.clone()]);
                param_sorts.extend([Sort::Array(elem), Sort::Int, Sort::Int]);
                st.env.insert(
                    pkey,
                    Val::Str(StrVal {
                        map: Term::Var(m),
                        first: Term::Var(f),
                        last: Term::Var(l),
                        relaxed: var.relaxed,
                        root: Some(var.name.clone()),
                    }),
                );
            } else {
                let x = gen.binder(&var.name);
                params.push(x.clone());
                param_sorts.push(sort_of(&var.ty));
                st.env.insert(pkey, Val::Scalar(Term::Var(x)));
            }
        }
        let info = unit.symbols.subprogram(&sp.name.name);
        let result_ty = info.and_then(|i| i.result.clone()).unwrap_or(Ty::Bool);
        let result_sym = gen.binder(&format!("{}'Result", sp.name.name));
        let pre = sp
            .aspects
            .pre
            .as_ref()
            .map(|e| gen.expr(&mut st, &mut Ectx::pure(), e));
        let available = classes
            .get(&sp.name.key())
            .is_some_and(|c| c.body_available_for_proof);
        let def = match (&sp.body, available) {
            (Body::Expr(e), true) => Some(gen.expr(&mut st, &mut Ectx::pure(), e)),
            _ => None,
        };
        st.env.insert("'result".into(), Val::Scalar(Term::Var(result_sym.clone())));
        let post = sp
            .aspects
            .post
            .as_ref()
            .map(|e| gen.expr(&mut st, &mut Ectx::pure(), e));
        table.funs.insert(
            key,
            FunDecl {
                name: sp.name.name.clone(),
                params,
                param_sorts,
                result: sort_of(&result_ty),
                result_range: range_of(&result_ty),
                pre,
                post,
                result_sym,
                def,
            },
        );
    }
    Arc::new(table)
}

/// Check obligations and VCs of one subprogram.
pub fn generate(
    unit: &ResolvedUnit,
    graph: &CallGraph,
    funs: Arc<FunTable>,
    subprogram: &str,
    opts: &GenOptions,
) -> Option<SubprogramVcs> {
    let sp = unit
        .unit
        .subprograms()
        .find(|s| s.name.is(subprogram) && s.body != Body::None)?;
    let mut gen = Gen::new(unit, graph, funs, opts.clone(), "");
    gen.subprogram(sp);
    Some(gen.finish(sp))
}
