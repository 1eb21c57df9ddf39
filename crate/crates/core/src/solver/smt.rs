//! SMT-LIB2 rendering of VCs, for use with external provers.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::vcgen::logic::{LOp, Sort, Sym, Term};
use crate::vcgen::{Elem, FunDecl, Vc};

fn sym(s: &str) -> String {
    format!("|{}|", s.replace(['|', '\\'], "_"))
}

fn sort(s: Sort) -> &'static str {
    match s {
        Sort::Int | Sort::Char => "Int",
        Sort::Bool => "Bool",
        Sort::Wrapper => "character__init_wrapper",
        Sort::Array(Elem::Char) => "(Array Int Int)",
        Sort::Array(Elem::Wrapper) => "(Array Int character__init_wrapper)",
    }
}

#[derive(Default)]
struct Ctx {
    unwraps: Vec<(String, String)>,
    funs: BTreeSet<Sym>,
}

fn term(t: &Term, cx: &mut Ctx) -> String {
    let mut t1 = |x: &Term| term(x, cx);
    match t {
        Term::Int(v) if *v < 0 => format!("(- {})", -v),
        Term::Int(v) => v.to_string(),
        Term::Bool(b) => b.to_string(),
        Term::Char(c) => (*c as u32).to_string(),
        Term::Var(s) => sym(s),
        Term::Label(_, x) => t1(x),
        Term::Not(a) => format!("(not {})", t1(a)),
        Term::Neg(a) => format!("(- {})", t1(a)),
        Term::Bin(op, a, b) => {
            let (a, b) = (term(a, cx), term(b, cx));
            match op {
                LOp::Ne => format!("(not (= {a} {b}))"),
                _ => {
                    let o = match op {
                        LOp::Add => "+",
                        LOp::Sub => "-",
                        LOp::Mul => "*",
                        LOp::Div => "div",
                        LOp::Eq => "=",
                        LOp::Lt => "<",
                        LOp::Le => "<=",
                        LOp::Gt => ">",
                        LOp::Ge => ">=",
                        LOp::And => "and",
                        LOp::Or => "or",
                        LOp::Implies => "=>",
                        LOp::Ne => unreachable!(),
                    };
                    format!("({o} {a} {b})")
                }
            }
        }
        Term::Ite(c, a, b) => format!("(ite {} {} {})", term(c, cx), term(a, cx), term(b, cx)),
        Term::Quant {
            all,
            var,
            lo,
            hi,
            body,
        } => {
            let v = sym(var);
            let range = format!("(and (<= {} {v}) (<= {v} {}))", term(lo, cx), term(hi, cx));
            let body = term(body, cx);
            if *all {
                format!("(forall (({v} Int)) (=> {range} {body}))")
            } else {
                format!("(exists (({v} Int)) (and {range} {body}))")
            }
        }
        Term::App(f, args) => {
            cx.funs.insert(f.clone());
            if args.is_empty() {
                sym(f)
            } else {
                let args: Vec<String> = args.iter().map(|a| term(a, cx)).collect();
                format!("({} {})", sym(f), args.join(" "))
            }
        }
        Term::Get(m, i) => format!("(select {} {})", term(m, cx), term(i, cx)),
        Term::Set(m, i, v) => format!("(store {} {} {})", term(m, cx), term(i, cx), term(v, cx)),
        Term::Const(v) => {
            // Element sort follows the value: wrappers are built with `mk`.
            let elem = if matches!(**v, Term::Wrap(_)) {
                "character__init_wrapper"
            } else {
                "Int"
            };
            format!("((as const (Array Int {elem})) {})", term(v, cx))
        }
        Term::Lit(text) => {
            let mut s = "((as const (Array Int Int)) 32)".to_string();
            for (i, c) in text.chars().enumerate() {
                s = format!("(store {s} {} {})", i + 1, c as u32);
            }
            s
        }
        Term::Wrap(v) => format!("(|character__init_wrapper'mk| {} true)", term(v, cx)),
        Term::InitOf(w) => format!("(__attr__init {})", term(w, cx)),
        Term::ValOf(w) => format!("(rec__value {})", term(w, cx)),
        Term::Unwrap(m) => {
            let inner = term(m, cx);
            if let Some((name, _)) = cx.unwraps.iter().find(|(_, src)| *src == inner) {
                return name.clone();
            }
            let name = format!("|unwrap{}|", cx.unwraps.len());
            cx.unwraps.push((name.clone(), inner));
            name
        }
    }
}

fn fun_decl(f: &Sym, d: &FunDecl, cx: &mut Ctx, out: &mut String) {
    let params: Vec<String> = d
        .params
        .iter()
        .zip(&d.param_sorts)
        .map(|(p, s)| format!("({} {})", sym(p), sort(*s)))
        .collect();
    let call = if d.params.is_empty() {
        sym(f)
    } else {
        format!(
            "({} {})",
            sym(f),
            d.params.iter().map(|p| sym(p)).collect::<Vec<_>>().join(" ")
        )
    };
    match &d.def {
        Some(def) => {
            let body = term(def, cx);
            let _ = writeln!(
                out,
                "(define-fun-rec {} ({}) {} {body})",
                sym(f),
                params.join(" "),
                sort(d.result)
            );
        }
        None => {
            let sorts: Vec<&str> = d.param_sorts.iter().map(|s| sort(*s)).collect();
            let _ = writeln!(out, "(declare-fun {} ({}) {})", sym(f), sorts.join(" "), sort(d.result));
        }
    }
    let mut facts = Vec::new();
    if let Some((lo, hi)) = d.result_range {
        facts.push(format!("(and (<= {lo} {call}) (<= {call} {hi}))"));
    }
    if let Some(post) = &d.post {
        let subst = std::collections::HashMap::from([(d.result_sym.clone(), Term::Var(f.clone()))]);
        let mut p = term(&post.subst(&subst), cx);
        if !d.params.is_empty() {
            p = p.replace(&sym(f), &call);
        }
        match &d.pre {
            Some(pre) => facts.push(format!("(=> {} {p})", term(pre, cx))),
            None => facts.push(p),
        }
    }
    for fact in facts {
        if params.is_empty() {
            let _ = writeln!(out, "(assert {fact})");
        } else {
            let _ = writeln!(out, "(assert (forall ({}) {fact}))", params.join(" "));
        }
    }
}

/// SMT-LIB2 script whose satisfiability means the VC has a counterexample.
pub fn export_smtlib(vc: &Vc) -> String {
    let mut cx = Ctx::default();
    let names = vc.names();
    let mut body = String::new();
    let mut named = 0;
    for s in &vc.symbols {
        match &s.def {
            Some(d) => {
                let d = term(d, &mut cx);
                let _ = writeln!(body, "(define-fun {} () {} {d})", sym(&s.id), sort(s.sort));
            }
            None => {
                let _ = writeln!(body, "(declare-fun {} () {})", sym(&s.id), sort(s.sort));
            }
        }
        if let Some((lo, hi)) = s.range {
            let v = sym(&s.id);
            let _ = writeln!(body, "(assert (and (<= {lo} {v}) (<= {v} {hi})))");
        }
    }
    for h in &vc.hypotheses {
        named += 1;
        let f = term(&h.formula, &mut cx);
        let _ = writeln!(body, "(assert (! {f} :named H{named}))");
    }
    let goal = term(&vc.goal, &mut cx);
    let _ = writeln!(body, "(assert (not {goal}))");
    let _ = writeln!(body, "(check-sat)\n(get-model)");

    let mut out = String::new();
    for s in &vc.symbols {
        if let Some(n) = names.get(&s.id) {
            let _ = writeln!(out, "; {} is {n}", sym(&s.id));
        }
    }
    let _ = writeln!(out, "(set-option :produce-models true)");
    let _ = writeln!(out, "(set-logic ALL)");
    let _ = writeln!(
        out,
        "(declare-datatypes ((character__init_wrapper 0)) ((({} (rec__value Int) (__attr__init Bool)))))",
        sym("character__init_wrapper'mk")
    );
    let mut decls = String::new();
    let mut done = BTreeSet::new();
    while let Some(f) = cx.funs.iter().find(|f| !done.contains(*f)).cloned() {
        done.insert(f.clone());
        if let Some(d) = vc.functions.get(&f) {
            fun_decl(&f, d, &mut cx, &mut decls);
        }
    }
    for (name, src) in &cx.unwraps {
        let _ = writeln!(decls, "(declare-fun {name} () (Array Int Int))");
        let _ = writeln!(
            decls,
            "(assert (forall ((i Int)) (= (select {name} i) (rec__value (select {src} i)))))"
        );
    }
    out.push_str(&decls);
    out.push_str(&body);
    out
}
