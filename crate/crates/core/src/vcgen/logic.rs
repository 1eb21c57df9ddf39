//! Logical terms shared by the VC generator, the solver and the explorer.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

/// Internal, unique symbol identifier.
pub type Sym = Arc<str>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Elem {
    Char,
    Wrapper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sort {
    Int,
    Bool,
    Char,
    Wrapper,
    Array(Elem),
}

impl Sort {
    pub fn elem_sort(elem: Elem) -> Sort {
        match elem {
            Elem::Char => Sort::Char,
            Elem::Wrapper => Sort::Wrapper,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "int",
            Sort::Bool => "bool",
            Sort::Char => "character",
            Sort::Wrapper => "character__init_wrapper",
            Sort::Array(Elem::Char) => "int -> character",
            Sort::Array(Elem::Wrapper) => "int -> character__init_wrapper",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
}

impl LOp {
    fn symbol(self) -> &'static str {
        match self {
            LOp::Add => "+",
            LOp::Sub => "-",
            LOp::Mul => "*",
            LOp::Div => "div",
            LOp::Eq => "=",
            LOp::Ne => "<>",
            LOp::Lt => "<",
            LOp::Le => "<=",
            LOp::Gt => ">",
            LOp::Ge => ">=",
            LOp::And => "/\\",
            LOp::Or => "\\/",
            LOp::Implies => "->",
        }
    }

    fn prec(self) -> u8 {
        match self {
            LOp::Implies => 1,
            LOp::Or => 2,
            LOp::And => 3,
            LOp::Eq | LOp::Ne | LOp::Lt | LOp::Le | LOp::Gt | LOp::Ge => 5,
            LOp::Add | LOp::Sub => 6,
            LOp::Mul | LOp::Div => 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Int(i64),
    Bool(bool),
    Char(char),
    Var(Sym),
    Not(Box<Term>),
    Neg(Box<Term>),
    Bin(LOp, Box<Term>, Box<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
    /// `forall var in lo .. hi => body` (`all`), or the existential form.
    Quant {
        all: bool,
        var: Sym,
        lo: Box<Term>,
        hi: Box<Term>,
        body: Box<Term>,
    },
    /// Application of a source-level function; string arguments are passed
    /// as (map, first, last).
    App(Sym, Vec<Term>),
    /// `get2 map index`
    Get(Box<Term>, Box<Term>),
    /// `set2 map index value`
    Set(Box<Term>, Box<Term>, Box<Term>),
    /// Constant map.
    Const(Box<Term>),
    /// Map of a string literal, indexed from 1.
    Lit(Arc<str>),
    /// `to_wrapper x`
    Wrap(Box<Term>),
    /// `__attr__init w`
    InitOf(Box<Term>),
    /// `rec__value w`
    ValOf(Box<Term>),
    /// Pointwise `rec__value` over a wrapper map.
    Unwrap(Box<Term>),
    /// Source text of the property this term was translated from.
    Label(Arc<str>, Box<Term>),
}

pub fn int(v: i64) -> Term {
    Term::Int(v)
}

pub fn var(s: &Sym) -> Term {
    Term::Var(s.clone())
}

pub fn bin(op: LOp, a: Term, b: Term) -> Term {
    Term::Bin(op, Box::new(a), Box::new(b))
}

pub fn and(a: Term, b: Term) -> Term {
    match (&a, &b) {
        (Term::Bool(true), _) => b,
        (_, Term::Bool(true)) => a,
        _ => bin(LOp::And, a, b),
    }
}

pub fn and_all(terms: impl IntoIterator<Item = Term>) -> Term {
    terms.into_iter().fold(Term::Bool(true), and)
}

pub fn or(a: Term, b: Term) -> Term {
    bin(LOp::Or, a, b)
}

pub fn implies(a: Term, b: Term) -> Term {
    match (&a, &b) {
        (Term::Bool(true), _) => b,
        (_, Term::Bool(true)) => Term::Bool(true),
        _ => bin(LOp::Implies, a, b),
    }
}

pub fn not(a: Term) -> Term {
    Term::Not(Box::new(a))
}

pub fn eq(a: Term, b: Term) -> Term {
    bin(LOp::Eq, a, b)
}

pub fn le(a: Term, b: Term) -> Term {
    bin(LOp::Le, a, b)
}

pub fn lt(a: Term, b: Term) -> Term {
    bin(LOp::Lt, a, b)
}

pub fn add(a: Term, b: Term) -> Term {
    bin(LOp::Add, a, b)
}

pub fn sub(a: Term, b: Term) -> Term {
    bin(LOp::Sub, a, b)
}

pub fn ite(c: Term, a: Term, b: Term) -> Term {
    Term::Ite(Box::new(c), Box::new(a), Box::new(b))
}

pub fn get(m: Term, i: Term) -> Term {
    Term::Get(Box::new(m), Box::new(i))
}

/// `lo <= x /\ x <= hi`
pub fn within(x: Term, lo: Term, hi: Term) -> Term {
    and(le(lo, x.clone()), le(x, hi))
}

/// Length of the range `first .. last`.
pub fn length(first: Term, last: Term) -> Term {
    ite(
        le(first.clone(), last.clone()),
        add(sub(last, first), int(1)),
        int(0),
    )
}

impl Term {
    /// Drops labels at the root.
    pub fn unlabel(&self) -> &Term {
        match self {
            Term::Label(_, t) => t.unlabel(),
            t => t,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Term::Label(l, _) => Some(l),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Int(_) | Term::Bool(_) | Term::Char(_) | Term::Var(_) | Term::Lit(_) => vec![],
            Term::Not(a)
            | Term::Neg(a)
            | Term::Const(a)
            | Term::Wrap(a)
            | Term::InitOf(a)
            | Term::ValOf(a)
            | Term::Unwrap(a)
            | Term::Label(_, a) => vec![a],
            Term::Bin(_, a, b) | Term::Get(a, b) => vec![a, b],
            Term::Ite(a, b, c) | Term::Set(a, b, c) => vec![a, b, c],
            Term::Quant { lo, hi, body, .. } => vec![lo, hi, body],
            Term::App(_, args) => args.iter().collect(),
        }
    }

    /// Free symbols, excluding quantifier binders.
    pub fn free_syms(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Term::Var(s) => {
                out.insert(s.clone());
            }
            Term::Quant {
                var, lo, hi, body, ..
            } => {
                lo.free_syms(out);
                hi.free_syms(out);
                let mut inner = BTreeSet::new();
                body.free_syms(&mut inner);
                inner.remove(var);
                out.extend(inner);
            }
            t => {
                for c in t.children() {
                    c.free_syms(out);
                }
            }
        }
    }

    pub fn mentions(&self, pred: &dyn Fn(&Term) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.mentions(pred))
    }

    pub fn subst(&self, map: &HashMap<Sym, Term>) -> Term {
        let b = |t: &Term| Box::new(t.subst(map));
        match self {
            Term::Var(s) => map.get(s).cloned().unwrap_or_else(|| self.clone()),
            Term::Int(_) | Term::Bool(_) | Term::Char(_) | Term::Lit(_) => self.clone(),
            Term::Not(a) => Term::Not(b(a)),
            Term::Neg(a) => Term::Neg(b(a)),
            Term::Const(a) => Term::Const(b(a)),
            Term::Wrap(a) => Term::Wrap(b(a)),
            Term::InitOf(a) => Term::InitOf(b(a)),
            Term::ValOf(a) => Term::ValOf(b(a)),
            Term::Unwrap(a) => Term::Unwrap(b(a)),
            Term::Label(l, a) => Term::Label(l.clone(), b(a)),
            Term::Bin(op, x, y) => Term::Bin(*op, b(x), b(y)),
            Term::Get(x, y) => Term::Get(b(x), b(y)),
            Term::Ite(x, y, z) => Term::Ite(b(x), b(y), b(z)),
            Term::Set(x, y, z) => Term::Set(b(x), b(y), b(z)),
            Term::Quant {
                all,
                var,
                lo,
                hi,
                body,
            } => Term::Quant {
                all: *all,
                var: var.clone(),
                lo: b(lo),
                hi: b(hi),
                body: b(body),
            },
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.subst(map)).collect()),
        }
    }

    /// Renders the term with `names` giving the display name of each symbol.
    pub fn show(&self, names: &dyn Fn(&Sym) -> String) -> String {
        let mut s = String::new();
        self.write(&mut s, names, 0);
        s
    }

    fn write(&self, out: &mut String, names: &dyn Fn(&Sym) -> String, ctx: u8) {
        let paren = |out: &mut String, own: u8, f: &mut dyn FnMut(&mut String)| {
            if own <= ctx {
                out.push('(');
                f(out);
                out.push(')');
            } else {
                f(out);
            }
        };
        match self {
            Term::Int(v) if *v < 0 => {
                out.push_str(&format!("({v})"));
            }
            Term::Int(v) => out.push_str(&v.to_string()),
            Term::Bool(true) => out.push_str("True"),
            Term::Bool(false) => out.push_str("False"),
            Term::Char(c) => out.push_str(&format!("'{c}'")),
            Term::Var(s) => out.push_str(&names(s)),
            Term::Lit(text) => out.push_str(&format!("{text:?}")),
            Term::Label(_, t) => t.write(out, names, ctx),
            Term::Not(a) => paren(out, 4, &mut |out| {
                out.push_str("not ");
                a.write(out, names, 4);
            }),
            Term::Neg(a) => paren(out, 8, &mut |out| {
                out.push('-');
                a.write(out, names, 8);
            }),
            Term::Bin(op, a, b) => {
                let p = op.prec();
                paren(out, p, &mut |out| {
                    // Right-associative implication; others associate left.
                    let (lp, rp) = if *op == LOp::Implies { (p, p - 1) } else { (p - 1, p) };
                    a.write(out, names, lp);
                    out.push(' ');
                    out.push_str(op.symbol());
                    out.push(' ');
                    b.write(out, names, rp);
                })
            }
            Term::Ite(c, a, b) => paren(out, 1, &mut |out| {
                out.push_str("if ");
                c.write(out, names, 0);
                out.push_str(" then ");
                a.write(out, names, 0);
                out.push_str(" else ");
                b.write(out, names, 0);
            }),
            Term::Quant {
                all,
                var,
                lo,
                hi,
                body,
            } => paren(out, 1, &mut |out| {
                // A binder whose display name collides with a free symbol of
                // the quantifier gets a numeric suffix.
                let mut free = BTreeSet::new();
                for t in [lo, hi, body] {
                    t.free_syms(&mut free);
                }
                free.remove(var);
                let taken: BTreeSet<String> = free.iter().map(|s| names(s)).collect();
                let base = names(var);
                let v = (0..)
                    .map(|i| if i == 0 { base.clone() } else { format!("{base}{i}") })
                    .find(|c| !taken.contains(c))
                    .unwrap_or(base);
                let renamed = |s: &Sym| if s == var { v.clone() } else { names(s) };
                let names: &dyn Fn(&Sym) -> String = &renamed;
                out.push_str(if *all { "forall " } else { "exists " });
                out.push_str(&format!("{v}:int. "));
                lo.write(out, names, 5);
                out.push_str(&format!(" <= {v} /\\ {v} <= "));
                hi.write(out, names, 5);
                out.push_str(if *all { " -> " } else { " /\\ " });
                body.write(out, names, if *all { 0 } else { 3 });
            }),
            Term::App(f, args) => app(out, names, ctx, f, &args.iter().collect::<Vec<_>>()),
            Term::Get(m, i) => app(out, names, ctx, "get2", &[m, i]),
            Term::Set(m, i, v) => app(out, names, ctx, "set2", &[m, i, v]),
            Term::Const(v) => app(out, names, ctx, "const", &[v]),
            Term::Wrap(v) => app(out, names, ctx, "to_wrapper", &[v]),
            Term::InitOf(v) => app(out, names, ctx, "__attr__init", &[v]),
            Term::ValOf(v) => app(out, names, ctx, "rec__value", &[v]),
            Term::Unwrap(v) => app(out, names, ctx, "of_wrapper_map", &[v]),
        }
    }
}

fn app(out: &mut String, names: &dyn Fn(&Sym) -> String, ctx: u8, f: &str, args: &[&Term]) {
    let needs = ctx >= 8 && !args.is_empty();
    if needs {
        out.push('(');
    }
    out.push_str(f);
    for a in args {
        out.push(' ');
        a.write(out, names, 8);
    }
    if needs {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(s: &Sym) -> String {
        s.to_string()
    }

    fn v(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    #[test]
    fn transcript_shapes() {
        let goal = eq(Term::InitOf(Box::new(get(v("S"), v("_f")))), Term::Bool(true));
        assert_eq!(goal.show(&names), "__attr__init (get2 S _f) = True");
        let h = eq(
            v("S"),
            Term::Set(
                Box::new(v("S1")),
                Box::new(v("J")),
                Box::new(Term::Wrap(Box::new(v("o")))),
            ),
        );
        assert_eq!(h.show(&names), "S = set2 S1 J (to_wrapper o)");
    }

    #[test]
    fn precedence() {
        let t = bin(LOp::Mul, add(v("a"), v("b")), v("c"));
        assert_eq!(t.show(&names), "(a + b) * c");
        let t = sub(v("a"), sub(v("b"), v("c")));
        assert_eq!(t.show(&names), "a - (b - c)");
        let t = implies(and(v("p"), v("q")), implies(v("r"), v("s")));
        assert_eq!(t.show(&names), "p /\\ q -> r -> s");
        assert_eq!(le(v("S'First"), v("J")).show(&names), "S'First <= J");
    }

    #[test]
    fn free_symbols_skip_binders() {
        let k: Sym = Arc::from("k");
        let t = Term::Quant {
            all: true,
            var: k.clone(),
            lo: Box::new(v("lo")),
            hi: Box::new(v("hi")),
            body: Box::new(eq(Term::Var(k), v("x"))),
        };
        let mut fs = BTreeSet::new();
        t.free_syms(&mut fs);
        let fs: Vec<String> = fs.iter().map(|s| s.to_string()).collect();
        assert_eq!(fs, ["hi", "lo", "x"]);
    }
}
