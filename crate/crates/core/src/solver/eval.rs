use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::vcgen::logic::{LOp, Sym, Term};
use crate::vcgen::FunTable;

/// A concrete array: a default element plus the cells that differ from it.
/// Cells equal to the default are never stored, so structural equality is
/// extensional equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrVal {
    pub default: SVal,
    pub cells: BTreeMap<i64, SVal>,
}

impl ArrVal {
    pub fn constant(default: SVal) -> ArrVal {
        ArrVal {
            default,
            cells: BTreeMap::new(),
        }
    }

    pub fn get(&self, i: i64) -> &SVal {
        self.cells.get(&i).unwrap_or(&self.default)
    }

    pub fn set(&self, i: i64, v: SVal) -> ArrVal {
        let mut out = self.clone();
        if v == out.default {
            out.cells.remove(&i);
        } else {
            out.cells.insert(i, v);
        }
        out
    }

    fn map(&self, f: impl Fn(&SVal) -> SVal) -> ArrVal {
        let default = f(&self.default);
        let mut out = ArrVal::constant(default);
        for (k, v) in &self.cells {
            out = out.set(*k, f(v));
        }
        out
    }
}

/// Values of the logic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SVal {
    Int(i64),
    Bool(bool),
    Char(char),
    /// Initialization wrapper: value and init flag.
    Wrap(char, bool),
    Arr(Arc<ArrVal>),
}

impl SVal {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            SVal::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            SVal::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for SVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SVal::Int(v) => write!(f, "{v}"),
            SVal::Bool(true) => f.write_str("True"),
            SVal::Bool(false) => f.write_str("False"),
            SVal::Char(c) => write!(f, "'{c}'"),
            SVal::Wrap(c, true) => write!(f, "'{c}'"),
            SVal::Wrap(_, false) => f.write_str("?"),
            SVal::Arr(a) => {
                f.write_str("[")?;
                for (i, (k, v)) in a.cells.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k} => {v}")?;
                }
                if !a.cells.is_empty() {
                    f.write_str(", ")?;
                }
                write!(f, "others => {}]", a.default)
            }
        }
    }
}

pub type AppKey = (Sym, Vec<SVal>);

/// Why a term could not be evaluated yet.
#[derive(Clone, Debug, PartialEq)]
pub enum Need {
    Var(Sym),
    Choice(AppKey),
    Resource,
    Ill(String),
}

type R<T> = Result<T, Need>;

/// Evaluates terms under a partial assignment.
pub struct Evaluator<'a> {
    pub assign: &'a HashMap<Sym, SVal>,
    pub defs: &'a HashMap<Sym, Term>,
    pub funs: &'a FunTable,
    pub apps: &'a HashMap<AppKey, SVal>,
    pub quant_limit: i64,
}

const MAX_CALL_DEPTH: usize = 200;

impl Evaluator<'_> {
    pub fn eval(&self, t: &Term) -> R<SVal> {
        let mut local = Vec::new();
        self.ev(t, &mut local, 0)
    }

    pub fn eval_bool(&self, t: &Term) -> R<bool> {
        self.eval(t)?
            .as_bool()
            .ok_or_else(|| Need::Ill("expected a Boolean".into()))
    }

    fn int(&self, t: &Term, local: &mut Vec<(Sym, SVal)>, depth: usize) -> R<i64> {
        self.ev(t, local, depth)?
            .as_int()
            .ok_or_else(|| Need::Ill("expected an integer".into()))
    }

    fn boolean(&self, t: &Term, local: &mut Vec<(Sym, SVal)>, depth: usize) -> R<bool> {
        self.ev(t, local, depth)?
            .as_bool()
            .ok_or_else(|| Need::Ill("expected a Boolean".into()))
    }

    fn arr(&self, t: &Term, local: &mut Vec<(Sym, SVal)>, depth: usize) -> R<Arc<ArrVal>> {
        match self.ev(t, local, depth)? {
            SVal::Arr(a) => Ok(a),
            v => Err(Need::Ill(format!("expected an array, found {v}"))),
        }
    }

    fn ev(&self, t: &Term, local: &mut Vec<(Sym, SVal)>, depth: usize) -> R<SVal> {
        Ok(match t {
            Term::Int(v) => SVal::Int(*v),
            Term::Bool(b) => SVal::Bool(*b),
            Term::Char(c) => SVal::Char(*c),
            Term::Label(_, t) => return self.ev(t, local, depth),
            Term::Var(s) => {
                if let Some((_, v)) = local.iter().rev().find(|(k, _)| k == s) {
                    return Ok(v.clone());
                }
                if let Some(v) = self.assign.get(s) {
                    return Ok(v.clone());
                }
                match self.defs.get(s) {
                    Some(d) => return self.ev(d, &mut Vec::new(), depth),
                    None => return Err(Need::Var(s.clone())),
                }
            }
            Term::Lit(text) => {
                let mut a = ArrVal::constant(SVal::Char(' '));
                for (i, c) in text.chars().enumerate() {
                    a = a.set(i as i64 + 1, SVal::Char(c));
                }
                SVal::Arr(Arc::new(a))
            }
            Term::Not(a) => SVal::Bool(!self.boolean(a, local, depth)?),
            Term::Neg(a) => SVal::Int(-self.int(a, local, depth)?),
            Term::Bin(op, a, b) => return self.binary(*op, a, b, local, depth),
            Term::Ite(c, a, b) => {
                return if self.boolean(c, local, depth)? {
                    self.ev(a, local, depth)
                } else {
                    self.ev(b, local, depth)
                }
            }
            Term::Quant {
                all,
                var,
                lo,
                hi,
                body,
            } => {
                let lo = self.int(lo, local, depth)?;
                let hi = self.int(hi, local, depth)?;
                if hi - lo + 1 > self.quant_limit {
                    return Err(Need::Resource);
                }
                let mut pending = None;
                for k in lo..=hi {
                    local.push((var.clone(), SVal::Int(k)));
                    let r = self.boolean(body, local, depth);
                    local.pop();
                    match r {
                        Ok(b) if b != *all => return Ok(SVal::Bool(!*all)),
                        Ok(_) => {}
                        Err(e) => {
                            if pending.is_none() {
                                pending = Some(e);
                            }
                        }
                    }
                }
                if let Some(e) = pending {
                    return Err(e);
                }
                SVal::Bool(*all)
            }
            Term::App(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.ev(a, local, depth)?);
                }
                let decl = self
                    .funs
                    .get(f)
                    .ok_or_else(|| Need::Ill(format!("unknown function {f}")))?;
                match &decl.def {
                    Some(def) => {
                        if depth >= MAX_CALL_DEPTH {
                            return Err(Need::Resource);
                        }
                        let mut inner: Vec<(Sym, SVal)> = decl.params.iter().cloned().zip(vals).collect();
                        return stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || {
                            self.ev(def, &mut inner, depth + 1)
                        });
                    }
                    None => {
                        let key = (f.clone(), vals);
                        match self.apps.get(&key) {
                            Some(v) => v.clone(),
                            None => return Err(Need::Choice(key)),
                        }
                    }
                }
            }
            Term::Get(m, i) => {
                let m = self.arr(m, local, depth)?;
                let i = self.int(i, local, depth)?;
                m.get(i).clone()
            }
            Term::Set(m, i, v) => {
                let m = self.arr(m, local, depth)?;
                let i = self.int(i, local, depth)?;
                let v = self.ev(v, local, depth)?;
                SVal::Arr(Arc::new(m.set(i, v)))
            }
            Term::Const(v) => SVal::Arr(Arc::new(ArrVal::constant(self.ev(v, local, depth)?))),
            Term::Wrap(v) => match self.ev(v, local, depth)? {
                SVal::Char(c) => SVal::Wrap(c, true),
                v => return Err(Need::Ill(format!("cannot wrap {v}"))),
            },
            Term::InitOf(w) => match self.ev(w, local, depth)? {
                SVal::Wrap(_, init) => SVal::Bool(init),
                v => return Err(Need::Ill(format!("not a wrapper: {v}"))),
            },
            Term::ValOf(w) => match self.ev(w, local, depth)? {
                SVal::Wrap(c, _) => SVal::Char(c),
                v => return Err(Need::Ill(format!("not a wrapper: {v}"))),
            },
            Term::Unwrap(m) => {
                let m = self.arr(m, local, depth)?;
                SVal::Arr(Arc::new(m.map(|v| match v {
                    SVal::Wrap(c, _) => SVal::Char(*c),
                    v => v.clone(),
                })))
            }
        })
    }

    fn binary(&self, op: LOp, a: &Term, b: &Term, local: &mut Vec<(Sym, SVal)>, depth: usize) -> R<SVal> {
        let bool_op = |x: bool| -> Option<bool> {
            match (op, x) {
                (LOp::And, false) => Some(false),
                (LOp::Or, true) => Some(true),
                (LOp::Implies, false) => Some(true),
                _ => None,
            }
        };
        if matches!(op, LOp::And | LOp::Or | LOp::Implies) {
            // Either operand may decide the result on its own.
            let x = self.boolean(a, local, depth);
            if let Ok(x) = x {
                if let Some(r) = bool_op(x) {
                    return Ok(SVal::Bool(r));
                }
            }
            let y = self.boolean(b, local, depth);
            if let Ok(y) = y {
                let decided = match op {
                    LOp::And => !y,
                    LOp::Or | LOp::Implies => y,
                    _ => false,
                };
                if decided {
                    return Ok(SVal::Bool(op != LOp::And));
                }
            }
            let (x, y) = (x?, y?);
            return Ok(SVal::Bool(match op {
                LOp::And => x && y,
                LOp::Or => x || y,
                _ => !x || y,
            }));
        }
        let x = self.ev(a, local, depth)?;
        let y = self.ev(b, local, depth)?;
        Ok(match op {
            LOp::Eq => SVal::Bool(x == y),
            LOp::Ne => SVal::Bool(x != y),
            _ => {
                let (SVal::Int(p), SVal::Int(q)) = (&x, &y) else {
                    let cmp = x.cmp(&y);
                    return Ok(SVal::Bool(match op {
                        LOp::Lt => cmp.is_lt(),
                        LOp::Le => cmp.is_le(),
                        LOp::Gt => cmp.is_gt(),
                        LOp::Ge => cmp.is_ge(),
                        _ => return Err(Need::Ill(format!("arithmetic on {x} and {y}"))),
                    }));
                };
                let (p, q) = (*p, *q);
                match op {
                    LOp::Add => SVal::Int(p.checked_add(q).ok_or(Need::Resource)?),
                    LOp::Sub => SVal::Int(p.checked_sub(q).ok_or(Need::Resource)?),
                    LOp::Mul => SVal::Int(p.checked_mul(q).ok_or(Need::Resource)?),
                    LOp::Div => SVal::Int(if q == 0 { 0 } else { p / q }),
                    LOp::Lt => SVal::Bool(p < q),
                    LOp::Le => SVal::Bool(p <= q),
                    LOp::Gt => SVal::Bool(p > q),
                    LOp::Ge => SVal::Bool(p >= q),
                    _ => unreachable!(),
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vcgen::logic;

    fn ev(t: &Term, assign: &[(&str, SVal)]) -> R<SVal> {
        let assign: HashMap<Sym, SVal> = assign.iter().map(|(k, v)| (Arc::from(*k), v.clone())).collect();
        let defs = HashMap::new();
        let funs = FunTable::default();
        let apps = HashMap::new();
        Evaluator {
            assign: &assign,
            defs: &defs,
            funs: &funs,
            apps: &apps,
            quant_limit: 256,
        }
        .eval(t)
    }

    fn v(n: &str) -> Term {
        Term::Var(Arc::from(n))
    }

    #[test]
    fn wrapper_laws() {
        let a = SVal::Arr(Arc::new(ArrVal::constant(SVal::Wrap('a', false))));
        let set = Term::Set(
            Box::new(v("S")),
            Box::new(v("i")),
            Box::new(Term::Wrap(Box::new(Term::Char(' ')))),
        );
        let init_at = |j: i64| Term::InitOf(Box::new(logic::get(set.clone(), logic::int(j))));
        let env = [("S", a), ("i", SVal::Int(2))];
        assert_eq!(ev(&init_at(2), &env), Ok(SVal::Bool(true)));
        assert_eq!(ev(&init_at(3), &env), Ok(SVal::Bool(false)));
        let val = Term::ValOf(Box::new(logic::get(set.clone(), logic::int(2))));
        assert_eq!(ev(&val, &env), Ok(SVal::Char(' ')));
    }

    #[test]
    fn short_circuit_decides_with_unknowns() {
        let t = logic::and(logic::eq(v("x"), logic::int(1)), v("unknown"));
        assert_eq!(ev(&t, &[("x", SVal::Int(0))]), Ok(SVal::Bool(false)));
        assert_eq!(ev(&t, &[("x", SVal::Int(1))]), Err(Need::Var(Arc::from("unknown"))));
    }

    #[test]
    fn arrays_compare_extensionally() {
        let a = ArrVal::constant(SVal::Char(' ')).set(1, SVal::Char('a')).set(1, SVal::Char(' '));
        assert_eq!(a, ArrVal::constant(SVal::Char(' ')));
    }

    #[test]
    fn division_truncates() {
        let t = logic::bin(LOp::Div, logic::int(-7), logic::int(2));
        assert_eq!(ev(&t, &[]), Ok(SVal::Int(-3)));
    }
}
