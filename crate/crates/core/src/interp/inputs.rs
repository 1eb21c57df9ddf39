use crate::sema::{SymbolTable, VarKind};
use crate::syntax::{Mode, Subprogram, Ty};

use super::{Bindings, StrValue, Value};

/// Finite input space for exhaustive runs.
#[derive(Clone, Debug)]
pub struct InputDomain {
    pub int_lo: i64,
    pub int_hi: i64,
    pub max_len: i64,
    pub max_first: i64,
    pub alphabet: Vec<char>,
}

impl Default for InputDomain {
    fn default() -> Self {
        InputDomain {
            int_lo: -4,
            int_hi: 4,
            max_len: 3,
            max_first: 3,
            alphabet: vec![' ', 'a'],
        }
    }
}

impl InputDomain {
    fn values(&self, ty: &Ty, mode: Mode) -> Vec<Value> {
        match ty {
            Ty::Int(r) => (self.int_lo.max(r.lo)..=self.int_hi.min(r.hi))
                .map(Value::Int)
                .collect(),
            Ty::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Ty::Char => self.alphabet.iter().copied().map(Value::Char).collect(),
            Ty::Str => {
                let mut out = Vec::new();
                for first in 1..=self.max_first {
                    for len in 0..=self.max_len {
                        if mode == Mode::Out {
                            out.push(Value::Str(StrValue::uninit(first, first + len - 1)));
                            continue;
                        }
                        let n = self.alphabet.len().pow(len as u32);
                        for mut k in 0..n {
                            let text: String = (0..len)
                                .map(|_| {
                                    let c = self.alphabet[k % self.alphabet.len()];
                                    k /= self.alphabet.len();
                                    c
                                })
                                .collect();
                            out.push(Value::Str(StrValue::new(first, &text)));
                        }
                    }
                }
                out
            }
            Ty::Unknown => Vec::new(),
        }
    }
}

/// Every argument binding of `sp` within `domain`. Out scalars are omitted;
/// out strings contribute only their bounds.
pub fn enumerate_inputs(sp: &Subprogram, symbols: &SymbolTable, domain: &InputDomain) -> Vec<Bindings> {
    let mut out = vec![Bindings::new()];
    for v in symbols.variables_of(&sp.name.name) {
        let VarKind::Param(mode) = v.kind else {
            continue;
        };
        if mode == Mode::Out && v.ty != Ty::Str {
            continue;
        }
        let values = domain.values(&v.ty, mode);
        let mut next = Vec::with_capacity(out.len() * values.len());
        for b in &out {
            for val in &values {
                let mut b = b.clone();
                b.insert(v.name.clone(), val.clone());
                next.push(b);
            }
        }
        out = next;
    }
    out
}
