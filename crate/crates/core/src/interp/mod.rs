//! Reference interpreter with run-time checks. It is the oracle used to
//! validate proofs and to replay counterexamples.

mod inputs;
mod replay;
mod value;

use std::collections::BTreeMap;

use serde::Serialize;

pub use inputs::{enumerate_inputs, InputDomain};
pub use replay::{model_inputs, replay, Replay, ReplayVerdict};
pub use value::{Bindings, Cell, StrValue, Value};

use crate::sema::{CallGraph, ResolvedUnit, SubprogramInfo};
use crate::syntax::*;
use crate::vcgen::CheckKind;

pub const DEFAULT_FUEL: u64 = 100_000;
pub const MAX_DEPTH: usize = 1_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Normal {
        bindings: Bindings,
        result: Option<Value>,
    },
    CheckFailure {
        kind: CheckKind,
        span: SourceSpan,
        bindings: Bindings,
    },
    UninitRead {
        span: SourceSpan,
        variable: String,
    },
    /// The precondition of the entry subprogram is false for these inputs.
    Precluded,
    /// Fuel or recursion depth exhausted.
    NonTermination,
    Error(String),
}

impl Outcome {
    pub fn failure(&self) -> Option<(CheckKind, &SourceSpan)> {
        match self {
            Outcome::CheckFailure { kind, span, .. } => Some((*kind, span)),
            _ => None,
        }
    }
}

enum Stop {
    Check {
        kind: CheckKind,
        span: SourceSpan,
        bindings: Bindings,
    },
    Uninit {
        span: SourceSpan,
        variable: String,
    },
    Exhausted,
    Precluded,
    Error(String),
    Return(Option<Value>),
}

type Eval<T> = Result<T, Stop>;

struct Slot {
    key: String,
    name: String,
    /// `None` for a scalar that was never assigned.
    value: Option<Value>,
    ty: Ty,
    relaxed: bool,
}

struct Frame<'u> {
    sp: &'u Subprogram,
    info: &'u SubprogramInfo,
    slots: Vec<Slot>,
    /// Iteration number of each enclosing loop, innermost last.
    loops: Vec<u64>,
    variant: Option<i64>,
}

impl Frame<'_> {
    fn slot(&self, key: &str) -> Option<&Slot> {
        self.slots.iter().rev().find(|s| s.key == key)
    }

    fn slot_mut(&mut self, key: &str) -> Option<&mut Slot> {
        self.slots.iter_mut().rev().find(|s| s.key == key)
    }

    fn bindings(&self) -> Bindings {
        let mut out = BTreeMap::new();
        for s in &self.slots {
            if let Some(v) = &s.value {
                out.insert(s.name.clone(), v.clone());
            }
        }
        out
    }
}

pub struct Interpreter<'u> {
    unit: &'u ResolvedUnit,
    graph: CallGraph,
    fuel: u64,
    max_depth: usize,
}

/// Runs `subprogram` on `args` with the given step budget.
pub fn run(unit: &ResolvedUnit, subprogram: &str, args: &Bindings, fuel: u64) -> Outcome {
    Interpreter::new(unit, fuel).run(subprogram, args)
}

fn in_int_range(v: i64) -> bool {
    (INT_FIRST..=INT_LAST).contains(&v)
}

impl<'u> Interpreter<'u> {
    pub fn new(unit: &'u ResolvedUnit, fuel: u64) -> Self {
        Interpreter {
            unit,
            graph: CallGraph::build(&unit.unit),
            fuel,
            max_depth: MAX_DEPTH,
        }
    }

    pub fn run(&mut self, subprogram: &str, args: &Bindings) -> Outcome {
        let Some(sp) = self.unit.unit.subprogram(subprogram) else {
            return Outcome::Error(format!("no subprogram named {subprogram}"));
        };
        let info = self.unit.symbols.subprogram(subprogram).unwrap();
        let mut frame = Frame {
            sp,
            info,
            slots: Vec::new(),
            loops: Vec::new(),
            variant: None,
        };
        for p in &sp.params {
            let var = self
                .unit
                .symbols
                .variable(&sp.name.name, &p.name.name)
                .unwrap();
            let given = args
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case(&p.name.name))
                .map(|(_, v)| v.clone());
            let value = match (p.mode, given) {
                (Mode::Out, Some(Value::Str(s))) => Some(Value::Str(StrValue::uninit(s.first, s.last))),
                (Mode::Out, _) => None,
                (_, Some(v)) => Some(v),
                (_, None) => return Outcome::Error(format!("missing argument {}", p.name)),
            };
            frame.slots.push(Slot {
                key: p.name.key(),
                name: p.name.name.clone(),
                value,
                ty: var.ty.clone(),
                relaxed: var.relaxed,
            });
        }
        let mut depth = 0;
        let result = (|| -> Eval<Option<Value>> {
            if let Some(pre) = &sp.aspects.pre {
                if !self.eval(&mut frame, pre, &mut depth)?.as_bool() {
                    return Err(Stop::Precluded);
                }
            }
            if let Some(v) = &sp.aspects.variant {
                frame.variant = Some(self.eval(&mut frame, v, &mut depth)?.as_int());
            }
            self.execute_body(&mut frame, &mut depth)
        })();
        match result {
            Ok(result) => Outcome::Normal {
                bindings: frame.bindings(),
                result,
            },
            Err(stop) => Self::outcome(stop),
        }
    }

    fn outcome(stop: Stop) -> Outcome {
        match stop {
            Stop::Check {
                kind,
                span,
                bindings,
            } => Outcome::CheckFailure {
                kind,
                span,
                bindings,
            },
            Stop::Uninit { span, variable } => Outcome::UninitRead { span, variable },
            Stop::Exhausted => Outcome::NonTermination,
            Stop::Precluded => Outcome::Precluded,
            Stop::Error(e) => Outcome::Error(e),
            Stop::Return(_) => Outcome::Error("stray return".into()),
        }
    }

    fn tick(&mut self) -> Eval<()> {
        if self.fuel == 0 {
            return Err(Stop::Exhausted);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn fail<T>(frame: &Frame, kind: CheckKind, span: &SourceSpan) -> Eval<T> {
        Err(Stop::Check {
            kind,
            span: span.clone(),
            bindings: frame.bindings(),
        })
    }

    /// Runs the body and the postcondition; returns the function result.
    fn execute_body(&mut self, frame: &mut Frame<'u>, depth: &mut usize) -> Eval<Option<Value>> {
        let sp = frame.sp;
        let result = match &sp.body {
            Body::None => return Err(Stop::Error(format!("no body for {}", sp.name))),
            Body::Expr(e) => {
                let v = self.eval(frame, e, depth)?;
                self.range_check(frame, &frame.info.result.clone().unwrap(), &v, &e.span)?;
                Some(v)
            }
            Body::Stmts { locals, stmts, .. } => {
                for l in locals {
                    let var = self
                        .unit
                        .symbols
                        .variable(&sp.name.name, &l.name.name)
                        .unwrap();
                    let mut value = match (&var.ty, var.bounds) {
                        (Ty::Str, Some((lo, hi))) => Some(Value::Str(StrValue::uninit(lo, hi))),
                        _ => None,
                    };
                    if let Some(init) = &l.init {
                        match (&init.kind, &mut value) {
                            (ExprKind::Others(c), Some(Value::Str(s))) => {
                                let c = self.eval(frame, c, depth)?;
                                let Value::Char(c) = c else { unreachable!() };
                                for cell in &mut s.cells {
                                    *cell = Cell { ch: c, init: true };
                                }
                            }
                            _ => {
                                let v = self.eval(frame, init, depth)?;
                                self.range_check(frame, &var.ty, &v, &init.span)?;
                                value = Some(v);
                            }
                        }
                    }
                    frame.slots.push(Slot {
                        key: l.name.key(),
                        name: l.name.name.clone(),
                        value,
                        ty: var.ty.clone(),
                        relaxed: var.relaxed,
                    });
                }
                match self.exec_stmts(frame, stmts, depth) {
                    Ok(()) => {
                        if sp.kind == SubprogramKind::Function {
                            return Err(Stop::Error(format!(
                                "function {} ended without return",
                                sp.name
                            )));
                        }
                        None
                    }
                    Err(Stop::Return(v)) => v,
                    Err(e) => return Err(e),
                }
            }
        };
        if let Some(post) = &sp.aspects.post {
            if let Some(r) = &result {
                frame.slots.push(Slot {
                    key: "'result".into(),
                    name: format!("{}'Result", sp.name),
                    value: Some(r.clone()),
                    ty: Ty::Unknown,
                    relaxed: false,
                });
            }
            let ok = self.eval(frame, post, depth)?.as_bool();
            if !ok {
                return Self::fail(frame, CheckKind::Postcondition, &post.span);
            }
        }
        Ok(result)
    }

    fn range_check(&self, frame: &Frame, ty: &Ty, v: &Value, span: &SourceSpan) -> Eval<()> {
        if let (Ty::Int(r), Value::Int(x)) = (ty, v) {
            if !r.contains(*x) {
                return Self::fail(frame, CheckKind::Range, span);
            }
        }
        Ok(())
    }

    fn exec_stmts(&mut self, frame: &mut Frame<'u>, stmts: &'u [Stmt], depth: &mut usize) -> Eval<()> {
        for s in stmts {
            self.exec(frame, s, depth)?;
        }
        Ok(())
    }

    fn exec(&mut self, frame: &mut Frame<'u>, s: &'u Stmt, depth: &mut usize) -> Eval<()> {
        self.tick()?;
        match &s.kind {
            StmtKind::Null => Ok(()),
            StmtKind::Assign { target, value } => match &target.kind {
                ExprKind::Name(id) => {
                    let key = id.key();
                    if let ExprKind::Others(c) = &value.kind {
                        let Value::Char(c) = self.eval(frame, c, depth)? else {
                            unreachable!()
                        };
                        let slot = frame.slot_mut(&key).unwrap();
                        let Some(Value::Str(s)) = &mut slot.value else {
                            unreachable!()
                        };
                        for cell in &mut s.cells {
                            *cell = Cell { ch: c, init: true };
                        }
                        return Ok(());
                    }
                    let v = self.eval(frame, value, depth)?;
                    let ty = frame.slot(&key).unwrap().ty.clone();
                    self.range_check(frame, &ty, &v, &value.span)?;
                    frame.slot_mut(&key).unwrap().value = Some(v);
                    Ok(())
                }
                ExprKind::Index(p, i) => {
                    let ExprKind::Name(id) = &p.kind else {
                        unreachable!()
                    };
                    let key = id.key();
                    let idx = self.eval(frame, i, depth)?.as_int();
                    let v = self.eval(frame, value, depth)?;
                    let slot = frame.slot(&key).unwrap();
                    let s = slot.value.as_ref().unwrap().as_str();
                    if !s.contains(idx) {
                        return Self::fail(frame, CheckKind::ArrayIndex, &i.span);
                    }
                    let Value::Char(c) = v else { unreachable!() };
                    let slot = frame.slot_mut(&key).unwrap();
                    let Some(Value::Str(s)) = &mut slot.value else {
                        unreachable!()
                    };
                    s.set(idx, c);
                    Ok(())
                }
                _ => Err(Stop::Error("invalid assignment target".into())),
            },
            StmtKind::If {
                branches,
                otherwise,
            } => {
                for (c, body) in branches {
                    if self.eval(frame, c, depth)?.as_bool() {
                        return self.exec_stmts(frame, body, depth);
                    }
                }
                if let Some(body) = otherwise {
                    self.exec_stmts(frame, body, depth)?;
                }
                Ok(())
            }
            StmtKind::For {
                var, range, body, ..
            } => {
                let (lo, hi) = self.eval_range(frame, range, depth)?;
                frame.loops.push(0);
                frame.slots.push(Slot {
                    key: var.key(),
                    name: var.name.clone(),
                    value: None,
                    ty: Ty::integer(),
                    relaxed: false,
                });
                let mut j = lo;
                let mut result = Ok(());
                while j <= hi {
                    frame.slots.last_mut().unwrap().value = Some(Value::Int(j));
                    result = self.exec_stmts(frame, body, depth);
                    if result.is_err() {
                        break;
                    }
                    *frame.loops.last_mut().unwrap() += 1;
                    j += 1;
                }
                frame.slots.pop();
                frame.loops.pop();
                result
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => {
                        let v = self.eval(frame, e, depth)?;
                        if let Some(ty) = &frame.info.result {
                            self.range_check(frame, ty, &v, &e.span)?;
                        }
                        Some(v)
                    }
                    None => None,
                };
                Err(Stop::Return(v))
            }
            StmtKind::Assert(e) => {
                if !self.eval(frame, e, depth)?.as_bool() {
                    return Self::fail(frame, CheckKind::Assertion, &e.span);
                }
                Ok(())
            }
            StmtKind::LoopInvariant(e) => {
                if !self.eval(frame, e, depth)?.as_bool() {
                    let kind = if frame.loops.last() == Some(&0) {
                        CheckKind::LoopInvariantInit
                    } else {
                        CheckKind::LoopInvariantPreserve
                    };
                    return Self::fail(frame, kind, &e.span);
                }
                Ok(())
            }
        }
    }

    fn eval_range(&mut self, frame: &mut Frame<'u>, r: &'u RangeSpec, depth: &mut usize) -> Eval<(i64, i64)> {
        match r {
            RangeSpec::Bounds(lo, hi) => {
                let lo = self.eval(frame, lo, depth)?.as_int();
                let hi = self.eval(frame, hi, depth)?.as_int();
                Ok((lo, hi))
            }
            RangeSpec::Of(p) => {
                let s = self.eval_array(frame, p, depth)?;
                Ok((s.first, s.last))
            }
        }
    }

    /// Evaluates a string-valued prefix without reading its elements.
    fn eval_array(&mut self, frame: &mut Frame<'u>, e: &'u Expr, depth: &mut usize) -> Eval<StrValue> {
        match &e.kind {
            ExprKind::Name(id) => {
                let slot = frame
                    .slot(&id.key())
                    .ok_or_else(|| Stop::Error(format!("unbound {id}")))?;
                Ok(slot.value.as_ref().unwrap().as_str().clone())
            }
            ExprKind::Paren(inner) => self.eval_array(frame, inner, depth),
            ExprKind::Slice(p, lo, hi) => {
                let s = self.eval_array(frame, p, depth)?;
                let l = self.eval(frame, lo, depth)?.as_int();
                let h = self.eval(frame, hi, depth)?.as_int();
                if l <= h {
                    if !s.contains(l) {
                        return Self::fail(frame, CheckKind::ArrayIndex, &lo.span);
                    }
                    if !s.contains(h) {
                        return Self::fail(frame, CheckKind::ArrayIndex, &hi.span);
                    }
                    let cells = s.cells[(l - s.first) as usize..=(h - s.first) as usize].to_vec();
                    Ok(StrValue {
                        first: l,
                        last: h,
                        cells,
                    })
                } else {
                    Ok(StrValue {
                        first: l,
                        last: h,
                        cells: Vec::new(),
                    })
                }
            }
            ExprKind::Str(text) => Ok(StrValue::new(1, text)),
            _ => Err(Stop::Error("unsupported string expression".into())),
        }
    }

    /// Reads a whole string value, requiring every element to be initialized.
    fn read_array(&mut self, frame: &mut Frame<'u>, e: &'u Expr, depth: &mut usize) -> Eval<StrValue> {
        let s = self.eval_array(frame, e, depth)?;
        if !s.is_initialized() {
            let root = array_root(e);
            let relaxed = root
                .and_then(|id| frame.slot(&id.key()))
                .is_some_and(|s| s.relaxed);
            let name = root.map(|id| id.name.clone()).unwrap_or_default();
            if relaxed {
                return Self::fail(frame, CheckKind::InitCheck, &e.span);
            }
            return Err(Stop::Uninit {
                span: root.map(|id| id.span.clone()).unwrap_or(e.span.clone()),
                variable: name,
            });
        }
        Ok(s)
    }

    fn arith(&self, frame: &Frame, op: BinOp, a: i64, b: i64, span: &SourceSpan) -> Eval<Value> {
        let r = match op {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => {
                if b == 0 {
                    return Self::fail(frame, CheckKind::Division, span);
                }
                a / b
            }
            _ => unreachable!(),
        };
        if !in_int_range(r) {
            return Self::fail(frame, CheckKind::Overflow, span);
        }
        Ok(Value::Int(r))
    }

    fn eval(&mut self, frame: &mut Frame<'u>, e: &'u Expr, depth: &mut usize) -> Eval<Value> {
        match &e.kind {
            ExprKind::Int(n) => Ok(Value::Int(*n)),
            ExprKind::Char(c) => Ok(Value::Char(*c)),
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::Str(s) => Ok(Value::Str(StrValue::new(1, s))),
            ExprKind::Name(id) => {
                let slot = frame
                    .slot(&id.key())
                    .ok_or_else(|| Stop::Error(format!("unbound {id}")))?;
                match &slot.value {
                    None => Err(Stop::Uninit {
                        span: id.span.clone(),
                        variable: slot.name.clone(),
                    }),
                    Some(Value::Str(_)) => Ok(Value::Str(self.read_array(frame, e, depth)?)),
                    Some(v) => Ok(v.clone()),
                }
            }
            ExprKind::Paren(inner) => self.eval(frame, inner, depth),
            ExprKind::Attr(prefix, attr) => match attr {
                Attribute::First => Ok(Value::Int(self.eval_array(frame, prefix, depth)?.first)),
                Attribute::Last => Ok(Value::Int(self.eval_array(frame, prefix, depth)?.last)),
                Attribute::Length => Ok(Value::Int(self.eval_array(frame, prefix, depth)?.length())),
                Attribute::Range => Err(Stop::Error("'Range outside a range".into())),
                Attribute::Result => {
                    let slot = frame
                        .slot("'result")
                        .ok_or_else(|| Stop::Error("'Result outside a postcondition".into()))?;
                    Ok(slot.value.clone().unwrap())
                }
                Attribute::Initialized => match &prefix.kind {
                    ExprKind::Index(p, i) => {
                        let s = self.eval_array(frame, p, depth)?;
                        let idx = self.eval(frame, i, depth)?.as_int();
                        match s.get(idx) {
                            Some(c) => Ok(Value::Bool(c.init)),
                            None => Self::fail(frame, CheckKind::ArrayIndex, &i.span),
                        }
                    }
                    ExprKind::Name(id) => {
                        let slot = frame.slot(&id.key()).unwrap();
                        Ok(Value::Bool(match &slot.value {
                            None => false,
                            Some(Value::Str(s)) => s.is_initialized(),
                            Some(_) => true,
                        }))
                    }
                    _ => Err(Stop::Error("unsupported 'Initialized prefix".into())),
                },
            },
            ExprKind::Binary(op, a, b) => {
                let op = *op;
                match op {
                    BinOp::AndThen => {
                        if !self.eval(frame, a, depth)?.as_bool() {
                            return Ok(Value::Bool(false));
                        }
                        self.eval(frame, b, depth)
                    }
                    BinOp::OrElse => {
                        if self.eval(frame, a, depth)?.as_bool() {
                            return Ok(Value::Bool(true));
                        }
                        self.eval(frame, b, depth)
                    }
                    BinOp::And | BinOp::Or => {
                        let x = self.eval(frame, a, depth)?.as_bool();
                        let y = self.eval(frame, b, depth)?.as_bool();
                        Ok(Value::Bool(if op == BinOp::And { x && y } else { x || y }))
                    }
                    _ if op.is_arithmetic() => {
                        let x = self.eval(frame, a, depth)?.as_int();
                        let y = self.eval(frame, b, depth)?.as_int();
                        self.arith(frame, op, x, y, &e.span)
                    }
                    _ => {
                        let x = self.eval(frame, a, depth)?;
                        let y = self.eval(frame, b, depth)?;
                        let ord = match (&x, &y) {
                            (Value::Str(s), Value::Str(t)) => {
                                let eq = s.length() == t.length()
                                    && s.cells.iter().zip(&t.cells).all(|(c, d)| c.ch == d.ch);
                                return Ok(Value::Bool(match op {
                                    BinOp::Eq => eq,
                                    BinOp::Ne => !eq,
                                    _ => unreachable!(),
                                }));
                            }
                            (Value::Bool(p), Value::Bool(q)) => p.cmp(q),
                            _ => x.as_int().cmp(&y.as_int()),
                        };
                        use std::cmp::Ordering::*;
                        Ok(Value::Bool(match op {
                            BinOp::Eq => ord == Equal,
                            BinOp::Ne => ord != Equal,
                            BinOp::Lt => ord == Less,
                            BinOp::Le => ord != Greater,
                            BinOp::Gt => ord == Greater,
                            BinOp::Ge => ord != Less,
                            _ => unreachable!(),
                        }))
                    }
                }
            }
            ExprKind::Not(a) => Ok(Value::Bool(!self.eval(frame, a, depth)?.as_bool())),
            ExprKind::Neg(a) => {
                let x = self.eval(frame, a, depth)?.as_int();
                self.arith(frame, BinOp::Sub, 0, x, &e.span)
            }
            ExprKind::If {
                cond,
                then,
                elsifs,
                otherwise,
            } => {
                if self.eval(frame, cond, depth)?.as_bool() {
                    return self.eval(frame, then, depth);
                }
                for (c, x) in elsifs {
                    if self.eval(frame, c, depth)?.as_bool() {
                        return self.eval(frame, x, depth);
                    }
                }
                match otherwise {
                    Some(o) => self.eval(frame, o, depth),
                    None => Ok(Value::Bool(true)),
                }
            }
            ExprKind::Quantified {
                quantifier,
                var,
                range,
                body,
            } => {
                let (lo, hi) = self.eval_range(frame, range, depth)?;
                let want = *quantifier == Quantifier::Some;
                frame.slots.push(Slot {
                    key: var.key(),
                    name: var.name.clone(),
                    value: None,
                    ty: Ty::integer(),
                    relaxed: false,
                });
                let mut result = Ok(Value::Bool(!want));
                let mut k = lo;
                while k <= hi {
                    if let Err(e) = self.tick() {
                        result = Err(e);
                        break;
                    }
                    frame.slots.last_mut().unwrap().value = Some(Value::Int(k));
                    match self.eval(frame, body, depth) {
                        Ok(v) if v.as_bool() == want => {
                            result = Ok(Value::Bool(want));
                            break;
                        }
                        Ok(_) => {}
                        Err(e) => {
                            result = Err(e);
                            break;
                        }
                    }
                    k += 1;
                }
                frame.slots.pop();
                result
            }
            ExprKind::Index(p, i) => {
                let s = self.eval_array(frame, p, depth)?;
                let idx = self.eval(frame, i, depth)?.as_int();
                let Some(cell) = s.get(idx) else {
                    return Self::fail(frame, CheckKind::ArrayIndex, &i.span);
                };
                if !cell.init {
                    let root = array_root(p);
                    let relaxed = root
                        .and_then(|id| frame.slot(&id.key()))
                        .is_some_and(|s| s.relaxed);
                    if relaxed {
                        return Self::fail(frame, CheckKind::InitCheck, &e.span);
                    }
                    let root = root.unwrap();
                    return Err(Stop::Uninit {
                        span: root.span.clone(),
                        variable: frame.slot(&root.key()).unwrap().name.clone(),
                    });
                }
                Ok(Value::Char(cell.ch))
            }
            ExprKind::Slice(..) => Ok(Value::Str(self.read_array(frame, e, depth)?)),
            ExprKind::In(x, r) => {
                let v = self.eval(frame, x, depth)?.as_int();
                let (lo, hi) = self.eval_range(frame, r, depth)?;
                Ok(Value::Bool(lo <= v && v <= hi))
            }
            ExprKind::Call(id, args) => self.call(frame, id, args, &e.span, depth),
            ExprKind::Apply(..) | ExprKind::Others(_) => {
                Err(Stop::Error("unresolved expression".into()))
            }
        }
    }

    fn call(
        &mut self,
        frame: &mut Frame<'u>,
        id: &Ident,
        args: &'u [Expr],
        span: &SourceSpan,
        depth: &mut usize,
    ) -> Eval<Value> {
        self.tick()?;
        let unit = self.unit;
        let callee = unit
            .unit
            .subprogram(&id.name)
            .ok_or_else(|| Stop::Error(format!("unknown function {id}")))?;
        let info = unit.symbols.subprogram(&id.name).unwrap();
        let mut slots = Vec::new();
        for (p, a) in callee.params.iter().zip(args) {
            let var = unit.symbols.variable(&callee.name.name, &p.name.name).unwrap();
            let v = if var.ty == Ty::Str && var.relaxed {
                Value::Str(self.eval_array(frame, a, depth)?)
            } else {
                self.eval(frame, a, depth)?
            };
            self.range_check(frame, &var.ty, &v, &a.span)?;
            slots.push(Slot {
                key: p.name.key(),
                name: p.name.name.clone(),
                value: Some(v),
                ty: var.ty.clone(),
                relaxed: var.relaxed,
            });
        }
        *depth += 1;
        if *depth > self.max_depth {
            return Err(Stop::Exhausted);
        }
        let mut inner = Frame {
            sp: callee,
            info,
            slots,
            loops: Vec::new(),
            variant: None,
        };
        let out = stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || -> Eval<Value> {
            if let Some(pre) = &callee.aspects.pre {
                if !self.eval(&mut inner, pre, depth)?.as_bool() {
                    return Self::fail(frame, CheckKind::Precondition, span);
                }
            }
            if let Some(v) = &callee.aspects.variant {
                let value = self.eval(&mut inner, v, depth)?.as_int();
                if let Some(caller_value) = frame.variant {
                    if self.graph.same_cycle(&frame.sp.name.name, &callee.name.name)
                        && value >= caller_value
                    {
                        return Self::fail(frame, CheckKind::VariantDecrease, span);
                    }
                }
                inner.variant = Some(value);
            }
            Ok(self
                .execute_body(&mut inner, depth)?
                .expect("functions return a value"))
        });
        *depth -= 1;
        out
    }
}

fn array_root(e: &Expr) -> Option<&Ident> {
    match &e.kind {
        ExprKind::Name(id) => Some(id),
        ExprKind::Paren(p) | ExprKind::Slice(p, _, _) | ExprKind::Index(p, _) => array_root(p),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sema::resolve;

    pub(crate) fn unit(src: &str) -> ResolvedUnit {
        resolve(&parse_unit("strings.adb", src).unwrap()).unwrap()
    }

    fn s(first: i64, text: &str) -> Value {
        Value::Str(StrValue::new(first, text))
    }

    fn args(pairs: &[(&str, Value)]) -> Bindings {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    const ERASE_V1: &str = "procedure Erase (S : out String) is
begin
   for J in 1 .. S'Length loop
     S (J) := ' ';
   end loop;
end Erase;";

    #[test]
    fn index_failure_with_offset_string() {
        let u = unit(ERASE_V1);
        let out = run(&u, "Erase", &args(&[("S", s(2, "x"))]), DEFAULT_FUEL);
        let Outcome::CheckFailure {
            kind,
            span,
            bindings,
        } = out
        else {
            panic!("{out:?}")
        };
        assert_eq!(kind, CheckKind::ArrayIndex);
        assert_eq!((span.line, span.column), (4, 9));
        assert_eq!(bindings["J"], Value::Int(1));
    }

    #[test]
    fn range_erase_blanks_everything() {
        let u = unit(
            "procedure Erase (S : out String) is
begin
   for J in S'Range loop
     S (J) := ' ';
   end loop;
end Erase;",
        );
        let out = run(&u, "Erase", &args(&[("S", s(1, "abc"))]), DEFAULT_FUEL);
        let Outcome::Normal { bindings, .. } = out else {
            panic!("{out:?}")
        };
        let v = bindings["S"].as_str();
        assert_eq!(v.text(), "   ");
        assert!(v.is_initialized());
    }

    const RECURSIVE: &str = "function All_Blanks (S : String) return Boolean is
  (if S = \"\" then True
   else S (S'First) = ' '
     and then All_Blanks (S (S'First + 1 .. S'Last)));";
    const QUANTIFIED: &str = "function All_Blanks (S : String) return Boolean is
  (for all J in S'Range => S (J) = ' ');";

    #[test]
    fn recursive_and_quantified_definitions_agree() {
        let rec = unit(RECURSIVE);
        let quant = unit(QUANTIFIED);
        let alphabet = [' ', 'a', 'b'];
        let mut checked = 0;
        for len in 0..=3u32 {
            for n in 0..3usize.pow(len) {
                let mut k = n;
                let text: String = (0..len)
                    .map(|_| {
                        let c = alphabet[k % 3];
                        k /= 3;
                        c
                    })
                    .collect();
                for first in [1, 2] {
                    let a = args(&[("S", s(first, &text))]);
                    let r1 = run(&rec, "All_Blanks", &a, DEFAULT_FUEL);
                    let r2 = run(&quant, "All_Blanks", &a, DEFAULT_FUEL);
                    let expected = text.chars().all(|c| c == ' ');
                    let Outcome::Normal { result, .. } = &r1 else {
                        panic!("{r1:?}")
                    };
                    assert_eq!(result, &Some(Value::Bool(expected)), "{text:?}");
                    let Outcome::Normal { result: r2, .. } = &r2 else {
                        panic!("{r2:?}")
                    };
                    assert_eq!(result, r2);
                    checked += 1;
                }
            }
        }
        assert_eq!(checked, 80);
        let ab = run(&rec, "All_Blanks", &args(&[("S", s(1, "ab"))]), DEFAULT_FUEL);
        assert!(matches!(ab, Outcome::Normal { result: Some(Value::Bool(false)), .. }));
    }

    #[test]
    fn overflow_and_division() {
        let u = unit(
            "procedure P (X : Integer; Y : out Integer) is
begin
   Y := X + 1;
   Y := 10 / (X - 5);
end P;",
        );
        let out = run(&u, "P", &args(&[("X", Value::Int(INT_LAST))]), DEFAULT_FUEL);
        assert_eq!(out.failure().unwrap().0, CheckKind::Overflow);
        let out = run(&u, "P", &args(&[("X", Value::Int(5))]), DEFAULT_FUEL);
        assert_eq!(out.failure().unwrap().0, CheckKind::Division);
        let out = run(&u, "P", &args(&[("X", Value::Int(7))]), DEFAULT_FUEL);
        assert!(matches!(out, Outcome::Normal { ref bindings, .. } if bindings["Y"] == Value::Int(5)));
    }

    #[test]
    fn precondition_precludes_entry() {
        let u = unit("procedure P (X : Integer; Y : out Integer) with Pre => X > 0 is begin Y := X; end P;");
        assert_eq!(run(&u, "P", &args(&[("X", Value::Int(0))]), 10), Outcome::Precluded);
    }

    #[test]
    fn uninitialized_scalar_read() {
        let u = unit("procedure P (Y : out Integer) is V : Integer; begin Y := V; end P;");
        let out = run(&u, "P", &Bindings::new(), 10);
        assert!(matches!(out, Outcome::UninitRead { ref variable, .. } if variable == "V"));
    }

    #[test]
    fn relaxed_read_is_an_init_check() {
        let u = unit(
            "procedure P (S : out String; C : out Character) with Relaxed_Initialization => S is
begin
   C := S (S'First);
end P;",
        );
        let out = run(&u, "P", &args(&[("S", s(1, "a"))]), 100);
        assert_eq!(out.failure().unwrap().0, CheckKind::InitCheck);
    }

    #[test]
    fn unbounded_recursion_is_cut_off() {
        let u = unit(
            "function F (X : Integer) return Boolean is (F (X));
procedure P (B : out Boolean) is begin B := F (1); end P;",
        );
        assert_eq!(run(&u, "P", &Bindings::new(), DEFAULT_FUEL), Outcome::NonTermination);
    }

    #[test]
    fn loop_invariant_kinds() {
        let u = unit(
            "procedure P (N : Integer; X : out Integer) is
begin
   X := 0;
   for J in 1 .. 3 loop
      pragma Loop_Invariant (X < N);
      X := X + 1;
   end loop;
end P;",
        );
        let init = run(&u, "P", &args(&[("N", Value::Int(0))]), 100);
        assert_eq!(init.failure().unwrap().0, CheckKind::LoopInvariantInit);
        let preserve = run(&u, "P", &args(&[("N", Value::Int(2))]), 100);
        assert_eq!(preserve.failure().unwrap().0, CheckKind::LoopInvariantPreserve);
        assert!(matches!(run(&u, "P", &args(&[("N", Value::Int(3))]), 100), Outcome::Normal { .. }));
    }

    #[test]
    fn variant_violation() {
        let u = unit(
            "function F (N : Integer) return Integer is
  (if N <= 0 then 0 else F (N))
  with Subprogram_Variant => (Decreases => N);
procedure P (X : out Integer) is begin X := F (2); end P;",
        );
        let out = run(&u, "P", &Bindings::new(), DEFAULT_FUEL);
        assert_eq!(out.failure().unwrap().0, CheckKind::VariantDecrease);
    }
}
