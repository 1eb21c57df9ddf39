//! Name and type resolution, legality rules, call graph, function
//! classification and loop shapes.

mod callgraph;
mod loops;

use std::collections::BTreeMap;

use thiserror::Error;

pub use callgraph::{CallGraph, FunctionClass, FunctionKind};
pub use loops::{iteration_count, loop_shapes, write_set, IterationCount, LoopShape};

use crate::syntax::*;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SemaError {
    #[error("\"{name}\" is undefined")]
    Undefined { span: SourceSpan, name: String },
    #[error("expected type {expected}, found type {found}")]
    TypeMismatch {
        span: SourceSpan,
        expected: String,
        found: String,
    },
    #[error("wrong number of arguments in call to \"{name}\": expected {expected}, found {found}")]
    Arity {
        span: SourceSpan,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("{message}")]
    Illegal { span: SourceSpan, message: String },
}

impl SemaError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            SemaError::Undefined { span, .. }
            | SemaError::TypeMismatch { span, .. }
            | SemaError::Arity { span, .. }
            | SemaError::Illegal { span, .. } => span,
        }
    }
}

type SResult<T> = Result<T, SemaError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Param(Mode),
    Local,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarInfo {
    pub name: String,
    pub ty: Ty,
    pub kind: VarKind,
    pub relaxed: bool,
    /// Static bounds of a constrained local `String (lo .. hi)`.
    pub bounds: Option<(i64, i64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamInfo {
    pub name: String,
    pub mode: Mode,
    pub ty: Ty,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubprogramInfo {
    pub name: String,
    pub kind: SubprogramKind,
    pub params: Vec<ParamInfo>,
    pub result: Option<Ty>,
    pub is_expression_function: bool,
    pub has_pre: bool,
    pub has_post: bool,
    pub has_variant: bool,
    pub has_body: bool,
}

/// Entities visible in a unit: subtypes, subprogram signatures, and the
/// variables (parameters and locals) of each subprogram.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    pub subtypes: BTreeMap<String, IntRange>,
    pub subprograms: BTreeMap<String, SubprogramInfo>,
    pub variables: BTreeMap<String, BTreeMap<String, VarInfo>>,
}

impl SymbolTable {
    pub fn subprogram(&self, name: &str) -> Option<&SubprogramInfo> {
        self.subprograms.get(&name.to_lowercase())
    }

    pub fn variable(&self, subprogram: &str, var: &str) -> Option<&VarInfo> {
        self.variables
            .get(&subprogram.to_lowercase())?
            .get(&var.to_lowercase())
    }

    pub fn variables_of(&self, subprogram: &str) -> impl Iterator<Item = &VarInfo> {
        self.variables
            .get(&subprogram.to_lowercase())
            .into_iter()
            .flat_map(|m| m.values())
    }

    fn type_of(&self, t: &TypeRef) -> SResult<Ty> {
        let key = t.name.key();
        Ok(match key.as_str() {
            "integer" => Ty::integer(),
            "natural" => Ty::Int(IntRange::natural()),
            "positive" => Ty::Int(IntRange::positive()),
            "boolean" => Ty::Bool,
            "character" => Ty::Char,
            "string" => Ty::Str,
            _ => match self.subtypes.get(&key) {
                Some(r) => Ty::Int(r.clone()),
                None => {
                    return Err(SemaError::Undefined {
                        span: t.name.span.clone(),
                        name: t.name.name.clone(),
                    })
                }
            },
        })
    }
}

/// A resolved unit: `Apply` nodes are rewritten to calls, indexings and
/// slices, and every expression carries its type.
#[derive(Clone, Debug)]
pub struct ResolvedUnit {
    pub unit: CompilationUnit,
    pub symbols: SymbolTable,
}

/// Evaluates an integer expression built from literals and arithmetic.
pub fn static_int(e: &Expr) -> Option<i64> {
    match &e.kind {
        ExprKind::Int(n) => Some(*n),
        ExprKind::Paren(e) => static_int(e),
        ExprKind::Neg(e) => static_int(e).map(|v| -v),
        ExprKind::Binary(op, a, b) => {
            let (a, b) = (static_int(a)?, static_int(b)?);
            match op {
                BinOp::Add => a.checked_add(b),
                BinOp::Sub => a.checked_sub(b),
                BinOp::Mul => a.checked_mul(b),
                BinOp::Div if b != 0 => a.checked_div(b),
                _ => None,
            }
        }
        _ => None,
    }
}

#[derive(Clone)]
struct Scope {
    /// Innermost binding last.
    bindings: Vec<(String, Ty, Binding)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Binding {
    Var(VarKind),
    LoopVar,
    QuantVar,
}

struct Resolver<'a> {
    symbols: &'a SymbolTable,
    current: &'a SubprogramInfo,
    scope: Scope,
    in_post: bool,
}

/// Resolves names and types across the whole unit.
pub fn resolve(unit: &CompilationUnit) -> SResult<ResolvedUnit> {
    let mut symbols = SymbolTable::default();
    for st in unit.subtypes() {
        let base = symbols.type_of(&TypeRef {
            name: st.base.clone(),
            constraint: None,
        })?;
        let Ty::Int(base) = base else {
            return Err(SemaError::Illegal {
                span: st.base.span.clone(),
                message: "subtype base must be an integer type".into(),
            });
        };
        let (Some(lo), Some(hi)) = (static_int(&st.lo), static_int(&st.hi)) else {
            return Err(SemaError::Illegal {
                span: st.span.clone(),
                message: "subtype bounds must be static".into(),
            });
        };
        if lo < base.lo || hi > base.hi {
            return Err(SemaError::Illegal {
                span: st.span.clone(),
                message: format!("subtype bounds must lie within {}", base.name),
            });
        }
        symbols.subtypes.insert(
            st.name.key(),
            IntRange {
                name: st.name.name.clone(),
                lo,
                hi,
            },
        );
    }

    for sp in unit.subprograms() {
        let mut params = Vec::new();
        let mut vars = BTreeMap::new();
        for p in &sp.params {
            let ty = symbols.type_of(&p.ty)?;
            if vars.contains_key(&p.name.key()) {
                return Err(SemaError::Illegal {
                    span: p.name.span.clone(),
                    message: format!("\"{}\" is already declared", p.name),
                });
            }
            if sp.kind == SubprogramKind::Function && p.mode != Mode::In {
                return Err(SemaError::Illegal {
                    span: p.name.span.clone(),
                    message: "function parameters must have mode in".into(),
                });
            }
            params.push(ParamInfo {
                name: p.name.name.clone(),
                mode: p.mode,
                ty: ty.clone(),
            });
            vars.insert(
                p.name.key(),
                VarInfo {
                    name: p.name.name.clone(),
                    ty,
                    kind: VarKind::Param(p.mode),
                    relaxed: sp.is_relaxed(&p.name.name),
                    bounds: None,
                },
            );
        }
        for l in sp.locals() {
            let ty = symbols.type_of(&l.ty)?;
            if vars.contains_key(&l.name.key()) {
                return Err(SemaError::Illegal {
                    span: l.name.span.clone(),
                    message: format!("\"{}\" is already declared", l.name),
                });
            }
            let bounds = match (&ty, &l.ty.constraint) {
                (Ty::Str, Some((lo, hi))) => match (static_int(lo), static_int(hi)) {
                    (Some(lo), Some(hi)) if lo >= 1 => Some((lo, hi)),
                    _ => {
                        return Err(SemaError::Illegal {
                            span: l.span.clone(),
                            message: "string bounds must be static and positive".into(),
                        })
                    }
                },
                (Ty::Str, None) => {
                    return Err(SemaError::Illegal {
                        span: l.span.clone(),
                        message: "local strings must be constrained".into(),
                    })
                }
                (_, Some(_)) => {
                    return Err(SemaError::Illegal {
                        span: l.span.clone(),
                        message: "only strings take an index constraint".into(),
                    })
                }
                _ => None,
            };
            vars.insert(
                l.name.key(),
                VarInfo {
                    name: l.name.name.clone(),
                    ty,
                    kind: VarKind::Local,
                    relaxed: sp.is_relaxed(&l.name.name),
                    bounds,
                },
            );
        }
        for r in &sp.aspects.relaxed {
            match vars.get(&r.key()) {
                Some(v) if v.ty == Ty::Str => {}
                Some(_) => {
                    return Err(SemaError::Illegal {
                        span: r.span.clone(),
                        message: "Relaxed_Initialization applies to strings only".into(),
                    })
                }
                None => {
                    return Err(SemaError::Undefined {
                        span: r.span.clone(),
                        name: r.name.clone(),
                    })
                }
            }
        }
        let result = match &sp.return_type {
            Some(t) => {
                let ty = symbols.type_of(t)?;
                if ty == Ty::Str {
                    return Err(SemaError::Illegal {
                        span: t.name.span.clone(),
                        message: "functions must return a scalar type".into(),
                    });
                }
                Some(ty)
            }
            None => None,
        };
        symbols.subprograms.insert(
            sp.name.key(),
            SubprogramInfo {
                name: sp.name.name.clone(),
                kind: sp.kind,
                params,
                result,
                is_expression_function: sp.is_expression_function(),
                has_pre: sp.aspects.pre.is_some(),
                has_post: sp.aspects.post.is_some(),
                has_variant: sp.aspects.variant.is_some(),
                has_body: !matches!(sp.body, Body::None),
            },
        );
        symbols.variables.insert(sp.name.key(), vars);
    }

    let mut resolved = unit.clone();
    for decl in &mut resolved.decls {
        if let Decl::Subprogram(sp) = decl {
            resolve_subprogram(&symbols, sp)?;
        }
    }
    Ok(ResolvedUnit {
        unit: resolved,
        symbols,
    })
}

fn resolve_subprogram(symbols: &SymbolTable, sp: &mut Subprogram) -> SResult<()> {
    let info = symbols.subprogram(&sp.name.name).expect("registered above");
    let mut scope = Scope {
        bindings: Vec::new(),
    };
    for v in symbols.variables_of(&sp.name.name) {
        if let VarKind::Param(_) = v.kind {
            scope
                .bindings
                .push((v.name.to_lowercase(), v.ty.clone(), Binding::Var(v.kind)));
        }
    }
    let mut r = Resolver {
        symbols,
        current: info,
        scope,
        in_post: false,
    };
    if let Some(pre) = &mut sp.aspects.pre {
        r.expect_ty(pre, &Ty::Bool)?;
    }
    if let Some(v) = &mut sp.aspects.variant {
        if info.kind != SubprogramKind::Function {
            return Err(SemaError::Illegal {
                span: v.span.clone(),
                message: "Subprogram_Variant is supported on functions only".into(),
            });
        }
        r.expect_ty(v, &Ty::integer())?;
    }
    if let Some(post) = &mut sp.aspects.post {
        r.in_post = true;
        r.expect_ty(post, &Ty::Bool)?;
        r.in_post = false;
    }
    match &mut sp.body {
        Body::None => {}
        Body::Expr(e) => {
            let result = info.result.clone().unwrap_or(Ty::Bool);
            r.expect_ty(e, &result)?;
        }
        Body::Stmts { locals, stmts, .. } => {
            for l in locals.iter_mut() {
                let v = symbols.variable(&sp.name.name, &l.name.name).unwrap();
                if let Some(init) = &mut l.init {
                    if matches!(init.kind, ExprKind::Others(_)) {
                        r.resolve_aggregate(init, &v.ty)?;
                    } else {
                        r.expect_ty(init, &v.ty)?;
                    }
                }
                r.scope
                    .bindings
                    .push((l.name.key(), v.ty.clone(), Binding::Var(VarKind::Local)));
            }
            r.resolve_stmts(stmts, false)?;
        }
    }
    Ok(())
}

impl Resolver<'_> {
    fn lookup(&self, key: &str) -> Option<&(String, Ty, Binding)> {
        self.scope.bindings.iter().rev().find(|(k, _, _)| k == key)
    }

    fn mismatch(span: &SourceSpan, expected: &Ty, found: &Ty) -> SemaError {
        SemaError::TypeMismatch {
            span: span.clone(),
            expected: expected.describe(),
            found: found.describe(),
        }
    }

    fn expect_ty(&mut self, e: &mut Expr, ty: &Ty) -> SResult<()> {
        let found = self.expr(e)?;
        if !found.compatible(ty) {
            return Err(Self::mismatch(&e.span, ty, &found));
        }
        Ok(())
    }

    fn resolve_aggregate(&mut self, e: &mut Expr, target: &Ty) -> SResult<()> {
        if *target != Ty::Str {
            return Err(Self::mismatch(&e.span, target, &Ty::Str));
        }
        let ExprKind::Others(v) = &mut e.kind else {
            unreachable!()
        };
        self.expect_ty(v, &Ty::Char)?;
        e.ty = Ty::Str;
        Ok(())
    }

    fn resolve_stmts(&mut self, stmts: &mut [Stmt], in_loop: bool) -> SResult<()> {
        for s in stmts.iter_mut() {
            self.resolve_stmt(s, in_loop)?;
        }
        Ok(())
    }

    fn with_binding<T>(
        &mut self,
        name: &Ident,
        ty: Ty,
        binding: Binding,
        f: impl FnOnce(&mut Self) -> SResult<T>,
    ) -> SResult<T> {
        self.scope.bindings.push((name.key(), ty, binding));
        let out = f(self);
        self.scope.bindings.pop();
        out
    }

    fn resolve_range(&mut self, range: &mut RangeSpec) -> SResult<Ty> {
        match range {
            RangeSpec::Bounds(lo, hi) => {
                self.expect_ty(lo, &Ty::integer())?;
                self.expect_ty(hi, &Ty::integer())?;
                Ok(Ty::integer())
            }
            RangeSpec::Of(prefix) => {
                let t = self.expr(prefix)?;
                if t != Ty::Str {
                    return Err(Self::mismatch(&prefix.span, &Ty::Str, &t));
                }
                Ok(Ty::Int(IntRange::positive()))
            }
        }
    }

    fn resolve_stmt(&mut self, s: &mut Stmt, in_loop: bool) -> SResult<()> {
        match &mut s.kind {
            StmtKind::Null => Ok(()),
            StmtKind::Assign { target, value } => {
                let target_ty = self.assign_target(target)?;
                if matches!(value.kind, ExprKind::Others(_)) {
                    self.resolve_aggregate(value, &target_ty)
                } else {
                    if target_ty == Ty::Str {
                        return Err(SemaError::Illegal {
                            span: value.span.clone(),
                            message: "whole-string assignment takes an (others => ...) aggregate".into(),
                        });
                    }
                    self.expect_ty(value, &target_ty)
                }
            }
            StmtKind::If {
                branches,
                otherwise,
            } => {
                for (c, body) in branches.iter_mut() {
                    self.expect_ty(c, &Ty::Bool)?;
                    self.resolve_stmts(body, false)?;
                    check_no_invariants(body)?;
                }
                if let Some(body) = otherwise {
                    self.resolve_stmts(body, false)?;
                    check_no_invariants(body)?;
                }
                Ok(())
            }
            StmtKind::For {
                var, range, body, ..
            } => {
                let ty = self.resolve_range(range)?;
                let var = var.clone();
                self.with_binding(&var, ty, Binding::LoopVar, |r| r.resolve_stmts(body, true))?;
                check_invariant_placement(body)
            }
            StmtKind::Return(e) => match (&self.current.result, e) {
                (Some(ty), Some(e)) => {
                    let ty = ty.clone();
                    self.expect_ty(e, &ty)
                }
                (None, None) => Ok(()),
                (Some(_), None) => Err(SemaError::Illegal {
                    span: s.span.clone(),
                    message: "missing return value".into(),
                }),
                (None, Some(e)) => Err(SemaError::Illegal {
                    span: e.span.clone(),
                    message: "procedures cannot return a value".into(),
                }),
            },
            StmtKind::Assert(e) => self.expect_ty(e, &Ty::Bool),
            StmtKind::LoopInvariant(e) => {
                if !in_loop {
                    return Err(SemaError::Illegal {
                        span: s.span.clone(),
                        message: "Loop_Invariant must appear directly inside a loop".into(),
                    });
                }
                self.expect_ty(e, &Ty::Bool)
            }
        }
    }

    fn assign_target(&mut self, target: &mut Expr) -> SResult<Ty> {
        let name = match &target.kind {
            ExprKind::Name(id) => id.clone(),
            ExprKind::Apply(p, _) => match &p.kind {
                ExprKind::Name(id) => id.clone(),
                _ => {
                    return Err(SemaError::Illegal {
                        span: target.span.clone(),
                        message: "invalid assignment target".into(),
                    })
                }
            },
            _ => {
                return Err(SemaError::Illegal {
                    span: target.span.clone(),
                    message: "invalid assignment target".into(),
                })
            }
        };
        match self.lookup(&name.key()) {
            Some((_, _, Binding::Var(VarKind::Param(Mode::In)))) => {
                return Err(SemaError::Illegal {
                    span: name.span.clone(),
                    message: format!("\"{name}\" is an in parameter and cannot be assigned"),
                })
            }
            Some((_, _, Binding::LoopVar)) | Some((_, _, Binding::QuantVar)) => {
                return Err(SemaError::Illegal {
                    span: name.span.clone(),
                    message: format!("\"{name}\" is a loop parameter and cannot be assigned"),
                })
            }
            Some(_) => {}
            None => {
                return Err(SemaError::Undefined {
                    span: name.span.clone(),
                    name: name.name.clone(),
                })
            }
        }
        let ty = self.expr(target)?;
        if !matches!(target.kind, ExprKind::Name(_) | ExprKind::Index(..)) {
            return Err(SemaError::Illegal {
                span: target.span.clone(),
                message: "invalid assignment target".into(),
            });
        }
        Ok(ty)
    }

    fn expr(&mut self, e: &mut Expr) -> SResult<Ty> {
        let ty = self.expr_inner(e)?;
        e.ty = ty.clone();
        Ok(ty)
    }

    fn expr_inner(&mut self, e: &mut Expr) -> SResult<Ty> {
        let span = e.span.clone();
        match &mut e.kind {
            ExprKind::Int(_) => Ok(Ty::integer()),
            ExprKind::Char(_) => Ok(Ty::Char),
            ExprKind::Str(_) => Ok(Ty::Str),
            ExprKind::Bool(_) => Ok(Ty::Bool),
            ExprKind::Name(id) => {
                if let Some((_, ty, _)) = self.lookup(&id.key()) {
                    return Ok(ty.clone());
                }
                if let Some(f) = self.symbols.subprogram(&id.name) {
                    if f.kind == SubprogramKind::Function && f.params.is_empty() {
                        let result = f.result.clone().unwrap_or_default();
                        e.kind = ExprKind::Call(id.clone(), Vec::new());
                        return Ok(result);
                    }
                }
                Err(SemaError::Undefined {
                    span,
                    name: id.name.clone(),
                })
            }
            ExprKind::Attr(prefix, attr) => {
                let attr = *attr;
                if attr == Attribute::Result {
                    let ExprKind::Name(id) = &prefix.kind else {
                        return Err(SemaError::Illegal {
                            span,
                            message: "'Result applies to the enclosing function".into(),
                        });
                    };
                    if !self.in_post
                        || !id.is(&self.current.name)
                        || self.current.kind != SubprogramKind::Function
                    {
                        return Err(SemaError::Illegal {
                            span,
                            message: "'Result is only allowed in the postcondition of its function"
                                .into(),
                        });
                    }
                    let t = self.current.result.clone().unwrap_or_default();
                    prefix.ty = t.clone();
                    return Ok(t);
                }
                let pt = self.expr(prefix)?;
                match attr {
                    Attribute::First | Attribute::Last | Attribute::Length => {
                        if pt != Ty::Str {
                            return Err(Self::mismatch(&prefix.span, &Ty::Str, &pt));
                        }
                        Ok(if attr == Attribute::Length {
                            Ty::Int(IntRange::natural())
                        } else {
                            Ty::integer()
                        })
                    }
                    Attribute::Range => Err(SemaError::Illegal {
                        span,
                        message: "'Range is only allowed in a range".into(),
                    }),
                    Attribute::Initialized => {
                        if !matches!(prefix.kind, ExprKind::Name(_) | ExprKind::Index(..)) {
                            return Err(SemaError::Illegal {
                                span,
                                message: "'Initialized applies to a variable or component".into(),
                            });
                        }
                        Ok(Ty::Bool)
                    }
                    Attribute::Result => unreachable!(),
                }
            }
            ExprKind::Binary(op, a, b) => {
                let op = *op;
                let ta = self.expr(a)?;
                let tb = self.expr(b)?;
                if op.is_arithmetic() {
                    for (t, x) in [(&ta, &a), (&tb, &b)] {
                        if !t.is_int() {
                            return Err(Self::mismatch(&x.span, &Ty::integer(), t));
                        }
                    }
                    Ok(Ty::integer())
                } else if op.is_logical() {
                    for (t, x) in [(&ta, &a), (&tb, &b)] {
                        if *t != Ty::Bool {
                            return Err(Self::mismatch(&x.span, &Ty::Bool, t));
                        }
                    }
                    Ok(Ty::Bool)
                } else {
                    if !ta.compatible(&tb) {
                        return Err(Self::mismatch(&b.span, &ta, &tb));
                    }
                    if !matches!(op, BinOp::Eq | BinOp::Ne) && !(ta.is_int() || ta == Ty::Char) {
                        return Err(Self::mismatch(&a.span, &Ty::integer(), &ta));
                    }
                    Ok(Ty::Bool)
                }
            }
            ExprKind::Not(a) => {
                self.expect_ty(a, &Ty::Bool)?;
                Ok(Ty::Bool)
            }
            ExprKind::Neg(a) => {
                self.expect_ty(a, &Ty::integer())?;
                Ok(Ty::integer())
            }
            ExprKind::Paren(a) => self.expr(a),
            ExprKind::If {
                cond,
                then,
                elsifs,
                otherwise,
            } => {
                self.expect_ty(cond, &Ty::Bool)?;
                let t = self.expr(then)?;
                for (c, x) in elsifs.iter_mut() {
                    self.expect_ty(c, &Ty::Bool)?;
                    self.expect_ty(x, &t)?;
                }
                match otherwise {
                    Some(o) => self.expect_ty(o, &t)?,
                    None => {
                        if t != Ty::Bool {
                            return Err(SemaError::Illegal {
                                span,
                                message: "if-expression without else must be Boolean".into(),
                            });
                        }
                    }
                }
                Ok(if t.is_int() { Ty::integer() } else { t })
            }
            ExprKind::Quantified {
                var, range, body, ..
            } => {
                let ty = self.resolve_range(range)?;
                let var = var.clone();
                self.with_binding(&var, ty, Binding::QuantVar, |r| r.expect_ty(body, &Ty::Bool))?;
                Ok(Ty::Bool)
            }
            ExprKind::Apply(prefix, args) => {
                let ExprKind::Name(id) = &prefix.kind else {
                    return Err(SemaError::Illegal {
                        span,
                        message: "only names can be called or indexed".into(),
                    });
                };
                let id = id.clone();
                if let Some((_, ty, _)) = self.lookup(&id.key()) {
                    if *ty != Ty::Str {
                        return Err(SemaError::Illegal {
                            span,
                            message: format!("\"{id}\" is not an array"),
                        });
                    }
                    if args.len() != 1 {
                        return Err(SemaError::Illegal {
                            span,
                            message: "strings take exactly one index".into(),
                        });
                    }
                    let mut idx = args.pop().unwrap();
                    self.expect_ty(&mut idx, &Ty::integer())?;
                    let mut prefix = std::mem::replace(
                        prefix,
                        Box::new(Expr::new(ExprKind::Bool(false), span.clone())),
                    );
                    prefix.ty = Ty::Str;
                    e.kind = ExprKind::Index(prefix, Box::new(idx));
                    return Ok(Ty::Char);
                }
                let Some(f) = self.symbols.subprogram(&id.name) else {
                    return Err(SemaError::Undefined {
                        span: id.span.clone(),
                        name: id.name.clone(),
                    });
                };
                if f.kind != SubprogramKind::Function {
                    return Err(SemaError::Illegal {
                        span,
                        message: format!("\"{id}\" is a procedure and cannot be called in an expression"),
                    });
                }
                if f.params.len() != args.len() {
                    return Err(SemaError::Arity {
                        span,
                        name: f.name.clone(),
                        expected: f.params.len(),
                        found: args.len(),
                    });
                }
                let param_tys: Vec<Ty> = f.params.iter().map(|p| p.ty.clone()).collect();
                let result = f.result.clone().unwrap_or_default();
                for (a, t) in args.iter_mut().zip(&param_tys) {
                    self.expect_ty(a, t)?;
                }
                let args = std::mem::take(args);
                e.kind = ExprKind::Call(id, args);
                Ok(result)
            }
            ExprKind::Call(id, args) => {
                let Some(f) = self.symbols.subprogram(&id.name) else {
                    return Err(SemaError::Undefined {
                        span: id.span.clone(),
                        name: id.name.clone(),
                    });
                };
                let param_tys: Vec<Ty> = f.params.iter().map(|p| p.ty.clone()).collect();
                let result = f.result.clone().unwrap_or_default();
                for (a, t) in args.iter_mut().zip(&param_tys) {
                    self.expect_ty(a, t)?;
                }
                Ok(result)
            }
            ExprKind::Index(p, i) => {
                self.expect_ty(p, &Ty::Str)?;
                self.expect_ty(i, &Ty::integer())?;
                Ok(Ty::Char)
            }
            ExprKind::Slice(p, lo, hi) => {
                self.expect_ty(p, &Ty::Str)?;
                if !matches!(p.kind, ExprKind::Name(_)) {
                    return Err(SemaError::Illegal {
                        span,
                        message: "only string variables can be sliced".into(),
                    });
                }
                self.expect_ty(lo, &Ty::integer())?;
                self.expect_ty(hi, &Ty::integer())?;
                Ok(Ty::Str)
            }
            ExprKind::In(x, range) => {
                self.expect_ty(x, &Ty::integer())?;
                self.resolve_range(range)?;
                Ok(Ty::Bool)
            }
            ExprKind::Others(_) => Err(SemaError::Illegal {
                span,
                message: "aggregates are only allowed as whole-string values".into(),
            }),
        }
    }
}

fn check_no_invariants(body: &[Stmt]) -> SResult<()> {
    for s in body {
        if let StmtKind::LoopInvariant(_) = s.kind {
            return Err(SemaError::Illegal {
                span: s.span.clone(),
                message: "Loop_Invariant must appear directly inside a loop".into(),
            });
        }
    }
    Ok(())
}

/// Loop invariants of one loop must form a single contiguous group.
fn check_invariant_placement(body: &[Stmt]) -> SResult<()> {
    let positions: Vec<usize> = body
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s.kind, StmtKind::LoopInvariant(_)))
        .map(|(i, _)| i)
        .collect();
    if let (Some(first), Some(last)) = (positions.first(), positions.last()) {
        if last - first + 1 != positions.len() {
            return Err(SemaError::Illegal {
                span: body[*last].span.clone(),
                message: "loop invariants of a loop must be grouped together".into(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_src(src: &str) -> SResult<ResolvedUnit> {
        resolve(&parse_unit("t.adb", src).unwrap())
    }

    const ERASE: &str = "procedure Erase (S : out String) is
begin
   for J in 1 .. S'Length loop
     S (J) := ' ';
   end loop;
end Erase;";

    #[test]
    fn erase_resolves() {
        let r = resolve_src(ERASE).unwrap();
        let s = r.symbols.variable("Erase", "S").unwrap();
        assert_eq!(s.ty, Ty::Str);
        assert_eq!(s.kind, VarKind::Param(Mode::Out));
        let erase = r.unit.subprogram("Erase").unwrap();
        let StmtKind::For { body, .. } = &erase.stmts()[0].kind else {
            panic!()
        };
        let StmtKind::Assign { target, .. } = &body[0].kind else {
            panic!()
        };
        let ExprKind::Index(_, idx) = &target.kind else {
            panic!("{target:?}")
        };
        assert!(idx.ty.is_int());
    }

    #[test]
    fn undefined_name() {
        let err = resolve_src("procedure P (X : out Integer) is begin X := T; end P;").unwrap_err();
        assert!(matches!(err, SemaError::Undefined { ref name, .. } if name == "T"));
    }

    #[test]
    fn integer_into_character_array() {
        let err = resolve_src("procedure P (S : out String) is begin S (1) := 1; end P;").unwrap_err();
        assert!(matches!(err, SemaError::TypeMismatch { .. }), "{err:?}");
    }

    #[test]
    fn arity_mismatch() {
        let err = resolve_src(
            "function F (X : Integer) return Integer is (X);
procedure P (Y : out Integer) is begin Y := F (1, 2); end P;",
        )
        .unwrap_err();
        assert!(matches!(err, SemaError::Arity { expected: 1, found: 2, .. }));
    }

    #[test]
    fn in_parameters_are_read_only() {
        let err = resolve_src("procedure P (X : Integer) is begin X := 1; end P;").unwrap_err();
        assert!(matches!(err, SemaError::Illegal { .. }));
    }

    #[test]
    fn loop_invariant_outside_loop() {
        let err = resolve_src("procedure P is begin pragma Loop_Invariant (True); end P;").unwrap_err();
        assert!(matches!(err, SemaError::Illegal { .. }));
    }

    #[test]
    fn case_insensitive_names() {
        resolve_src("procedure P (X : out INTEGER) is begin x := 1; end p;").unwrap();
    }

    #[test]
    fn subtypes() {
        let r = resolve_src(
            "subtype Small is Integer range -2 .. 2;
procedure P (X : Small; Y : out Small) is begin Y := X; end P;",
        )
        .unwrap();
        let y = r.symbols.variable("P", "Y").unwrap();
        assert_eq!(y.ty, Ty::Int(IntRange { name: "Small".into(), lo: -2, hi: 2 }));
    }
}
