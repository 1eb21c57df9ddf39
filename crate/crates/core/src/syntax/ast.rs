//! Syntax tree for the Mini language.
//!
//! Every node carries the [`SourceSpan`] it was parsed from. Equality on
//! nodes is structural: spans and resolved types are ignored, so two trees
//! parsed from differently laid-out text compare equal.

use std::fmt;

use super::span::SourceSpan;

#[derive(Clone, Debug)]
pub struct Ident {
    pub name: String,
    pub span: SourceSpan,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: SourceSpan) -> Self {
        Ident {
            name: name.into(),
            span,
        }
    }

    /// Canonical (case-folded) form used for lookups.
    pub fn key(&self) -> String {
        self.name.to_lowercase()
    }

    pub fn is(&self, other: &str) -> bool {
        self.name.eq_ignore_ascii_case(other)
    }
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.name.eq_ignore_ascii_case(&other.name)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
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
    AndThen,
    OrElse,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        use BinOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Eq => "=",
            Ne => "/=",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            And => "and",
            Or => "or",
            AndThen => "and then",
            OrElse => "or else",
        }
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::AndThen | BinOp::OrElse)
    }

    pub fn is_relational(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Attribute {
    First,
    Last,
    Length,
    Range,
    Initialized,
    Result,
}

impl Attribute {
    pub fn from_name(name: &str) -> Option<Attribute> {
        Some(match name.to_lowercase().as_str() {
            "first" => Attribute::First,
            "last" => Attribute::Last,
            "length" => Attribute::Length,
            "range" => Attribute::Range,
            "initialized" => Attribute::Initialized,
            "result" => Attribute::Result,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Attribute::First => "First",
            Attribute::Last => "Last",
            Attribute::Length => "Length",
            Attribute::Range => "Range",
            Attribute::Initialized => "Initialized",
            Attribute::Result => "Result",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    All,
    Some,
}

/// A discrete range: either `lo .. hi` or `X'Range`.
#[derive(Clone, Debug, PartialEq)]
pub enum RangeSpec {
    Bounds(Box<Expr>, Box<Expr>),
    Of(Box<Expr>),
}

/// Resolved type of an expression, filled in by name resolution.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Ty {
    #[default]
    Unknown,
    Int(IntRange),
    Bool,
    Char,
    Str,
}

/// An integer subtype with static bounds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntRange {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
}

pub const INT_FIRST: i64 = i32::MIN as i64;
pub const INT_LAST: i64 = i32::MAX as i64;

impl IntRange {
    pub fn integer() -> Self {
        IntRange {
            name: "Integer".into(),
            lo: INT_FIRST,
            hi: INT_LAST,
        }
    }

    pub fn natural() -> Self {
        IntRange {
            name: "Natural".into(),
            lo: 0,
            hi: INT_LAST,
        }
    }

    pub fn positive() -> Self {
        IntRange {
            name: "Positive".into(),
            lo: 1,
            hi: INT_LAST,
        }
    }

    pub fn is_full(&self) -> bool {
        self.lo == INT_FIRST && self.hi == INT_LAST
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

impl Ty {
    pub fn integer() -> Ty {
        Ty::Int(IntRange::integer())
    }

    pub fn is_int(&self) -> bool {
        matches!(self, Ty::Int(_))
    }

    /// Types that can be assigned to one another (all integer subtypes
    /// share the Integer base type).
    pub fn compatible(&self, other: &Ty) -> bool {
        match (self, other) {
            (Ty::Unknown, _) | (_, Ty::Unknown) => true,
            (Ty::Int(_), Ty::Int(_)) => true,
            (a, b) => a == b,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Ty::Unknown => "unknown".into(),
            Ty::Int(r) => r.name.clone(),
            Ty::Bool => "Boolean".into(),
            Ty::Char => "Character".into(),
            Ty::Str => "String".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
    pub ty: Ty,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: SourceSpan) -> Self {
        Expr {
            kind,
            span,
            ty: Ty::Unknown,
        }
    }

    /// Visits this expression and all sub-expressions in evaluation order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Int(_)
            | ExprKind::Char(_)
            | ExprKind::Str(_)
            | ExprKind::Bool(_)
            | ExprKind::Name(_) => {}
            ExprKind::Attr(p, _) => p.walk(f),
            ExprKind::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Not(a) | ExprKind::Neg(a) | ExprKind::Paren(a) | ExprKind::Others(a) => {
                a.walk(f)
            }
            ExprKind::If {
                cond,
                then,
                elsifs,
                otherwise,
            } => {
                cond.walk(f);
                then.walk(f);
                for (c, e) in elsifs {
                    c.walk(f);
                    e.walk(f);
                }
                if let Some(e) = otherwise {
                    e.walk(f);
                }
            }
            ExprKind::Quantified { range, body, .. } => {
                range.walk(f);
                body.walk(f);
            }
            ExprKind::Apply(p, args) => {
                p.walk(f);
                for a in args {
                    a.walk(f);
                }
            }
            ExprKind::Call(_, args) => {
                for a in args {
                    a.walk(f);
                }
            }
            ExprKind::Index(p, i) => {
                p.walk(f);
                i.walk(f);
            }
            ExprKind::Slice(p, lo, hi) => {
                p.walk(f);
                lo.walk(f);
                hi.walk(f);
            }
            ExprKind::In(e, range) => {
                e.walk(f);
                range.walk(f);
            }
        }
    }

    /// Names of variables referenced anywhere in the expression.
    pub fn names(&self) -> Vec<&Ident> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let ExprKind::Name(id) = &e.kind {
                out.push(id);
            }
        });
        out
    }

    /// Strips redundant parentheses.
    pub fn unparen(&self) -> &Expr {
        match &self.kind {
            ExprKind::Paren(e) => e.unparen(),
            _ => self,
        }
    }
}

impl RangeSpec {
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        match self {
            RangeSpec::Bounds(lo, hi) => {
                lo.walk(f);
                hi.walk(f);
            }
            RangeSpec::Of(e) => e.walk(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Char(char),
    Str(String),
    Bool(bool),
    Name(Ident),
    Attr(Box<Expr>, Attribute),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Paren(Box<Expr>),
    If {
        cond: Box<Expr>,
        then: Box<Expr>,
        elsifs: Vec<(Expr, Expr)>,
        otherwise: Option<Box<Expr>>,
    },
    Quantified {
        quantifier: Quantifier,
        var: Ident,
        range: RangeSpec,
        body: Box<Expr>,
    },
    /// `name (args)` before resolution decides between call, index and slice.
    Apply(Box<Expr>, Vec<Expr>),
    Call(Ident, Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Slice(Box<Expr>, Box<Expr>, Box<Expr>),
    In(Box<Expr>, RangeSpec),
    /// `(others => e)`
    Others(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Null,
    Assign {
        target: Expr,
        value: Expr,
    },
    If {
        branches: Vec<(Expr, Vec<Stmt>)>,
        otherwise: Option<Vec<Stmt>>,
    },
    For {
        var: Ident,
        range: RangeSpec,
        body: Vec<Stmt>,
        /// Position of the `loop` keyword.
        loop_span: SourceSpan,
        /// Source-order identifier of the loop within its subprogram.
        id: usize,
    },
    Return(Option<Expr>),
    Assert(Expr),
    LoopInvariant(Expr),
}

impl Stmt {
    /// Visits this statement and nested statements in source order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::If {
                branches,
                otherwise,
            } => {
                for (_, body) in branches {
                    for s in body {
                        s.walk(f);
                    }
                }
                if let Some(body) = otherwise {
                    for s in body {
                        s.walk(f);
                    }
                }
            }
            StmtKind::For { body, .. } => {
                for s in body {
                    s.walk(f);
                }
            }
            _ => {}
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    In,
    Out,
    InOut,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeRef {
    pub name: Ident,
    /// `String (lo .. hi)` constraint on locals.
    pub constraint: Option<(Expr, Expr)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: Ident,
    pub mode: Mode,
    pub ty: TypeRef,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalDecl {
    pub name: Ident,
    pub ty: TypeRef,
    pub init: Option<Expr>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Aspects {
    pub pre: Option<Expr>,
    pub post: Option<Expr>,
    pub relaxed: Vec<Ident>,
    pub variant: Option<Expr>,
}

impl Aspects {
    pub fn is_empty(&self) -> bool {
        self.pre.is_none() && self.post.is_none() && self.relaxed.is_empty() && self.variant.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubprogramKind {
    Procedure,
    Function,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    /// Declaration only (completed elsewhere or never).
    None,
    /// Expression function.
    Expr(Expr),
    Stmts {
        locals: Vec<LocalDecl>,
        stmts: Vec<Stmt>,
        begin_span: SourceSpan,
        end_span: SourceSpan,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subprogram {
    pub kind: SubprogramKind,
    pub name: Ident,
    pub params: Vec<Param>,
    pub return_type: Option<TypeRef>,
    pub aspects: Aspects,
    pub body: Body,
    pub span: SourceSpan,
}

impl Subprogram {
    pub fn is_expression_function(&self) -> bool {
        matches!(self.body, Body::Expr(_))
    }

    pub fn stmts(&self) -> &[Stmt] {
        match &self.body {
            Body::Stmts { stmts, .. } => stmts,
            _ => &[],
        }
    }

    pub fn locals(&self) -> &[LocalDecl] {
        match &self.body {
            Body::Stmts { locals, .. } => locals,
            _ => &[],
        }
    }

    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name.is(name))
    }

    pub fn is_relaxed(&self, name: &str) -> bool {
        self.aspects.relaxed.iter().any(|r| r.is(name))
    }

    /// Visits every expression in the contracts and the body.
    pub fn walk_exprs<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        let a = &self.aspects;
        for e in [&a.pre, &a.post, &a.variant].into_iter().flatten() {
            e.walk(f);
        }
        match &self.body {
            Body::None => {}
            Body::Expr(e) => e.walk(f),
            Body::Stmts { locals, stmts, .. } => {
                for l in locals {
                    if let Some((lo, hi)) = &l.ty.constraint {
                        lo.walk(f);
                        hi.walk(f);
                    }
                    if let Some(e) = &l.init {
                        e.walk(f);
                    }
                }
                for s in stmts {
                    s.walk(&mut |s| stmt_exprs(s, f));
                }
            }
        }
    }
}

fn stmt_exprs<'a>(s: &'a Stmt, f: &mut dyn FnMut(&'a Expr)) {
    match &s.kind {
        StmtKind::Null => {}
        StmtKind::Assign { target, value } => {
            target.walk(f);
            value.walk(f);
        }
        StmtKind::If { branches, .. } => {
            for (c, _) in branches {
                c.walk(f);
            }
        }
        StmtKind::For { range, .. } => range.walk(f),
        StmtKind::Return(e) => {
            if let Some(e) = e {
                e.walk(f)
            }
        }
        StmtKind::Assert(e) | StmtKind::LoopInvariant(e) => e.walk(f),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubtypeDecl {
    pub name: Ident,
    pub base: Ident,
    pub lo: Expr,
    pub hi: Expr,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Subtype(SubtypeDecl),
    Subprogram(Subprogram),
}

/// All declarations of one analysis unit, after merging package declaration and
/// body files.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CompilationUnit {
    pub decls: Vec<Decl>,
}

impl CompilationUnit {
    pub fn subprograms(&self) -> impl Iterator<Item = &Subprogram> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Subprogram(s) => Some(s),
            _ => None,
        })
    }

    pub fn subprogram(&self, name: &str) -> Option<&Subprogram> {
        self.subprograms().find(|s| s.name.is(name))
    }

    pub fn subtypes(&self) -> impl Iterator<Item = &SubtypeDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Subtype(s) => Some(s),
            _ => None,
        })
    }
}
