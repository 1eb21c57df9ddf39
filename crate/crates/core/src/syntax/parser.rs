use super::ast::*;
use super::lexer::{tokenize, Keyword, Token, TokenKind};
use super::span::{SourceFile, SourceSpan};
use super::SyntaxError;

type PResult<T> = Result<T, SyntaxError>;

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    eof: SourceSpan,
    loop_counter: usize,
}

/// Parses the tokens of one file into its declarations.
pub fn parse_tokens(tokens: &[Token], file: &str) -> PResult<CompilationUnit> {
    let eof = tokens
        .last()
        .map(|t| SourceSpan {
            column: t.span.column + t.span.length,
            offset: t.span.offset + t.span.length as usize,
            length: 1,
            ..t.span.clone()
        })
        .unwrap_or_else(|| SourceSpan::new(file.into(), 1, 1, 1, 0));
    let mut p = Parser {
        tokens,
        pos: 0,
        eof,
        loop_counter: 0,
    };
    let mut decls = Vec::new();
    while !p.at_end() {
        if p.check_kw(Keyword::Package) {
            p.parse_package(&mut decls)?;
        } else {
            decls.push(p.parse_decl()?);
        }
    }
    Ok(CompilationUnit { decls })
}

/// Parses and merges a set of files (single combined file, or a
/// declaration/body pair) into one unit. Subprogram declarations without
/// a body are completed by a later declaration of the same name.
/// Package declaration files (`.ads`) are read before the others.
pub fn parse_sources(files: &[SourceFile]) -> PResult<CompilationUnit> {
    let mut merged: Vec<Decl> = Vec::new();
    let mut ordered: Vec<&SourceFile> = files.iter().collect();
    ordered.sort_by_key(|f| !f.path.ends_with(".ads"));
    for file in ordered {
        let tokens = tokenize(&file.path, &file.text)?;
        let unit = parse_tokens(&tokens, &file.path)?;
        for decl in unit.decls {
            merge_decl(&mut merged, decl)?;
        }
    }
    Ok(CompilationUnit { decls: merged })
}

/// Parses a single source text.
pub fn parse_unit(file: &str, source: &str) -> PResult<CompilationUnit> {
    parse_sources(&[SourceFile::new(file, source)])
}

fn merge_decl(merged: &mut Vec<Decl>, decl: Decl) -> PResult<()> {
    let name = match &decl {
        Decl::Subtype(s) => s.name.clone(),
        Decl::Subprogram(s) => s.name.clone(),
    };
    let existing = merged.iter_mut().find(|d| match d {
        Decl::Subtype(s) => s.name == name,
        Decl::Subprogram(s) => s.name == name,
    });
    let Some(existing) = existing else {
        merged.push(decl);
        return Ok(());
    };
    let duplicate = || SyntaxError::Duplicate {
        span: name.span.clone(),
        name: name.name.clone(),
    };
    match (existing, decl) {
        (Decl::Subprogram(old), Decl::Subprogram(new)) => {
            let completes = matches!(old.body, Body::None) && !matches!(new.body, Body::None);
            if !completes || old.kind != new.kind || old.params.len() != new.params.len() {
                return Err(duplicate());
            }
            if !old.aspects.is_empty() && !new.aspects.is_empty() {
                return Err(duplicate());
            }
            if old.aspects.is_empty() {
                old.aspects = new.aspects;
            }
            // Expression functions completed in a body keep the body's location.
            if matches!(new.body, Body::Expr(_)) {
                old.span = new.span;
            }
            old.body = new.body;
            old.params = new.params;
            Ok(())
        }
        _ => Err(duplicate()),
    }
}

impl<'t> Parser<'t> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, n: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + n).map(|t| &t.kind)
    }

    fn span(&self) -> SourceSpan {
        self.tokens
            .get(self.pos)
            .map_or_else(|| self.eof.clone(), |t| t.span.clone())
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span.clone()
    }

    fn bump(&mut self) -> SourceSpan {
        let s = self.span();
        self.pos += 1;
        s
    }

    fn check(&self, kind: &TokenKind) -> bool {
        self.peek() == Some(kind)
    }

    fn check_kw(&self, kw: Keyword) -> bool {
        self.peek() == Some(&TokenKind::Keyword(kw))
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.check(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: Keyword) -> bool {
        self.eat(&TokenKind::Keyword(kw))
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(SyntaxError::Unexpected {
            span: self.span(),
            found: self
                .peek()
                .map_or_else(|| "end of file".to_string(), |k| k.to_string()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<SourceSpan> {
        if self.check(&kind) {
            Ok(self.bump())
        } else {
            self.error(&[&kind.to_string()])
        }
    }

    fn expect_kw(&mut self, kw: Keyword) -> PResult<SourceSpan> {
        self.expect(TokenKind::Keyword(kw))
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek() {
            Some(TokenKind::Ident(name)) => {
                let name = name.clone();
                let span = self.bump();
                Ok(Ident::new(name, span))
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn parse_package(&mut self, decls: &mut Vec<Decl>) -> PResult<()> {
        self.expect_kw(Keyword::Package)?;
        self.eat_kw(Keyword::Body);
        let name = self.ident()?;
        self.expect_kw(Keyword::Is)?;
        while !self.check_kw(Keyword::End) {
            if self.at_end() {
                return self.error(&["\"end\""]);
            }
            decls.push(self.parse_decl()?);
        }
        self.expect_kw(Keyword::End)?;
        if let Some(TokenKind::Ident(_)) = self.peek() {
            let end_name = self.ident()?;
            if end_name != name {
                return Err(SyntaxError::Unexpected {
                    span: end_name.span,
                    found: format!("identifier {}", end_name.name),
                    expected: vec![format!("identifier {}", name.name)],
                });
            }
        }
        self.expect(TokenKind::Semi)?;
        Ok(())
    }

    fn parse_decl(&mut self) -> PResult<Decl> {
        match self.peek() {
            Some(TokenKind::Keyword(Keyword::Subtype)) => self.parse_subtype().map(Decl::Subtype),
            Some(TokenKind::Keyword(Keyword::Procedure))
            | Some(TokenKind::Keyword(Keyword::Function)) => {
                self.parse_subprogram().map(Decl::Subprogram)
            }
            _ => self.error(&["\"procedure\"", "\"function\"", "\"subtype\"", "\"package\""]),
        }
    }

    fn parse_subtype(&mut self) -> PResult<SubtypeDecl> {
        let start = self.expect_kw(Keyword::Subtype)?;
        let name = self.ident()?;
        self.expect_kw(Keyword::Is)?;
        let base = self.ident()?;
        self.expect_kw(Keyword::Range)?;
        let lo = self.simple_expr()?;
        self.expect(TokenKind::DotDot)?;
        let hi = self.simple_expr()?;
        let end = self.expect(TokenKind::Semi)?;
        Ok(SubtypeDecl {
            name,
            base,
            lo,
            hi,
            span: start.to(&end),
        })
    }

    fn parse_subprogram(&mut self) -> PResult<Subprogram> {
        self.loop_counter = 0;
        let kind = if self.eat_kw(Keyword::Procedure) {
            SubprogramKind::Procedure
        } else {
            self.expect_kw(Keyword::Function)?;
            SubprogramKind::Function
        };
        let name = self.ident()?;
        let params = if self.check(&TokenKind::LParen) {
            self.parse_params()?
        } else {
            Vec::new()
        };
        let return_type = if kind == SubprogramKind::Function {
            self.expect_kw(Keyword::Return)?;
            Some(self.parse_typeref()?)
        } else {
            None
        };
        let mut aspects = Aspects::default();
        if self.eat_kw(Keyword::With) {
            aspects = self.parse_aspects()?;
        }
        let span = name.span.clone();
        if self.eat(&TokenKind::Semi) {
            return Ok(Subprogram {
                kind,
                name,
                params,
                return_type,
                aspects,
                body: Body::None,
                span,
            });
        }
        self.expect_kw(Keyword::Is)?;
        if kind == SubprogramKind::Function && self.check(&TokenKind::LParen) {
            let expr = self.primary()?;
            if self.eat_kw(Keyword::With) {
                if !aspects.is_empty() {
                    return self.error(&["\";\""]);
                }
                aspects = self.parse_aspects()?;
            }
            self.expect(TokenKind::Semi)?;
            return Ok(Subprogram {
                kind,
                name,
                params,
                return_type,
                aspects,
                body: Body::Expr(expr),
                span,
            });
        }
        let mut locals = Vec::new();
        while !self.check_kw(Keyword::Begin) {
            locals.push(self.parse_local()?);
        }
        let begin_span = self.expect_kw(Keyword::Begin)?;
        let stmts = self.parse_stmts()?;
        let end_span = self.expect_kw(Keyword::End)?;
        if let Some(TokenKind::Ident(_)) = self.peek() {
            let end_name = self.ident()?;
            if end_name != name {
                return Err(SyntaxError::Unexpected {
                    span: end_name.span,
                    found: format!("identifier {}", end_name.name),
                    expected: vec![format!("identifier {}", name.name)],
                });
            }
        }
        self.expect(TokenKind::Semi)?;
        Ok(Subprogram {
            kind,
            name,
            params,
            return_type,
            aspects,
            body: Body::Stmts {
                locals,
                stmts,
                begin_span,
                end_span,
            },
            span,
        })
    }

    fn parse_params(&mut self) -> PResult<Vec<Param>> {
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        loop {
            let mut names = vec![self.ident()?];
            while self.eat(&TokenKind::Comma) {
                names.push(self.ident()?);
            }
            self.expect(TokenKind::Colon)?;
            let mode = if self.eat_kw(Keyword::In) {
                if self.eat_kw(Keyword::Out) {
                    Mode::InOut
                } else {
                    Mode::In
                }
            } else if self.eat_kw(Keyword::Out) {
                Mode::Out
            } else {
                Mode::In
            };
            let ty = self.parse_typeref()?;
            for name in names {
                params.push(Param {
                    name,
                    mode,
                    ty: ty.clone(),
                });
            }
            if !self.eat(&TokenKind::Semi) {
                break;
            }
        }
        self.expect(TokenKind::RParen)?;
        Ok(params)
    }

    fn parse_typeref(&mut self) -> PResult<TypeRef> {
        let name = self.ident()?;
        let constraint = if self.check(&TokenKind::LParen) {
            self.bump();
            let lo = self.simple_expr()?;
            self.expect(TokenKind::DotDot)?;
            let hi = self.simple_expr()?;
            self.expect(TokenKind::RParen)?;
            Some((lo, hi))
        } else {
            None
        };
        Ok(TypeRef { name, constraint })
    }

    fn parse_aspects(&mut self) -> PResult<Aspects> {
        let mut aspects = Aspects::default();
        loop {
            let name = self.ident()?;
            self.expect(TokenKind::Arrow)?;
            match name.key().as_str() {
                "pre" => aspects.pre = Some(self.expr()?),
                "post" => aspects.post = Some(self.expr()?),
                "relaxed_initialization" => {
                    if self.eat(&TokenKind::LParen) {
                        loop {
                            aspects.relaxed.push(self.ident()?);
                            if !self.eat(&TokenKind::Comma) {
                                break;
                            }
                        }
                        self.expect(TokenKind::RParen)?;
                    } else {
                        aspects.relaxed.push(self.ident()?);
                    }
                }
                "subprogram_variant" => {
                    self.expect(TokenKind::LParen)?;
                    let dir = self.ident()?;
                    if !dir.is("decreases") {
                        return Err(SyntaxError::Unexpected {
                            span: dir.span,
                            found: format!("identifier {}", dir.name),
                            expected: vec!["Decreases".into()],
                        });
                    }
                    self.expect(TokenKind::Arrow)?;
                    aspects.variant = Some(self.expr()?);
                    self.expect(TokenKind::RParen)?;
                }
                _ => {
                    return Err(SyntaxError::Unexpected {
                        span: name.span.clone(),
                        found: format!("identifier {}", name.name),
                        expected: vec![
                            "Pre".into(),
                            "Post".into(),
                            "Relaxed_Initialization".into(),
                            "Subprogram_Variant".into(),
                        ],
                    })
                }
            }
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        Ok(aspects)
    }

    fn parse_local(&mut self) -> PResult<LocalDecl> {
        let name = self.ident()?;
        self.expect(TokenKind::Colon)?;
        let ty = self.parse_typeref()?;
        let init = if self.eat(&TokenKind::Assign) {
            Some(self.expr()?)
        } else {
            None
        };
        let end = self.expect(TokenKind::Semi)?;
        let span = name.span.to(&end);
        Ok(LocalDecl {
            name,
            ty,
            init,
            span,
        })
    }

    fn parse_stmts(&mut self) -> PResult<Vec<Stmt>> {
        let mut stmts = Vec::new();
        while !matches!(
            self.peek(),
            None | Some(TokenKind::Keyword(Keyword::End))
                | Some(TokenKind::Keyword(Keyword::Elsif))
                | Some(TokenKind::Keyword(Keyword::Else))
        ) {
            stmts.push(self.parse_stmt()?);
        }
        Ok(stmts)
    }

    fn parse_stmt(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let kind = match self.peek() {
            Some(TokenKind::Keyword(Keyword::Null)) => {
                self.bump();
                StmtKind::Null
            }
            Some(TokenKind::Keyword(Keyword::If)) => {
                self.bump();
                let mut branches = Vec::new();
                let cond = self.expr()?;
                self.expect_kw(Keyword::Then)?;
                branches.push((cond, self.parse_stmts()?));
                let mut otherwise = None;
                loop {
                    if self.eat_kw(Keyword::Elsif) {
                        let cond = self.expr()?;
                        self.expect_kw(Keyword::Then)?;
                        branches.push((cond, self.parse_stmts()?));
                    } else if self.eat_kw(Keyword::Else) {
                        otherwise = Some(self.parse_stmts()?);
                        break;
                    } else {
                        break;
                    }
                }
                self.expect_kw(Keyword::End)?;
                self.expect_kw(Keyword::If)?;
                StmtKind::If {
                    branches,
                    otherwise,
                }
            }
            Some(TokenKind::Keyword(Keyword::For)) => {
                self.bump();
                let var = self.ident()?;
                self.expect_kw(Keyword::In)?;
                let range = self.parse_range()?;
                let loop_span = self.expect_kw(Keyword::Loop)?;
                let id = self.loop_counter;
                self.loop_counter += 1;
                let body = self.parse_stmts()?;
                self.expect_kw(Keyword::End)?;
                self.expect_kw(Keyword::Loop)?;
                StmtKind::For {
                    var,
                    range,
                    body,
                    loop_span,
                    id,
                }
            }
            Some(TokenKind::Keyword(Keyword::Return)) => {
                self.bump();
                if self.check(&TokenKind::Semi) {
                    StmtKind::Return(None)
                } else {
                    StmtKind::Return(Some(self.expr()?))
                }
            }
            Some(TokenKind::Keyword(Keyword::Pragma)) => {
                self.bump();
                let name = self.ident()?;
                let open = self.expect(TokenKind::LParen)?;
                let e = match self.enclosed_kind()? {
                    Some(kind) => {
                        let close = self.expect(TokenKind::RParen)?;
                        Expr::new(kind, open.to(&close))
                    }
                    None => {
                        let e = self.expr()?;
                        self.expect(TokenKind::RParen)?;
                        e
                    }
                };
                match name.key().as_str() {
                    "assert" => StmtKind::Assert(e),
                    "loop_invariant" => StmtKind::LoopInvariant(e),
                    _ => {
                        return Err(SyntaxError::Unexpected {
                            span: name.span,
                            found: format!("identifier {}", name.name),
                            expected: vec!["Assert".into(), "Loop_Invariant".into()],
                        })
                    }
                }
            }
            Some(TokenKind::Ident(_)) => {
                let target = self.name_expr()?;
                self.expect(TokenKind::Assign)?;
                let value = self.expr()?;
                StmtKind::Assign { target, value }
            }
            _ => {
                return self.error(&[
                    "statement",
                    "\"null\"",
                    "\"if\"",
                    "\"for\"",
                    "\"return\"",
                    "\"pragma\"",
                    "identifier",
                ])
            }
        };
        let end = self.expect(TokenKind::Semi)?;
        Ok(Stmt {
            kind,
            span: start.to(&end),
        })
    }

    fn parse_range(&mut self) -> PResult<RangeSpec> {
        let lo = self.simple_expr()?;
        if self.eat(&TokenKind::DotDot) {
            let hi = self.simple_expr()?;
            return Ok(RangeSpec::Bounds(Box::new(lo), Box::new(hi)));
        }
        match lo.kind {
            ExprKind::Attr(prefix, Attribute::Range) => Ok(RangeSpec::Of(prefix)),
            _ => Err(SyntaxError::Unexpected {
                span: lo.span,
                found: "expression".into(),
                expected: vec!["\"..\"".into(), "'Range".into()],
            }),
        }
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let first = self.relation()?;
        let mut op: Option<BinOp> = None;
        let mut lhs = first;
        loop {
            let next = match self.peek() {
                Some(TokenKind::Keyword(Keyword::And)) => {
                    if self.peek_at(1) == Some(&TokenKind::Keyword(Keyword::Then)) {
                        BinOp::AndThen
                    } else {
                        BinOp::And
                    }
                }
                Some(TokenKind::Keyword(Keyword::Or)) => {
                    if self.peek_at(1) == Some(&TokenKind::Keyword(Keyword::Else)) {
                        BinOp::OrElse
                    } else {
                        BinOp::Or
                    }
                }
                _ => break,
            };
            if op.is_some_and(|o| o != next) {
                return Err(SyntaxError::Unexpected {
                    span: self.span(),
                    found: format!("\"{}\"", next.symbol()),
                    expected: vec![format!(
                        "\"{}\" (mixed logical operators need parentheses)",
                        op.unwrap().symbol()
                    )],
                });
            }
            op = Some(next);
            self.bump();
            if matches!(next, BinOp::AndThen | BinOp::OrElse) {
                self.bump();
            }
            let rhs = self.relation()?;
            let span = lhs.span.to(&rhs.span);
            lhs = Expr::new(ExprKind::Binary(next, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn relation(&mut self) -> PResult<Expr> {
        let lhs = self.simple_expr()?;
        let op = match self.peek() {
            Some(TokenKind::Eq) => BinOp::Eq,
            Some(TokenKind::Ne) => BinOp::Ne,
            Some(TokenKind::Lt) => BinOp::Lt,
            Some(TokenKind::Le) => BinOp::Le,
            Some(TokenKind::Gt) => BinOp::Gt,
            Some(TokenKind::Ge) => BinOp::Ge,
            Some(TokenKind::Keyword(Keyword::In)) => {
                self.bump();
                let range = self.parse_range()?;
                let end = self.prev_span();
                let span = lhs.span.to(&end);
                return Ok(Expr::new(ExprKind::In(Box::new(lhs), range), span));
            }
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.simple_expr()?;
        let span = lhs.span.to(&rhs.span);
        Ok(Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span))
    }

    fn simple_expr(&mut self) -> PResult<Expr> {
        let mut lhs = if self.check(&TokenKind::Minus) {
            let start = self.bump();
            let t = self.term()?;
            let span = start.to(&t.span);
            Expr::new(ExprKind::Neg(Box::new(t)), span)
        } else {
            self.term()?
        };
        loop {
            let op = match self.peek() {
                Some(TokenKind::Plus) => BinOp::Add,
                Some(TokenKind::Minus) => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            let span = lhs.span.to(&rhs.span);
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Star) => BinOp::Mul,
                Some(TokenKind::Slash) => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.factor()?;
            let span = lhs.span.to(&rhs.span);
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> PResult<Expr> {
        if self.check_kw(Keyword::Not) {
            let start = self.bump();
            let e = self.primary()?;
            let span = start.to(&e.span);
            return Ok(Expr::new(ExprKind::Not(Box::new(e)), span));
        }
        self.primary()
    }

    /// Conditional or quantified expression after its opening parenthesis.
    fn enclosed_kind(&mut self) -> PResult<Option<ExprKind>> {
        Ok(Some(if self.eat_kw(Keyword::If) {
            let cond = self.expr()?;
            self.expect_kw(Keyword::Then)?;
            let then = self.expr()?;
            let mut elsifs = Vec::new();
            let mut otherwise = None;
            loop {
                if self.eat_kw(Keyword::Elsif) {
                    let c = self.expr()?;
                    self.expect_kw(Keyword::Then)?;
                    let e = self.expr()?;
                    elsifs.push((c, e));
                } else if self.eat_kw(Keyword::Else) {
                    otherwise = Some(Box::new(self.expr()?));
                    break;
                } else {
                    break;
                }
            }
            ExprKind::If {
                cond: Box::new(cond),
                then: Box::new(then),
                elsifs,
                otherwise,
            }
        } else if self.eat_kw(Keyword::For) {
            let quantifier = if self.eat_kw(Keyword::All) {
                Quantifier::All
            } else if self.eat_kw(Keyword::Some) {
                Quantifier::Some
            } else {
                return self.error(&["\"all\"", "\"some\""]);
            };
            let var = self.ident()?;
            self.expect_kw(Keyword::In)?;
            let range = self.parse_range()?;
            self.expect(TokenKind::Arrow)?;
            let body = self.expr()?;
            ExprKind::Quantified {
                quantifier,
                var,
                range,
                body: Box::new(body),
            }
        } else {
            return Ok(None);
        }))
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().cloned() {
            Some(TokenKind::Int(n)) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(n), start))
            }
            Some(TokenKind::Char(c)) => {
                self.bump();
                Ok(Expr::new(ExprKind::Char(c), start))
            }
            Some(TokenKind::Str(s)) => {
                self.bump();
                Ok(Expr::new(ExprKind::Str(s), start))
            }
            Some(TokenKind::Ident(_)) => self.name_expr(),
            Some(TokenKind::LParen) => {
                self.bump();
                let kind = if let Some(kind) = self.enclosed_kind()? {
                    kind
                } else if self.eat_kw(Keyword::Others) {
                    self.expect(TokenKind::Arrow)?;
                    ExprKind::Others(Box::new(self.expr()?))
                } else {
                    ExprKind::Paren(Box::new(self.expr()?))
                };
                let end = self.expect(TokenKind::RParen)?;
                Ok(Expr::new(kind, start.to(&end)))
            }
            _ => self.error(&["expression"]),
        }
    }

    /// `Ident { (args) | (lo .. hi) | 'Attr }`
    fn name_expr(&mut self) -> PResult<Expr> {
        let id = self.ident()?;
        let mut e = if id.is("true") || id.is("false") {
            Expr::new(ExprKind::Bool(id.is("true")), id.span.clone())
        } else {
            let span = id.span.clone();
            Expr::new(ExprKind::Name(id), span)
        };
        loop {
            if self.check(&TokenKind::LParen) {
                let open = self.bump();
                if let Some(kind) = self.enclosed_kind()? {
                    let close = self.expect(TokenKind::RParen)?;
                    let arg = Expr::new(kind, open.to(&close));
                    let span = e.span.to(&close);
                    e = Expr::new(ExprKind::Apply(Box::new(e), vec![arg]), span);
                    continue;
                }
                let first = self.expr()?;
                if self.eat(&TokenKind::DotDot) {
                    let hi = self.expr()?;
                    let end = self.expect(TokenKind::RParen)?;
                    let span = e.span.to(&end);
                    e = Expr::new(
                        ExprKind::Slice(Box::new(e), Box::new(first), Box::new(hi)),
                        span,
                    );
                    continue;
                }
                let mut args = vec![first];
                while self.eat(&TokenKind::Comma) {
                    args.push(self.expr()?);
                }
                let end = self.expect(TokenKind::RParen)?;
                let span = e.span.to(&end);
                e = Expr::new(ExprKind::Apply(Box::new(e), args), span);
            } else if self.check(&TokenKind::Tick) {
                self.bump();
                let attr_id = if self.check(&TokenKind::Keyword(Keyword::Range)) {
                    let span = self.bump();
                    Ident::new("Range", span)
                } else {
                    self.ident()?
                };
                let Some(attr) = Attribute::from_name(&attr_id.name) else {
                    return Err(SyntaxError::Unexpected {
                        span: attr_id.span,
                        found: format!("identifier {}", attr_id.name),
                        expected: vec![
                            "First".into(),
                            "Last".into(),
                            "Length".into(),
                            "Range".into(),
                            "Initialized".into(),
                            "Result".into(),
                        ],
                    });
                };
                let span = e.span.to(&attr_id.span);
                e = Expr::new(ExprKind::Attr(Box::new(e), attr), span);
            } else {
                break;
            }
        }
        Ok(e)
    }
}

/// Parses one standalone expression (used by tests and the explorer).
pub fn parse_expr(file: &str, source: &str) -> PResult<Expr> {
    let tokens = tokenize(file, source)?;
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        eof: SourceSpan::new(file.into(), 1, 1, 1, 0),
        loop_counter: 0,
    };
    let e = p.expr()?;
    if !p.at_end() {
        return p.error(&["end of expression"]);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ERASE: &str = "procedure Erase (S : out String) is
begin
   for J in 1 .. S'Length loop
     S (J) := ' ';
   end loop;
end Erase;
";

    #[test]
    fn erase_has_one_loop_with_one_assignment() {
        let unit = parse_unit("strings.adb", ERASE).unwrap();
        let erase = unit.subprogram("Erase").unwrap();
        assert_eq!(erase.params[0].mode, Mode::Out);
        let stmts = erase.stmts();
        assert_eq!(stmts.len(), 1);
        let StmtKind::For { body, .. } = &stmts[0].kind else {
            panic!("expected loop")
        };
        assert_eq!(body.len(), 1);
        assert!(matches!(body[0].kind, StmtKind::Assign { .. }));
    }

    #[test]
    fn recursive_expression_function() {
        let src = "function All_Blanks (S : String) return Boolean is
  (if S = \"\" then True
   else S (S'First) = ' '
     and then All_Blanks (S (S'First + 1 .. S'Last)));";
        let unit = parse_unit("strings.ads", src).unwrap();
        let f = unit.subprogram("all_blanks").unwrap();
        let Body::Expr(e) = &f.body else { panic!() };
        assert!(matches!(e.kind, ExprKind::If { .. }));
    }

    #[test]
    fn minimal_procedure() {
        let unit = parse_unit("p.adb", "procedure P is begin end P;").unwrap();
        assert!(unit.subprogram("P").unwrap().stmts().is_empty());
    }

    #[test]
    fn spec_and_body_merge() {
        let spec = SourceFile::new(
            "strings.ads",
            "package Strings is\n procedure Erase (S : out String)\n  with Post => S'Length >= 0;\nend Strings;\n",
        );
        let body = SourceFile::new(
            "strings.adb",
            "package body Strings is\n procedure Erase (S : out String) is\n begin\n  null;\n end Erase;\nend Strings;\n",
        );
        let unit = parse_sources(&[spec, body]).unwrap();
        let erase = unit.subprogram("Erase").unwrap();
        assert!(erase.aspects.post.is_some());
        assert_eq!(&*erase.aspects.post.as_ref().unwrap().span.file, "strings.ads");
        assert_eq!(erase.stmts().len(), 1);
    }

    #[test]
    fn duplicate_bodies_rejected() {
        let src = "procedure P is begin null; end P;\nprocedure P is begin null; end P;";
        assert!(matches!(
            parse_unit("p.adb", src),
            Err(SyntaxError::Duplicate { .. })
        ));
    }

    #[test]
    fn aspects() {
        let src = "procedure Erase (S : out String)
  with Post => S'Initialized, Relaxed_Initialization => S;
function F (N : Natural) return Natural is (if N = 0 then 0 else F (N - 1))
  with Subprogram_Variant => (Decreases => N);";
        let unit = parse_unit("a.ads", src).unwrap();
        assert_eq!(unit.subprogram("Erase").unwrap().aspects.relaxed.len(), 1);
        assert!(unit.subprogram("F").unwrap().aspects.variant.is_some());
    }

    #[test]
    fn syntax_error_has_span_and_expected() {
        let err = parse_unit("p.adb", "procedure P is begin X := ; end P;").unwrap_err();
        let SyntaxError::Unexpected { span, expected, .. } = &err else {
            panic!("{err:?}")
        };
        assert_eq!(span.column, 27);
        assert!(expected.contains(&"expression".to_string()));
    }

    #[test]
    fn mixed_logical_operators_need_parentheses() {
        assert!(parse_expr("e", "A and B or C").is_err());
        assert!(parse_expr("e", "(A and B) or C").is_ok());
    }

    #[test]
    fn loop_ids_follow_source_order() {
        let src = "procedure P is begin
 for I in 1 .. 2 loop for J in 1 .. 2 loop null; end loop; end loop;
 for K in 1 .. 2 loop null; end loop;
end P;";
        let unit = parse_unit("p.adb", src).unwrap();
        let mut ids = Vec::new();
        for s in unit.subprogram("P").unwrap().stmts() {
            s.walk(&mut |s| {
                if let StmtKind::For { id, var, .. } = &s.kind {
                    ids.push((var.name.clone(), *id));
                }
            });
        }
        assert_eq!(
            ids,
            vec![("I".into(), 0), ("J".into(), 1), ("K".into(), 2)]
        );
    }
}
