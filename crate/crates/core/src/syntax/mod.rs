//! Lexing, parsing, pretty-printing and caret snippets for Mini sources.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod snippet;
pub mod span;

use thiserror::Error;

pub use ast::*;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse_expr, parse_sources, parse_tokens, parse_unit};
pub use pretty::{pretty, pretty_range, pretty_stmt};
pub use snippet::{highlight_span, render_snippet, snippet_for};
pub use span::{SourceFile, SourceMap, SourceSpan};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SyntaxError {
    #[error("{message}")]
    Lexical { span: SourceSpan, message: String },
    #[error("unexpected {found}, expected {}", expected.join(" or "))]
    Unexpected {
        span: SourceSpan,
        found: String,
        expected: Vec<String>,
    },
    #[error("\"{name}\" is already declared")]
    Duplicate { span: SourceSpan, name: String },
}

impl SyntaxError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            SyntaxError::Lexical { span, .. }
            | SyntaxError::Unexpected { span, .. }
            | SyntaxError::Duplicate { span, .. } => span,
        }
    }
}
