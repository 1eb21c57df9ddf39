use std::fmt;
use std::sync::Arc;

use super::span::SourceSpan;
use super::SyntaxError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Keyword {
    All,
    And,
    Begin,
    Body,
    Else,
    Elsif,
    End,
    For,
    Function,
    If,
    In,
    Is,
    Loop,
    Not,
    Null,
    Or,
    Others,
    Out,
    Package,
    Pragma,
    Procedure,
    Range,
    Return,
    Some,
    Subtype,
    Then,
    With,
}

impl Keyword {
    fn from_lower(word: &str) -> Option<Keyword> {
        use Keyword::*;
        Option::Some(match word {
            "all" => All,
            "and" => And,
            "begin" => Begin,
            "body" => Body,
            "else" => Else,
            "elsif" => Elsif,
            "end" => End,
            "for" => For,
            "function" => Function,
            "if" => If,
            "in" => In,
            "is" => Is,
            "loop" => Loop,
            "not" => Not,
            "null" => Null,
            "or" => Or,
            "others" => Others,
            "out" => Out,
            "package" => Package,
            "pragma" => Pragma,
            "procedure" => Procedure,
            "range" => Range,
            "return" => Return,
            "some" => Keyword::Some,
            "subtype" => Subtype,
            "then" => Then,
            "with" => With,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        use Keyword::*;
        match self {
            All => "all",
            And => "and",
            Begin => "begin",
            Body => "body",
            Else => "else",
            Elsif => "elsif",
            End => "end",
            For => "for",
            Function => "function",
            If => "if",
            In => "in",
            Is => "is",
            Loop => "loop",
            Not => "not",
            Null => "null",
            Or => "or",
            Others => "others",
            Out => "out",
            Package => "package",
            Pragma => "pragma",
            Procedure => "procedure",
            Range => "range",
            Return => "return",
            Some => "some",
            Subtype => "subtype",
            Then => "then",
            With => "with",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    Char(char),
    Str(String),
    Keyword(Keyword),
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Assign,
    Arrow,
    DotDot,
    Tick,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TokenKind::*;
        match self {
            Ident(s) => write!(f, "identifier {s}"),
            Int(n) => write!(f, "integer {n}"),
            Char(c) => write!(f, "character '{c}'"),
            Str(s) => write!(f, "string \"{s}\""),
            Keyword(k) => write!(f, "\"{}\"", k.as_str()),
            LParen => f.write_str("\"(\""),
            RParen => f.write_str("\")\""),
            Comma => f.write_str("\",\""),
            Semi => f.write_str("\";\""),
            Colon => f.write_str("\":\""),
            Assign => f.write_str("\":=\""),
            Arrow => f.write_str("\"=>\""),
            DotDot => f.write_str("\"..\""),
            Tick => f.write_str("\"'\""),
            Plus => f.write_str("\"+\""),
            Minus => f.write_str("\"-\""),
            Star => f.write_str("\"*\""),
            Slash => f.write_str("\"/\""),
            Eq => f.write_str("\"=\""),
            Ne => f.write_str("\"/=\""),
            Lt => f.write_str("\"<\""),
            Le => f.write_str("\"<=\""),
            Gt => f.write_str("\">\""),
            Ge => f.write_str("\">=\""),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    file: Arc<str>,
    chars: Vec<(usize, char)>,
    src: &'a str,
    pos: usize,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.chars.get(self.pos + n).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.src.len(), |&(o, _)| o)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn span_from(&self, line: u32, column: u32, offset: usize, length: u32) -> SourceSpan {
        SourceSpan::new(self.file.clone(), line, column, length, offset)
    }
}

/// Splits source text into tokens. Comments (`--` to end of line) and
/// whitespace are skipped; keywords are recognised case-insensitively.
pub fn tokenize(file: &str, source: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut cur = Cursor {
        file: Arc::from(file),
        chars: source.char_indices().collect(),
        src: source,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens: Vec<Token> = Vec::new();

    while let Some(c) = cur.peek() {
        let (line, column, offset) = (cur.line, cur.column, cur.offset());
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '-' && cur.peek_at(1) == Some('-') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let simple = |kind: TokenKind, len: u32, cur: &mut Cursor| {
            for _ in 0..len {
                cur.bump();
            }
            Token {
                kind,
                span: cur.span_from(line, column, offset, len),
            }
        };
        let tok = if c.is_alphabetic() {
            let mut word = String::new();
            while let Some(c) = cur.peek() {
                if c.is_alphanumeric() || c == '_' {
                    word.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            let len = word.chars().count() as u32;
            let kind = match Keyword::from_lower(&word.to_lowercase()) {
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident(word),
            };
            Token {
                kind,
                span: cur.span_from(line, column, offset, len),
            }
        } else if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() {
                    digits.push(c);
                    cur.bump();
                } else if c == '_' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
                    cur.bump();
                } else {
                    break;
                }
            }
            let len = (cur.column - column).max(1);
            let span = cur.span_from(line, column, offset, len);
            let value = digits.parse::<i64>().map_err(|_| SyntaxError::Lexical {
                span: span.clone(),
                message: format!("integer literal {digits} is too large"),
            })?;
            Token {
                kind: TokenKind::Int(value),
                span,
            }
        } else if c == '\'' {
            let after_name = matches!(
                tokens.last().map(|t| &t.kind),
                Some(TokenKind::Ident(_)) | Some(TokenKind::RParen) | Some(TokenKind::Keyword(Keyword::All))
            );
            if !after_name && cur.peek_at(2) == Some('\'') && cur.peek_at(1).is_some_and(|c| c != '\n') {
                cur.bump();
                let ch = cur.bump().unwrap_or(' ');
                cur.bump();
                Token {
                    kind: TokenKind::Char(ch),
                    span: cur.span_from(line, column, offset, 3),
                }
            } else if after_name {
                simple(TokenKind::Tick, 1, &mut cur)
            } else {
                return Err(SyntaxError::Lexical {
                    span: cur.span_from(line, column, offset, 1),
                    message: "unterminated character literal".into(),
                });
            }
        } else if c == '"' {
            cur.bump();
            let mut text = String::new();
            loop {
                match cur.peek() {
                    None | Some('\n') => {
                        return Err(SyntaxError::Lexical {
                            span: cur.span_from(line, column, offset, 1),
                            message: "unterminated string literal".into(),
                        })
                    }
                    Some('"') if cur.peek_at(1) == Some('"') => {
                        cur.bump();
                        cur.bump();
                        text.push('"');
                    }
                    Some('"') => {
                        cur.bump();
                        break;
                    }
                    Some(ch) => {
                        text.push(ch);
                        cur.bump();
                    }
                }
            }
            let len = cur.column - column;
            Token {
                kind: TokenKind::Str(text),
                span: cur.span_from(line, column, offset, len),
            }
        } else {
            let next = cur.peek_at(1);
            match (c, next) {
                (':', Some('=')) => simple(TokenKind::Assign, 2, &mut cur),
                ('=', Some('>')) => simple(TokenKind::Arrow, 2, &mut cur),
                ('.', Some('.')) => simple(TokenKind::DotDot, 2, &mut cur),
                ('/', Some('=')) => simple(TokenKind::Ne, 2, &mut cur),
                ('<', Some('=')) => simple(TokenKind::Le, 2, &mut cur),
                ('>', Some('=')) => simple(TokenKind::Ge, 2, &mut cur),
                ('(', _) => simple(TokenKind::LParen, 1, &mut cur),
                (')', _) => simple(TokenKind::RParen, 1, &mut cur),
                (',', _) => simple(TokenKind::Comma, 1, &mut cur),
                (';', _) => simple(TokenKind::Semi, 1, &mut cur),
                (':', _) => simple(TokenKind::Colon, 1, &mut cur),
                ('+', _) => simple(TokenKind::Plus, 1, &mut cur),
                ('-', _) => simple(TokenKind::Minus, 1, &mut cur),
                ('*', _) => simple(TokenKind::Star, 1, &mut cur),
                ('/', _) => simple(TokenKind::Slash, 1, &mut cur),
                ('=', _) => simple(TokenKind::Eq, 1, &mut cur),
                ('<', _) => simple(TokenKind::Lt, 1, &mut cur),
                ('>', _) => simple(TokenKind::Gt, 1, &mut cur),
                _ => {
                    return Err(SyntaxError::Lexical {
                        span: cur.span_from(line, column, offset, 1),
                        message: format!("illegal character {c:?}"),
                    })
                }
            }
        };
        tokens.push(tok);
    }
    Ok(tokens)
}
