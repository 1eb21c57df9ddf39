use std::fmt;
use std::sync::Arc;

use serde::Serialize;

/// A located range of characters inside one source file.
///
/// `line` and `column` are 1-based and count characters, not bytes.
/// `offset` is the byte offset of the first character and is kept so that
/// the covered text can be sliced back out of the file.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
    pub length: u32,
    #[serde(skip)]
    pub offset: usize,
}

impl SourceSpan {
    pub fn new(file: Arc<str>, line: u32, column: u32, length: u32, offset: usize) -> Self {
        SourceSpan {
            file,
            line,
            column,
            length: length.max(1),
            offset,
        }
    }

    /// Span starting at `self` and ending where `end` ends. Only meaningful
    /// when both spans sit on the same line; multi-line joins keep the
    /// start line and extend to the end of the first line's worth of text.
    pub fn to(&self, end: &SourceSpan) -> SourceSpan {
        if end.line == self.line && end.column >= self.column {
            let length = end.column + end.length - self.column;
            SourceSpan { length, ..self.clone() }
        } else if end.offset >= self.offset {
            // Multi-line node: keep the start, length covers the byte distance.
            let length = (end.offset - self.offset) as u32 + end.length;
            SourceSpan { length, ..self.clone() }
        } else {
            self.clone()
        }
    }

    /// Single-character span at the start of `self`.
    pub fn point(&self) -> SourceSpan {
        SourceSpan { length: 1, ..self.clone() }
    }

    /// `file:line:column`
    pub fn location(&self) -> String {
        format!("{}:{}:{}", self.file, self.line, self.column)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// One input file.
#[derive(Clone, Debug)]
pub struct SourceFile {
    pub path: Arc<str>,
    pub text: String,
}

impl SourceFile {
    pub fn new(path: impl Into<Arc<str>>, text: impl Into<String>) -> Self {
        SourceFile {
            path: path.into(),
            text: text.into(),
        }
    }

    /// Text of a 1-based line without its terminator.
    pub fn line_text(&self, line: u32) -> Option<&str> {
        self.text
            .split('\n')
            .nth(line.checked_sub(1)? as usize)
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
    }

    /// The characters a span covers on its first line.
    pub fn span_text(&self, span: &SourceSpan) -> Option<String> {
        let line = self.line_text(span.line)?;
        Some(
            line.chars()
                .skip(span.column as usize - 1)
                .take(span.length as usize)
                .collect(),
        )
    }
}

/// Lookup of source files by path.
#[derive(Clone, Debug, Default)]
pub struct SourceMap {
    files: Vec<SourceFile>,
}

impl SourceMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, file: SourceFile) {
        self.files.push(file);
    }

    pub fn get(&self, path: &str) -> Option<&SourceFile> {
        self.files.iter().find(|f| &*f.path == path)
    }

    pub fn files(&self) -> &[SourceFile] {
        &self.files
    }

    pub fn line_text(&self, span: &SourceSpan) -> Option<&str> {
        self.get(&span.file)?.line_text(span.line)
    }
}
