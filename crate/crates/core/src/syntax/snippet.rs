use super::lexer::tokenize;
use super::span::{SourceMap, SourceSpan};

/// Renders the two-line caret excerpt for `span`:
///
/// ```text
///     6 |         S (J) := ' ';
///       |            ^ here
/// ```
///
/// `source_line` is the full text of the span's line.
pub fn render_snippet(span: &SourceSpan, source_line: &str, tag: Option<&str>) -> [String; 2] {
    let first = format!("{:>5} | {}", span.line, source_line);
    let line_chars = source_line.chars().count() as u32;
    let start = span.column.max(1);
    let avail = line_chars.saturating_sub(start - 1).max(1);
    let width = span.length.clamp(1, avail);
    let mut second = String::from("      | ");
    for ch in source_line.chars().take(start as usize - 1) {
        // Keep tabs so the caret lines up under tabbed source.
        second.push(if ch == '\t' { '\t' } else { ' ' });
    }
    second.push('^');
    for _ in 1..width {
        second.push('~');
    }
    if let Some(tag) = tag {
        second.push(' ');
        second.push_str(tag);
    }
    [first, second]
}

/// Looks the span's line up in `sources` and renders it; `None` when the
/// file or line is unknown.
pub fn snippet_for(sources: &SourceMap, span: &SourceSpan, tag: Option<&str>) -> Option<[String; 2]> {
    let line = sources.line_text(span)?;
    Some(render_snippet(span, line, tag))
}

/// The highlighted part of an expression span, which stops before the
/// expression's final token (`All_Blanks (S)` highlights up to, but not
/// including, the closing parenthesis). Single-token spans keep one column.
pub fn highlight_span(sources: &SourceMap, span: &SourceSpan) -> SourceSpan {
    let Some(line) = sources.line_text(span) else {
        return span.point();
    };
    let text: String = line
        .chars()
        .skip(span.column as usize - 1)
        .take(span.length as usize)
        .collect();
    let Ok(tokens) = tokenize(&span.file, &text) else {
        return span.clone();
    };
    match tokens.last() {
        Some(last) if tokens.len() > 1 => SourceSpan {
            length: (last.span.column - 1).max(1),
            ..span.clone()
        },
        _ => span.point(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::span::SourceFile;

    fn span(line: u32, column: u32, length: u32) -> SourceSpan {
        SourceSpan::new("strings.adb".into(), line, column, length, 0)
    }

    #[test]
    fn point_with_tag() {
        let [a, b] = render_snippet(&span(6, 12, 1), "        S (J) := ' ';", Some("here"));
        assert_eq!(a, "    6 |         S (J) := ' ';");
        assert_eq!(b, "      |            ^ here");
    }

    #[test]
    fn range_with_tildes() {
        let [_, b] = render_snippet(&span(9, 18, 13), "    with Post => All_Blanks (S);", None);
        assert_eq!(b, "      |                  ^~~~~~~~~~~~~");
    }

    #[test]
    fn left_edge() {
        let [_, b] = render_snippet(&span(1, 1, 1), "X := 1;", None);
        assert_eq!(b, "      | ^");
    }

    #[test]
    fn highlight_stops_before_last_token() {
        let mut map = SourceMap::new();
        map.add(SourceFile::new("strings.ads", "    with Post => All_Blanks (S);\n"));
        let full = SourceSpan::new("strings.ads".into(), 1, 18, 14, 17);
        assert_eq!(highlight_span(&map, &full).length, 13);
        let single = SourceSpan::new("strings.ads".into(), 1, 18, 10, 17);
        assert_eq!(highlight_span(&map, &single).length, 1);
    }
}
