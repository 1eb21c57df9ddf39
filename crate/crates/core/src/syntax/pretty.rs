use std::fmt::Write;

use super::ast::*;

/// Renders an expression in canonical Mini syntax. The output parses back to
/// a structurally equal expression.
pub fn pretty(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

pub fn pretty_range(r: &RangeSpec) -> String {
    let mut out = String::new();
    write_range(&mut out, r);
    out
}

fn write_range(out: &mut String, r: &RangeSpec) {
    match r {
        RangeSpec::Bounds(lo, hi) => {
            write_expr(out, lo);
            out.push_str(" .. ");
            write_expr(out, hi);
        }
        RangeSpec::Of(prefix) => {
            write_expr(out, prefix);
            out.push_str("'Range");
        }
    }
}

fn write_args(out: &mut String, args: &[Expr]) {
    out.push_str(" (");
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, a);
    }
    out.push(')');
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Int(n) => {
            let _ = write!(out, "{n}");
        }
        ExprKind::Char(c) => {
            let _ = write!(out, "'{c}'");
        }
        ExprKind::Str(s) => {
            out.push('"');
            out.push_str(&s.replace('"', "\"\""));
            out.push('"');
        }
        ExprKind::Bool(b) => out.push_str(if *b { "True" } else { "False" }),
        ExprKind::Name(id) => out.push_str(&id.name),
        ExprKind::Attr(prefix, attr) => {
            write_expr(out, prefix);
            out.push('\'');
            out.push_str(attr.name());
        }
        ExprKind::Binary(op, a, b) => {
            write_expr(out, a);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(out, b);
        }
        ExprKind::Not(a) => {
            out.push_str("not ");
            write_expr(out, a);
        }
        ExprKind::Neg(a) => {
            out.push('-');
            write_expr(out, a);
        }
        ExprKind::Paren(a) => {
            out.push('(');
            write_expr(out, a);
            out.push(')');
        }
        ExprKind::If {
            cond,
            then,
            elsifs,
            otherwise,
        } => {
            out.push_str("(if ");
            write_expr(out, cond);
            out.push_str(" then ");
            write_expr(out, then);
            for (c, t) in elsifs {
                out.push_str(" elsif ");
                write_expr(out, c);
                out.push_str(" then ");
                write_expr(out, t);
            }
            if let Some(o) = otherwise {
                out.push_str(" else ");
                write_expr(out, o);
            }
            out.push(')');
        }
        ExprKind::Quantified {
            quantifier,
            var,
            range,
            body,
        } => {
            out.push_str(match quantifier {
                Quantifier::All => "(for all ",
                Quantifier::Some => "(for some ",
            });
            out.push_str(&var.name);
            out.push_str(" in ");
            write_range(out, range);
            out.push_str(" => ");
            write_expr(out, body);
            out.push(')');
        }
        ExprKind::Apply(p, args) => {
            write_expr(out, p);
            write_args(out, args);
        }
        ExprKind::Call(name, args) => {
            out.push_str(&name.name);
            if !args.is_empty() {
                write_args(out, args);
            }
        }
        ExprKind::Index(p, i) => {
            write_expr(out, p);
            write_args(out, std::slice::from_ref(i));
        }
        ExprKind::Slice(p, lo, hi) => {
            write_expr(out, p);
            out.push_str(" (");
            write_expr(out, lo);
            out.push_str(" .. ");
            write_expr(out, hi);
            out.push(')');
        }
        ExprKind::In(x, r) => {
            write_expr(out, x);
            out.push_str(" in ");
            write_range(out, r);
        }
        ExprKind::Others(v) => {
            out.push_str("(others => ");
            write_expr(out, v);
            out.push(')');
        }
    }
}

/// Renders a statement (and nested statements) with three-space indentation.
pub fn pretty_stmt(s: &Stmt) -> String {
    let mut out = String::new();
    write_stmt(&mut out, s, 0);
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("   ");
    }
}

fn write_block(out: &mut String, stmts: &[Stmt], level: usize) {
    for s in stmts {
        write_stmt(out, s, level);
    }
}

fn write_stmt(out: &mut String, s: &Stmt, level: usize) {
    indent(out, level);
    match &s.kind {
        StmtKind::Null => out.push_str("null;\n"),
        StmtKind::Assign { target, value } => {
            let _ = writeln!(out, "{} := {};", pretty(target), pretty(value));
        }
        StmtKind::If {
            branches,
            otherwise,
        } => {
            for (i, (cond, body)) in branches.iter().enumerate() {
                if i > 0 {
                    indent(out, level);
                    out.push_str("elsif ");
                } else {
                    out.push_str("if ");
                }
                let _ = writeln!(out, "{} then", pretty(cond));
                write_block(out, body, level + 1);
            }
            if let Some(body) = otherwise {
                indent(out, level);
                out.push_str("else\n");
                write_block(out, body, level + 1);
            }
            indent(out, level);
            out.push_str("end if;\n");
        }
        StmtKind::For {
            var, range, body, ..
        } => {
            let _ = writeln!(out, "for {} in {} loop", var.name, pretty_range(range));
            write_block(out, body, level + 1);
            indent(out, level);
            out.push_str("end loop;\n");
        }
        StmtKind::Return(None) => out.push_str("return;\n"),
        StmtKind::Return(Some(e)) => {
            let _ = writeln!(out, "return {};", pretty(e));
        }
        StmtKind::Assert(e) => {
            let _ = writeln!(out, "pragma Assert ({});", pretty(e));
        }
        StmtKind::LoopInvariant(e) => {
            let _ = writeln!(out, "pragma Loop_Invariant ({});", pretty(e));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::parse_expr;

    fn roundtrip(src: &str) -> String {
        pretty(&parse_expr("e", src).unwrap())
    }

    #[test]
    fn call_is_printed_with_space() {
        assert_eq!(roundtrip("All_Blanks(S)"), "All_Blanks (S)");
    }

    #[test]
    fn literal() {
        assert_eq!(roundtrip("1"), "1");
    }

    #[test]
    fn parens_are_kept() {
        assert_eq!(roundtrip("(A and B)"), "(A and B)");
    }

    #[test]
    fn conditional_and_quantified() {
        assert_eq!(
            roundtrip("(for some X in 1..10 => (if P (X) then Q (X)))"),
            "(for some X in 1 .. 10 => (if P (X) then Q (X)))"
        );
        assert_eq!(
            roundtrip("(for all K in S'First .. J => S (K)'Initialized)"),
            "(for all K in S'First .. J => S (K)'Initialized)"
        );
    }
}
