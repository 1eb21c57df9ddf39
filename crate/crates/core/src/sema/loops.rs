use std::collections::BTreeSet;

use crate::syntax::{Expr, ExprKind, Ident, RangeSpec, SourceSpan, Stmt, StmtKind, Subprogram};

use super::static_int;

#[derive(Clone, Debug, PartialEq)]
pub struct LoopShape {
    pub id: usize,
    pub var: Ident,
    pub range: RangeSpec,
    /// Span of the `loop` keyword.
    pub loop_span: SourceSpan,
    pub invariants: Vec<Expr>,
    /// Names (as declared, lowercase) of every variable assigned in the body.
    pub write_set: BTreeSet<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IterationCount {
    Static(u64),
    Dynamic,
}

/// Number of iterations of a loop whose bounds are compile-time constants.
pub fn iteration_count(shape: &LoopShape) -> IterationCount {
    match &shape.range {
        RangeSpec::Bounds(lo, hi) => match (static_int(lo), static_int(hi)) {
            (Some(lo), Some(hi)) => IterationCount::Static(if hi < lo {
                0
            } else {
                (hi - lo + 1) as u64
            }),
            _ => IterationCount::Dynamic,
        },
        RangeSpec::Of(_) => IterationCount::Dynamic,
    }
}

/// Assignment targets of `stmts`, including nested statements.
pub fn write_set(stmts: &[Stmt]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for s in stmts {
        s.walk(&mut |s| {
            if let StmtKind::Assign { target, .. } = &s.kind {
                if let Some(id) = target_root(target) {
                    out.insert(id.key());
                }
            }
        });
    }
    out
}

fn target_root(e: &Expr) -> Option<&Ident> {
    match &e.kind {
        ExprKind::Name(id) => Some(id),
        ExprKind::Index(p, _) | ExprKind::Apply(p, _) | ExprKind::Slice(p, _, _) => target_root(p),
        _ => None,
    }
}

/// Every loop of a subprogram body, in source order.
pub fn loop_shapes(sp: &Subprogram) -> Vec<LoopShape> {
    let mut out = Vec::new();
    for s in sp.stmts() {
        s.walk(&mut |s| {
            if let StmtKind::For {
                var,
                range,
                body,
                loop_span,
                id,
            } = &s.kind
            {
                out.push(LoopShape {
                    id: *id,
                    var: var.clone(),
                    range: range.clone(),
                    loop_span: loop_span.clone(),
                    invariants: body
                        .iter()
                        .filter_map(|s| match &s.kind {
                            StmtKind::LoopInvariant(e) => Some(e.clone()),
                            _ => None,
                        })
                        .collect(),
                    write_set: write_set(body),
                });
            }
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sema::resolve;
    use crate::syntax::parse_unit;

    fn shapes(src: &str) -> Vec<LoopShape> {
        let r = resolve(&parse_unit("t.adb", src).unwrap()).unwrap();
        let sp = r.unit.subprograms().next().unwrap().clone();
        loop_shapes(&sp)
    }

    #[test]
    fn counts() {
        let s = shapes(
            "procedure P (S : out String; X : out Integer) is
begin
   X := 0;
   for J in 1 .. 3 loop X := X + J; end loop;
   for J in 5 .. 2 loop X := 0; end loop;
   for J in S'Range loop S (J) := ' '; end loop;
   for J in 1 .. S'Length loop
      pragma Loop_Invariant (X >= 0);
      S (J) := 'a';
   end loop;
end P;",
        );
        assert_eq!(s.len(), 4);
        assert_eq!(iteration_count(&s[0]), IterationCount::Static(3));
        assert_eq!(iteration_count(&s[1]), IterationCount::Static(0));
        assert_eq!(iteration_count(&s[2]), IterationCount::Dynamic);
        assert_eq!(iteration_count(&s[3]), IterationCount::Dynamic);
        assert_eq!(s[3].invariants.len(), 1);
        assert_eq!(s[0].write_set, BTreeSet::from(["x".to_string()]));
        assert_eq!(s[2].write_set, BTreeSet::from(["s".to_string()]));
    }

    #[test]
    fn nested_writes_are_included() {
        let s = shapes(
            "procedure P (S : out String; X : out Integer) is
begin
   for J in 1 .. 2 loop
      for K in 1 .. 2 loop
         if K = J then X := K; end if;
      end loop;
      S (J) := ' ';
   end loop;
end P;",
        );
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].write_set, BTreeSet::from(["s".to_string(), "x".to_string()]));
        assert_eq!(s[1].write_set, BTreeSet::from(["x".to_string()]));
    }
}
