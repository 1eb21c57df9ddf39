use std::collections::HashMap;
use std::sync::Arc;

use super::logic::{self, LOp, Sort, Term};
use super::{Hypothesis, SymRole, SymbolDecl, Vc};

/// One sub-goal after splitting.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub vc: Vc,
    /// Source text of the innermost property enclosing this sub-goal.
    pub text: Option<String>,
}

/// Introduces universally quantified variables and implication premises as
/// hypotheses and splits conjunctions and conditionals into separate goals.
/// The conjunction of the leaves is equivalent to the original goal.
pub fn split_vc(vc: &Vc) -> Vec<Leaf> {
    let mut out = Vec::new();
    let mut fresh = 0usize;
    let base = Vc {
        goal: Term::Bool(true),
        ..vc.clone()
    };
    walk(&vc.goal, base, None, &mut fresh, &mut out);
    out
}

fn add_hyp(vc: &mut Vc, t: Term) {
    match t {
        Term::Bin(LOp::And, a, b) => {
            add_hyp(vc, *a);
            add_hyp(vc, *b);
        }
        Term::Label(_, inner) => add_hyp(vc, *inner),
        Term::Bool(true) => {}
        t => vc.hypotheses.push(Hypothesis {
            formula: t,
            span: None,
        }),
    }
}

fn walk(goal: &Term, mut ctx: Vc, text: Option<String>, fresh: &mut usize, out: &mut Vec<Leaf>) {
    match goal {
        Term::Label(l, inner) => walk(inner, ctx, Some(l.to_string()), fresh, out),
        Term::Bool(true) => {}
        Term::Bin(LOp::And, a, b) => {
            walk(a, ctx.clone(), text.clone(), fresh, out);
            walk(b, ctx, text, fresh, out);
        }
        Term::Bin(LOp::Implies, a, b) => {
            add_hyp(&mut ctx, (**a).clone());
            walk(b, ctx, text, fresh, out);
        }
        Term::Ite(c, a, b) => {
            let mut then = ctx.clone();
            add_hyp(&mut then, (**c).clone());
            walk(a, then, text.clone(), fresh, out);
            add_hyp(&mut ctx, logic::not((**c).clone()));
            walk(b, ctx, text, fresh, out);
        }
        Term::Quant {
            all: true,
            var,
            lo,
            hi,
            body,
        } => {
            let name = if *fresh == 0 {
                "_f".to_string()
            } else {
                format!("_f{fresh}")
            };
            let id: Arc<str> = Arc::from(format!("{name}#s{fresh}"));
            *fresh += 1;
            ctx.symbols.push(SymbolDecl {
                id: id.clone(),
                base: name.clone(),
                ident: name,
                version: 0,
                sort: Sort::Int,
                role: SymRole::Fresh,
                range: None,
                def: None,
                bounds: None,
            });
            let f = Term::Var(id);
            add_hyp(&mut ctx, logic::le((**lo).clone(), f.clone()));
            add_hyp(&mut ctx, logic::le(f.clone(), (**hi).clone()));
            let body = body.subst(&HashMap::from([(var.clone(), f)]));
            walk(&body, ctx, text, fresh, out);
        }
        g => {
            ctx.goal = g.clone();
            out.push(Leaf { vc: ctx, text });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vcgen::FunTable;

    fn v(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    fn vc(goal: Term) -> Vc {
        Vc {
            symbols: Vec::new(),
            hypotheses: Vec::new(),
            goal,
            functions: Arc::new(FunTable::default()),
            cut_crossed: false,
        }
    }

    #[test]
    fn conjunction_gives_two_leaves_with_labels() {
        let g = logic::and(
            Term::Label(Arc::from("A"), Box::new(v("a"))),
            Term::Label(Arc::from("B"), Box::new(v("b"))),
        );
        let leaves = split_vc(&vc(Term::Label(Arc::from("A and B"), Box::new(g))));
        let texts: Vec<_> = leaves.iter().map(|l| l.text.clone().unwrap()).collect();
        assert_eq!(texts, ["A", "B"]);
    }

    #[test]
    fn quantifier_introduces_fresh_variable() {
        let k: Arc<str> = Arc::from("K#1");
        let g = Term::Quant {
            all: true,
            var: k.clone(),
            lo: Box::new(v("lo")),
            hi: Box::new(v("J")),
            body: Box::new(logic::implies(
                Term::Bool(true),
                logic::eq(
                    Term::InitOf(Box::new(logic::get(v("S"), Term::Var(k)))),
                    Term::Bool(true),
                ),
            )),
        };
        let leaves = split_vc(&vc(g));
        assert_eq!(leaves.len(), 1);
        let leaf = &leaves[0].vc;
        assert_eq!(leaf.show(&leaf.goal), "__attr__init (get2 S _f) = True");
        let hyps: Vec<_> = leaf.hypotheses.iter().map(|h| leaf.show(&h.formula)).collect();
        assert_eq!(hyps, ["lo <= _f", "_f <= J"]);
    }
}
