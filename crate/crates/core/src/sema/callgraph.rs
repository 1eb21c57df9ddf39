use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;
use serde::Serialize;

use crate::syntax::{CompilationUnit, ExprKind, Subprogram, SubprogramKind};

/// Directed graph over subprograms (lowercase keys); an edge `f -> g` means
/// the body or a contract of `f` calls `g`.
#[derive(Clone, Debug, Default)]
pub struct CallGraph {
    nodes: Vec<String>,
    edges: BTreeMap<String, BTreeSet<String>>,
    scc_of: BTreeMap<String, usize>,
    sccs: Vec<Vec<String>>,
}

fn callees(sp: &Subprogram) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    sp.walk_exprs(&mut |e| {
        if let ExprKind::Call(id, _) = &e.kind {
            out.insert(id.key());
        }
    });
    out
}

impl CallGraph {
    pub fn build(unit: &CompilationUnit) -> CallGraph {
        let nodes: Vec<String> = unit.subprograms().map(|s| s.name.key()).collect();
        let edges = unit
            .subprograms()
            .map(|s| (s.name.key(), callees(s)))
            .collect();
        Self::from_edges(nodes, edges)
    }

    pub fn from_edges(nodes: Vec<String>, edges: BTreeMap<String, BTreeSet<String>>) -> CallGraph {
        let mut g = CallGraph {
            nodes,
            edges,
            ..Default::default()
        };
        g.sccs = tarjan(&g.nodes, &g.edges);
        for (i, c) in g.sccs.iter().enumerate() {
            for n in c {
                g.scc_of.insert(n.clone(), i);
            }
        }
        g
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges
            .get(&from.to_lowercase())
            .is_some_and(|s| s.contains(&to.to_lowercase()))
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges
            .iter()
            .flat_map(|(f, gs)| gs.iter().map(move |g| (f.as_str(), g.as_str())))
    }

    /// Strongly connected components, in reverse topological order.
    pub fn sccs(&self) -> &[Vec<String>] {
        &self.sccs
    }

    pub fn scc(&self, name: &str) -> Option<&[String]> {
        let i = *self.scc_of.get(&name.to_lowercase())?;
        Some(&self.sccs[i])
    }

    /// True if `name` lies on a cycle (an SCC of size two or more, or a self-loop).
    pub fn is_recursive(&self, name: &str) -> bool {
        let key = name.to_lowercase();
        self.scc(&key).is_some_and(|c| c.len() > 1) || self.has_edge(&key, &key)
    }

    /// True if `caller` and `callee` lie on a common cycle.
    pub fn same_cycle(&self, caller: &str, callee: &str) -> bool {
        let (a, b) = (caller.to_lowercase(), callee.to_lowercase());
        if a == b {
            return self.has_edge(&a, &a);
        }
        matches!((self.scc_of.get(&a), self.scc_of.get(&b)), (Some(x), Some(y)) if x == y)
    }
}

fn tarjan(nodes: &[String], edges: &BTreeMap<String, BTreeSet<String>>) -> Vec<Vec<String>> {
    let mut g = DiGraphMap::<&str, ()>::new();
    for n in nodes {
        g.add_node(n.as_str());
    }
    for (f, gs) in edges {
        for t in gs {
            if g.contains_node(t.as_str()) {
                g.add_edge(f.as_str(), t.as_str(), ());
            }
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<String> = c.into_iter().map(str::to_string).collect();
            c.sort();
            c
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    ExpressionFunction,
    RegularFunction,
    Procedure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FunctionClass {
    pub kind: FunctionKind,
    pub body_available_for_proof: bool,
    pub unavailability_reason: Option<String>,
}

impl FunctionClass {
    /// Classifies `sp`. `variant_proved` says whether the decrease checks of
    /// its Subprogram_Variant have all been proved.
    pub fn classify(sp: &Subprogram, graph: &CallGraph, variant_proved: bool) -> FunctionClass {
        let kind = match (sp.kind, sp.is_expression_function()) {
            (SubprogramKind::Procedure, _) => FunctionKind::Procedure,
            (SubprogramKind::Function, true) => FunctionKind::ExpressionFunction,
            (SubprogramKind::Function, false) => FunctionKind::RegularFunction,
        };
        if kind != FunctionKind::ExpressionFunction {
            return FunctionClass {
                kind,
                body_available_for_proof: false,
                unavailability_reason: None,
            };
        }
        let terminates =
            !graph.is_recursive(&sp.name.name) || (sp.aspects.variant.is_some() && variant_proved);
        FunctionClass {
            kind,
            body_available_for_proof: terminates,
            unavailability_reason: (!terminates)
                .then(|| format!("\"{}\" might not return", sp.name.name)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sema::resolve;
    use crate::syntax::parse_unit;

    fn graph(src: &str) -> (CompilationUnit, CallGraph) {
        let r = resolve(&parse_unit("t.ads", src).unwrap()).unwrap();
        let g = CallGraph::build(&r.unit);
        (r.unit, g)
    }

    const RECURSIVE: &str = "function All_Blanks (S : String) return Boolean is
  (if S'Length = 0 then True
   else S (S'Last) = ' ' and then All_Blanks (S (S'First .. S'Last - 1)));";

    #[test]
    fn self_loop_on_recursive_function() {
        let (unit, g) = graph(RECURSIVE);
        assert!(g.has_edge("All_Blanks", "All_Blanks"));
        assert!(g.is_recursive("all_blanks"));
        let c = FunctionClass::classify(unit.subprogram("All_Blanks").unwrap(), &g, false);
        assert_eq!(c.kind, FunctionKind::ExpressionFunction);
        assert!(!c.body_available_for_proof);
        assert_eq!(
            c.unavailability_reason.as_deref(),
            Some("\"All_Blanks\" might not return")
        );
    }

    #[test]
    fn erase_has_no_edges() {
        let (_, g) = graph("procedure Erase (S : out String) is begin for J in 1 .. S'Length loop S (J) := ' '; end loop; end Erase;");
        assert_eq!(g.edges().count(), 0);
    }

    #[test]
    fn mutual_recursion() {
        let (_, g) = graph(
            "function F (X : Integer) return Boolean;
function G (X : Integer) return Boolean is (F (X));
function F (X : Integer) return Boolean is (G (X));
function H (X : Integer) return Boolean is (F (X));",
        );
        assert_eq!(g.scc("f").unwrap().len(), 2);
        assert!(g.same_cycle("F", "G"));
        assert!(!g.is_recursive("H"));
    }

    #[test]
    fn quantified_function_is_available() {
        let (unit, g) = graph(
            "function All_Blanks (S : String) return Boolean is
  (for all J in S'Range => S (J) = ' ');",
        );
        let c = FunctionClass::classify(unit.subprogram("All_Blanks").unwrap(), &g, false);
        assert!(c.body_available_for_proof);
    }

    #[test]
    fn regular_function_is_never_available() {
        let (unit, g) = graph(
            "function All_Blanks (S : String) return Boolean is
begin
   for J in S'Range loop
      if S (J) /= ' ' then return False; end if;
   end loop;
   return True;
end All_Blanks;",
        );
        let c = FunctionClass::classify(unit.subprogram("All_Blanks").unwrap(), &g, true);
        assert_eq!(c.kind, FunctionKind::RegularFunction);
        assert!(!c.body_available_for_proof);
        assert!(c.unavailability_reason.is_none());
    }

    #[test]
    fn proved_variant_makes_body_available() {
        let src = "function Sum (N : Natural) return Natural is
  (if N = 0 then 0 else Sum (N - 1))
  with Subprogram_Variant => (Decreases => N);";
        let (unit, g) = graph(src);
        let sp = unit.subprogram("Sum").unwrap();
        assert!(!FunctionClass::classify(sp, &g, false).body_available_for_proof);
        assert!(FunctionClass::classify(sp, &g, true).body_available_for_proof);
    }
}
