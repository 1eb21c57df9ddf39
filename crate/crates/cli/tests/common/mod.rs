//! Random subprograms for differential testing against the interpreter.
//!
//! Every program has the shape
//!
//! ```text
//! procedure Q (X : Small; Y : Small; S : String; R : out Integer)
//! ```
//!
//! with `Small` ranging over -4 .. 4 and locals `T : Integer`, `U : Small`
//! and `C : Character`. Locals are initialized and `R` is assigned first, so
//! no initialization finding can arise; the checks that can fail are range
//! (on `U`), division, array index, assertion and postcondition.

use proptest::prelude::*;

#[derive(Clone, Debug)]
pub struct Program {
    pub source: String,
    pub has_loop: bool,
}

#[derive(Clone, Copy)]
struct Scope {
    in_loop: bool,
    /// `T` is visible (false in contracts).
    locals: bool,
    /// `R` has been assigned.
    result: bool,
}

const BODY: Scope = Scope {
    in_loop: false,
    locals: true,
    result: true,
};

fn int_leaf(scope: Scope) -> BoxedStrategy<String> {
    let mut leaves = vec![
        (-4i64..=4).prop_map(|v| if v < 0 { format!("({v})") } else { v.to_string() }).boxed(),
        Just("X".to_string()).boxed(),
        Just("Y".to_string()).boxed(),
        prop_oneof![Just("S'First"), Just("S'Last"), Just("S'Length")]
            .prop_map(str::to_string)
            .boxed(),
    ];
    for (on, name) in [(scope.locals, "T"), (scope.result, "R"), (scope.in_loop, "I")] {
        if on {
            leaves.push(Just(name.to_string()).boxed());
        }
    }
    proptest::strategy::Union::new(leaves).boxed()
}

fn int_expr(scope: Scope) -> BoxedStrategy<String> {
    int_leaf(scope)
        .prop_recursive(2, 8, 2, |inner| {
            (
                inner.clone(),
                prop_oneof![3 => Just("+"), 3 => Just("-"), 1 => Just("*"), 1 => Just("/")],
                inner,
            )
                .prop_map(|(a, op, b)| format!("({a} {op} {b})"))
        })
        .boxed()
}

fn bool_expr(scope: Scope) -> BoxedStrategy<String> {
    let cmp = (
        int_expr(scope),
        prop_oneof![Just("<"), Just("<="), Just("="), Just("/="), Just(">")],
        int_expr(scope),
    )
        .prop_map(|(a, op, b)| format!("{a} {op} {b}"));
    let index = (int_leaf(scope), prop_oneof![Just("' '"), Just("'a'")])
        .prop_map(|(i, c)| format!("S ({i}) = {c}"));
    let atom = prop_oneof![4 => cmp, 1 => index];
    atom.prop_recursive(1, 4, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop_oneof![Just("and"), Just("or"), Just("and then")], inner.clone())
                .prop_map(|(a, op, b)| format!("({a}) {op} ({b})")),
            inner.prop_map(|a| format!("not ({a})")),
        ]
    })
    .boxed()
}

fn simple_stmt(scope: Scope) -> BoxedStrategy<String> {
    prop_oneof![
        4 => int_expr(scope).prop_map(|e| format!("T := {e};")),
        2 => int_expr(scope).prop_map(|e| format!("R := {e};")),
        1 => int_expr(scope).prop_map(|e| format!("U := {e};")),
        1 => int_leaf(scope).prop_map(|e| format!("C := S ({e});")),
        1 => bool_expr(scope).prop_map(|b| format!("pragma Assert ({b});")),
    ]
    .boxed()
}

fn stmt(scope: Scope) -> BoxedStrategy<String> {
    let branch = prop::collection::vec(simple_stmt(scope), 1..3);
    let if_stmt = (bool_expr(scope), branch.clone(), prop::option::of(branch)).prop_map(|(c, t, e)| {
        let mut s = format!("if {c} then\n{}", indent(&t));
        if let Some(e) = e {
            s.push_str(&format!("else\n{}", indent(&e)));
        }
        s.push_str("end if;");
        s
    });
    prop_oneof![3 => simple_stmt(scope), 1 => if_stmt].boxed()
}

fn indent(stmts: &[String]) -> String {
    stmts
        .iter()
        .flat_map(|s| s.lines())
        .map(|l| format!("   {l}\n"))
        .collect()
}

fn for_loop() -> BoxedStrategy<String> {
    let scope = Scope { in_loop: true, ..BODY };
    (1i64..=3, 1i64..=3, prop::collection::vec(stmt(scope), 1..3))
        .prop_map(|(lo, n, body)| format!("for I in {lo} .. {} loop\n{}end loop;", lo + n - 1, indent(&body)))
        .boxed()
}

fn render(pre: Option<String>, post: Option<String>, first: String, body: Vec<String>, has_loop: bool) -> Program {
    let mut aspects = Vec::new();
    if let Some(p) = pre {
        aspects.push(format!("Pre => {p}"));
    }
    if let Some(p) = post {
        aspects.push(format!("Post => {p}"));
    }
    let with = if aspects.is_empty() {
        String::new()
    } else {
        format!("\n     with {}", aspects.join(",\n          "))
    };
    let params = "X : Small; Y : Small; S : String; R : out Integer";
    let mut stmts = vec![first];
    stmts.extend(body);
    let body: String = stmts
        .iter()
        .flat_map(|s| s.lines())
        .map(|l| format!("      {l}\n"))
        .collect();
    let source = format!(
        "package P is\n   subtype Small is Integer range -4 .. 4;\n   procedure Q ({params}){with};\nend P;\n\n\
         package body P is\n   procedure Q ({params}) is\n      T : Integer := 0;\n      U : Small := 0;\n      C : Character := ' ';\n   begin\n\
         {body}   end Q;\nend P;\n"
    );
    Program { source, has_loop }
}

fn program(with_loop: bool) -> BoxedStrategy<Program> {
    let scope = BODY;
    let contract = Scope { locals: false, result: false, ..BODY };
    let pre = prop::option::weighted(0.6, bool_expr(contract));
    let post = prop::option::weighted(0.5, bool_expr(Scope { result: true, ..contract }));
    let first = int_expr(Scope { result: false, ..BODY }).prop_map(|e| format!("R := {e};"));
    let body = prop::collection::vec(stmt(scope), 0..4);
    if with_loop {
        (pre, post, first, body, for_loop(), prop::collection::vec(stmt(scope), 0..2))
            .prop_map(|(pre, post, first, mut body, l, tail)| {
                body.push(l);
                body.extend(tail);
                render(pre, post, first, body, true)
            })
            .boxed()
    } else {
        (pre, post, first, body)
            .prop_map(|(pre, post, first, body)| render(pre, post, first, body, false))
            .boxed()
    }
}

pub fn straight_line() -> BoxedStrategy<Program> {
    program(false)
}

pub fn with_loop() -> BoxedStrategy<Program> {
    program(true)
}
