//! Property tests over generated inputs, each checked against an
//! independent oracle (the interpreter, a second parse, or brute force).

use proptest::prelude::*;

use miniprove_core::driver::{analyze, CexMode, Options, Status};
use miniprove_core::flow::analyze_init;
use miniprove_core::interp::{self, enumerate_inputs, InputDomain, Outcome, Value};
use miniprove_core::sema::{iteration_count, loop_shapes, resolve, IterationCount, ResolvedUnit};
use miniprove_core::solver::{check_validity, DomainBounds, SolveResult};
use miniprove_core::syntax::{parse_expr, parse_unit, pretty, tokenize, SourceFile};
use miniprove_core::vcgen::{split_vc, CheckKind, Sym};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn int_expr(vars: &'static [&'static str]) -> BoxedStrategy<String> {
    let leaf = prop_oneof![
        (-4i64..=4).prop_map(|v| if v < 0 { format!("({v})") } else { v.to_string() }),
        proptest::sample::select(vars).prop_map(str::to_string),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop_oneof![Just("+"), Just("-"), Just("*")], inner.clone())
                .prop_map(|(a, op, b)| format!("({a} {op} {b})")),
            inner.prop_map(|a| format!("(-{a})")),
        ]
    })
    .boxed()
}

fn bool_expr(vars: &'static [&'static str]) -> BoxedStrategy<String> {
    let cmp = (
        int_expr(vars),
        prop_oneof![Just("<"), Just("<="), Just("="), Just("/="), Just(">="), Just(">")],
        int_expr(vars),
    )
        .prop_map(|(a, op, b)| format!("{a} {op} {b}"));
    cmp.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), prop_oneof![Just("and"), Just("or"), Just("and then"), Just("or else")], inner.clone())
                .prop_map(|(a, op, b)| format!("({a}) {op} ({b})")),
            inner.clone().prop_map(|a| format!("not ({a})")),
            (inner.clone(), inner.clone(), inner).prop_map(|(c, a, b)| format!("(if {c} then {a} else {b})")),
        ]
    })
    .boxed()
}

fn unit(source: &str) -> ResolvedUnit {
    resolve(&parse_unit("p.adb", source).expect("parse")).expect("resolve")
}

const XY: &[&str] = &["X", "Y"];

fn asserting(assigns: &[String], cond: &str) -> String {
    let body: String = assigns.iter().map(|a| format!("      {a}\n")).collect();
    format!(
        "package P is\n   subtype Small is Integer range -4 .. 4;\n   procedure Q (X : Small; Y : Small);\nend P;\n\n\
         package body P is\n   procedure Q (X : Small; Y : Small) is\n      T : Integer := 0;\n   begin\n{body}      pragma Assert ({cond});\n   end Q;\nend P;\n"
    )
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn pretty_printing_is_a_fixpoint(text in bool_expr(XY)) {
        let e = parse_expr("e", &text).unwrap();
        let once = pretty(&e);
        let again = parse_expr("e", &once).unwrap();
        prop_assert_eq!(pretty(&again), once);
    }

    #[test]
    fn token_spans_are_ordered_and_disjoint(text in bool_expr(XY)) {
        let tokens = tokenize("e", &text).unwrap();
        for w in tokens.windows(2) {
            prop_assert!(w[0].span.offset + w[0].span.length as usize <= w[1].span.offset);
        }
    }

    #[test]
    fn parse_errors_point_into_the_input(text in "[a-zA-Z0-9 ();:=+<>'\"\n.-]{0,40}") {
        if let Err(e) = parse_unit("p.adb", &text) {
            prop_assert!(e.span().offset <= text.len(), "{:?} in {:?}", e.span(), text);
        }
    }

    #[test]
    fn iteration_count_matches_trip_count(lo in -8i64..=8, hi in -8i64..=8) {
        let src = format!(
            "procedure P (N : out Integer) is\nbegin\n   N := 0;\n   for I in {lo} .. {hi} loop\n      N := N + 1;\n   end loop;\nend P;\n"
        );
        let u = unit(&src);
        let sp = u.unit.subprogram("P").unwrap();
        let IterationCount::Static(n) = iteration_count(&loop_shapes(sp)[0]) else {
            return Err(TestCaseError::fail("not static"));
        };
        match interp::run(&u, "P", &Default::default(), interp::DEFAULT_FUEL) {
            Outcome::Normal { bindings, .. } => {
                let trips = bindings.iter().find(|(k, _)| k.eq_ignore_ascii_case("n")).map(|(_, v)| v.clone());
                prop_assert_eq!(trips, Some(Value::Int(n as i64)));
            }
            other => return Err(TestCaseError::fail(format!("{other:?}"))),
        }
    }

    /// Straight-line assertions: the solver's verdict agrees exactly with
    /// exhaustive interpretation, since the parameter ranges lie inside the
    /// solver's window.
    #[test]
    fn solver_agrees_with_interpreter(
        assigns in prop::collection::vec(int_expr(&["X", "Y", "T"]).prop_map(|e| format!("T := {e};")), 0..3),
        cond in bool_expr(&["X", "Y", "T"]),
    ) {
        let src = asserting(&assigns, &cond);
        let files = vec![SourceFile::new("p.adb", src.clone())];
        let opts = Options { counterexamples: CexMode::On, ..Options::default() };
        let a = analyze(&files, &opts).unwrap();
        let r: Vec<_> = a.results().filter(|r| r.kind == CheckKind::Assertion).collect();
        prop_assert_eq!(r.len(), 1, "{:?}", a.results().map(|r| r.kind).collect::<Vec<_>>());
        let sp = a.unit.unit.subprogram("Q").unwrap();
        let failing = enumerate_inputs(sp, &a.unit.symbols, &InputDomain::default())
            .into_iter()
            .find(|args| interp::run(&a.unit, "Q", args, interp::DEFAULT_FUEL).failure().is_some());
        prop_assert_eq!(r[0].status == Status::Proved, failing.is_none(), "{}", src);
        if r[0].status == Status::Unproved {
            prop_assert_eq!(r[0].replay, Some(interp::ReplayVerdict::Confirmed), "{}", src);
        }
    }

    /// Solver results are honest and reproducible, and splitting preserves
    /// validity.
    #[test]
    fn solver_results_are_honest_and_split_preserves_validity(
        assigns in prop::collection::vec(int_expr(&["X", "Y", "T"]).prop_map(|e| format!("T := {e};")), 0..3),
        cond in bool_expr(&["X", "Y", "T"]),
    ) {
        let src = asserting(&assigns, &cond);
        let a = analyze(&[SourceFile::new("p.adb", src.clone())], &Options::default()).unwrap();
        let bounds = DomainBounds::default();
        for sub in &a.subprograms {
            for cv in &sub.vcs.vcs {
                let first = check_validity(&cv.vc, &bounds).unwrap();
                prop_assert_eq!(&first, &check_validity(&cv.vc, &bounds).unwrap());
                if let SolveResult::Counterexample(m) = &first {
                    for h in &cv.vc.hypotheses {
                        prop_assert_eq!(m.eval(&cv.vc, &h.formula).ok().and_then(|v| v.as_bool()), Some(true));
                    }
                    prop_assert_eq!(m.eval(&cv.vc, &cv.vc.goal).ok().and_then(|v| v.as_bool()), Some(false));
                }
                let leaves_proved = split_vc(&cv.vc)
                    .iter()
                    .all(|l| check_validity(&l.vc, &bounds).unwrap().is_proved());
                prop_assert_eq!(first.is_proved(), leaves_proved, "{}", src);
            }
        }
    }
}

fn flow_program(stmts: &[String], result: &str) -> String {
    let body: String = stmts.iter().map(|s| format!("      {s}\n")).collect();
    format!(
        "package P is\n   subtype Small is Integer range -4 .. 4;\n   procedure Q (X : Small; R : out Integer);\nend P;\n\n\
         package body P is\n   procedure Q (X : Small; R : out Integer) is\n      A : Integer;\n      B : Integer;\n   begin\n{body}      R := {result};\n   end Q;\nend P;\n"
    )
}

fn flow_stmt() -> BoxedStrategy<String> {
    let target = prop_oneof![Just("A"), Just("B")];
    let simple = (target.clone(), int_expr(&["X"])).prop_map(|(t, e)| format!("{t} := {e};"));
    let guarded = (int_expr(&["X"]), target, int_expr(&["X"]))
        .prop_map(|(c, t, e)| format!("if {c} > 0 then {t} := {e}; end if;"));
    let copy = prop_oneof![Just("A := B;"), Just("B := A;")].prop_map(str::to_string);
    prop_oneof![2 => simple, 2 => guarded, 1 => copy].boxed()
}

proptest! {
    #![proptest_config(config(96))]

    /// No finding from definite-initialization analysis means no execution
    /// reads an uninitialized variable.
    #[test]
    fn flow_analysis_is_sound(
        stmts in prop::collection::vec(flow_stmt(), 0..4),
        result in prop_oneof![Just("A"), Just("B"), Just("A + B"), Just("X")],
    ) {
        let src = flow_program(&stmts, result);
        let u = unit(&src);
        let sp = u.unit.subprogram("Q").unwrap();
        if analyze_init(sp, &u.symbols).is_empty() {
            for args in enumerate_inputs(sp, &u.symbols, &InputDomain::default()) {
                let out = interp::run(&u, "Q", &args, interp::DEFAULT_FUEL);
                prop_assert!(!matches!(out, Outcome::UninitRead { .. }), "{:?}\n{}", out, src);
            }
        }
    }

    #[test]
    fn interpretation_is_deterministic(stmts in prop::collection::vec(flow_stmt(), 0..4), x in -4i64..=4) {
        let src = flow_program(&stmts, "X");
        let u = unit(&src);
        let args = [("X".to_string(), Value::Int(x))].into_iter().collect();
        prop_assert_eq!(
            interp::run(&u, "Q", &args, interp::DEFAULT_FUEL),
            interp::run(&u, "Q", &args, interp::DEFAULT_FUEL)
        );
    }
}

/// Counterexample excerpts only name symbols of the failed goal.
#[test]
fn excerpts_name_goal_symbols() {
    let src = asserting(&["T := X - Y;".into()], "T < 3 and X > (-4)");
    let a = analyze(&[SourceFile::new("p.adb", src)], &Options::default()).unwrap();
    let mut seen = 0;
    for r in a.results() {
        let (Some((_, leaf)), Some(model)) = (&r.failed, &r.model) else {
            continue;
        };
        let names = leaf.vc.names();
        let mut free = std::collections::BTreeSet::<Sym>::new();
        leaf.vc.goal.free_syms(&mut free);
        let goal_names: Vec<&String> = free.iter().filter_map(|s| names.get(s)).collect();
        for (name, _) in miniprove_core::diagnose::excerpt(&leaf.vc, model) {
            assert!(goal_names.contains(&&name), "{name} not in {goal_names:?}");
            seen += 1;
        }
    }
    assert!(seen > 0);
}
