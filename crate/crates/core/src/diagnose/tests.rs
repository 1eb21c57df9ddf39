use super::*;
use crate::driver::{analyze, Analysis, CexMode, Options};
use crate::syntax::{SourceFile, SourceSpan};

fn run(files: &[(&str, &str)], opts: &Options) -> Analysis {
    let files: Vec<SourceFile> = files.iter().map(|(p, t)| SourceFile::new(*p, *t)).collect();
    analyze(&files, opts).expect("front end")
}

fn text(files: &[(&str, &str)], opts: &Options) -> String {
    run(files, opts).render(opts)
}

fn scenario(name: &str) -> Vec<(String, String)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    let mut v: Vec<(String, String)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "ads" || e == "adb"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn scenario_text(name: &str, opts: &Options) -> String {
    let files = scenario(name);
    let refs: Vec<(&str, &str)> = files.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    text(&refs, opts)
}

fn cex() -> Options {
    Options {
        counterexamples: CexMode::On,
        ..Options::default()
    }
}

fn package(spec: &str, body: &str) -> String {
    format!("package P is\n{spec}\nend P;\n\npackage body P is\n{body}\nend P;\n")
}

#[test]
fn index_block() {
    assert_eq!(
        scenario_text("s2_index", &cex()),
        "strings.adb:6:12: medium: array index check might fail\n\
         \x20   6 |         S (J) := ' ';\n\
         \x20     |            ^ here\n\
         \x20 e.g. when J = 1\n\
         \x20       and S'First = 2\n\
         \x20 reason for check: value must be a valid index into the array\n"
    );
}

#[test]
fn counterexamples_follow_the_option() {
    let off = scenario_text("s2_index", &Options::default());
    assert!(!off.contains("e.g."), "{off}");
    assert!(off.contains("reason for check"));
}

#[test]
fn contract_message_and_fix() {
    let out = scenario_text("s4_contract", &Options::default());
    assert!(out.contains(": medium: postcondition might fail, cannot prove All_Blanks (S)\n"), "{out}");
    assert!(out.contains(
        "  possible fix: you should consider adding a postcondition to function All_Blanks\n  or turning it into an expression function\n"
    ));
    assert!(!out.contains("loop invariant"));
}

#[test]
fn proved_checks_are_silent() {
    assert_eq!(scenario_text("s5c_initialized", &Options::default()), "");
}

#[test]
fn loop_hint_names_the_loop_and_variable() {
    let out = scenario_text("s3_frame", &Options::default());
    assert!(
        out.contains("  possible fix: loop at strings.adb:5 should mention S in a loop invariant\n    5 |       for J in S'Range loop\n      |                        ^ here\n"),
        "{out}"
    );
}

const COUNTER_SPEC: &str = "   procedure Q (S : String; R : out Integer)\n     with Post => R = 1;";

fn counter(tail: &str) -> String {
    package(
        COUNTER_SPEC,
        &format!(
            "   procedure Q (S : String; R : out Integer) is\n   begin\n      R := 0;\n      for J in S'Range loop\n         R := R + 1;\n      end loop;\n{tail}   end Q;"
        ),
    )
}

#[test]
fn loop_hint_needs_the_loop_to_reach_the_check() {
    let reaching = text(&[("p.adb", &counter(""))], &Options::default());
    assert!(reaching.contains("should mention R in a loop invariant"), "{reaching}");
    let overwritten = text(&[("p.adb", &counter("      R := 0;\n"))], &Options::default());
    assert!(overwritten.contains("postcondition might fail"), "{overwritten}");
    assert!(!overwritten.contains("loop invariant"), "{overwritten}");
}

fn positive(post: &str) -> String {
    package(
        &format!(
            "   function Pos (X : Integer) return Boolean{post};\n   procedure Q (X : Integer)\n     with Post => Pos (X);"
        ),
        "   function Pos (X : Integer) return Boolean is\n   begin\n      return X > 0;\n   end Pos;\n\n   procedure Q (X : Integer) is\n   begin\n      null;\n   end Q;",
    )
}

#[test]
fn function_contract_hint_only_without_post() {
    let bare = text(&[("p.adb", &positive(""))], &Options::default());
    assert!(bare.contains("adding a postcondition to function Pos"), "{bare}");
    let with_post = text(&[("p.adb", &positive("\n     with Post => Pos'Result = (X > 0)"))], &Options::default());
    assert!(with_post.contains("postcondition might fail"), "{with_post}");
    assert!(!with_post.contains("possible fix"), "{with_post}");
}

#[test]
fn expression_functions_get_no_contract_hint() {
    let src = package(
        "   function Pos (X : Integer) return Boolean is (X > 0);\n   procedure Q (X : Integer)\n     with Post => Pos (X);",
        "   procedure Q (X : Integer) is\n   begin\n      null;\n   end Q;",
    );
    let out = text(&[("p.adb", &src)], &Options::default());
    assert!(out.contains("postcondition might fail"), "{out}");
    assert!(!out.contains("possible fix"), "{out}");
}

fn guarded(pre: &str) -> String {
    let spec = format!("   procedure Q (B : Boolean; J : Integer; S : String)\n     with Pre => {pre};");
    package(
        &spec,
        "   procedure Q (B : Boolean; J : Integer; S : String) is\n   begin\n      null;\n   end Q;",
    )
}

#[test]
fn and_then_hint() {
    let plain = text(
        &[("p.adb", &guarded("J >= S'First and J <= S'Last and S (J) = ' '"))],
        &Options::default(),
    );
    assert!(plain.contains("array index check might fail"), "{plain}");
    assert!(
        plain.contains("possible fix: use \"and then\" instead of \"and\" in the precondition at p.adb:3"),
        "{plain}"
    );
    let short = text(
        &[("p.adb", &guarded("J >= S'First and then J <= S'Last and then S (J) = ' '"))],
        &Options::default(),
    );
    assert_eq!(short, "");
    let irrelevant = text(&[("p.adb", &guarded("B and S (J) = ' '"))], &Options::default());
    assert!(irrelevant.contains("array index check might fail"), "{irrelevant}");
    assert!(!irrelevant.contains("and then"), "{irrelevant}");
}

fn quantified(body: &str) -> String {
    format!(
        "package P is\n   function F (S : String) return Boolean is\n     ({body});\nend P;\n"
    )
}

#[test]
fn lint_fires_only_on_existential_if_without_else() {
    let lint = |body: &str| {
        let a = run(&[("p.ads", &quantified(body))], &Options::default());
        a.diagnostics.into_iter().filter(|d| d.kind == "lint").collect::<Vec<_>>()
    };
    let hit = lint("for some X in S'Range => (if X > 1 then S (X) = ' ')");
    assert_eq!(hit.len(), 1);
    assert_eq!(hit[0].message, "suspicious expression");
    assert_eq!(
        hit[0].notes,
        [
            "did you mean (for all X => (if X > 1 then S (X) = ' '))",
            "or (for some X => X > 1 and then S (X) = ' ') instead?"
        ]
    );
    assert!(lint("for some X in S'Range => (if X > 1 then S (X) = ' ' else S (X) = 'a')").is_empty());
    assert!(lint("for all X in S'Range => (if X > 1 then S (X) = ' ')").is_empty());
    assert!(lint("for some X in S'Range => X > 1 and then S (X) = ' '").is_empty());
}

#[test]
fn info_notes_are_gated() {
    let quiet = scenario_text("s3_frame", &Options::default());
    assert!(!quiet.contains("info:"));
    let info = Options {
        info: true,
        ..Options::default()
    };
    let loud = scenario_text("s3_frame", &info);
    let lines: Vec<&str> = loud.lines().filter(|l| l.contains(": info: ")).collect();
    assert_eq!(
        lines,
        [
            "strings.adb:5:24: info: cannot unroll loop (too many loop iterations)",
            "strings.ads:6:18: info: expression function body not available for proof"
        ]
    );
}

#[test]
fn proved_variant_makes_body_available() {
    let files = scenario("s3_frame");
    let spec = files[1].1.replace(
        "function All_Blanks (S : String) return Boolean is",
        "function All_Blanks (S : String) return Boolean\n     with Subprogram_Variant => (Decreases => S'Length) is",
    );
    assert_ne!(spec, files[1].1);
    let info = Options {
        info: true,
        ..Options::default()
    };
    let out = text(&[("strings.adb", &files[0].1), ("strings.ads", &spec)], &info);
    assert!(!out.contains("body not available"), "{out}");
    assert!(out.contains("cannot unroll loop"), "{out}");
}

fn branchy(pre: &str, cond: &str) -> String {
    package(
        &format!("   procedure Q (X : Integer; R : out Integer)\n     with Pre => {pre};"),
        &format!(
            "   procedure Q (X : Integer; R : out Integer) is\n   begin\n      R := 0;\n      if {cond} then\n         R := 1;\n      end if;\n   end Q;"
        ),
    )
}

fn warnings(src: &str) -> Vec<(u32, String)> {
    let opts = Options {
        proof_warnings: true,
        ..Options::default()
    };
    run(&[("p.adb", src)], &opts)
        .diagnostics
        .into_iter()
        .filter(|d| d.kind == "proof_warning")
        .map(|d| (d.span.line, d.message))
        .collect()
}

#[test]
fn inconsistent_contexts() {
    let msg = "context is unsatisfiable (dead code or contradictory contract?)".to_string();
    assert_eq!(warnings(&branchy("X < 3", "X > 5")), [(10, msg.clone())]);
    assert!(warnings(&branchy("X < 3", "X > 1")).is_empty());
    let dead = warnings(&branchy("False", "X > 5"));
    assert_eq!(dead.len(), 1, "{dead:?}");
    assert_eq!(dead[0].1, msg);
    assert!(dead[0].0 < 10, "{dead:?}");
    let quiet = run(&[("p.adb", &branchy("X < 3", "X > 5"))], &Options::default());
    assert!(quiet.diagnostics.iter().all(|d| d.kind != "proof_warning"));
}

#[test]
fn render_layout() {
    let mut sources = crate::syntax::SourceMap::new();
    sources.add(SourceFile::new("a.adb", "X := Y;\n"));
    let span = SourceSpan::new("a.adb".into(), 1, 6, 1, 5);
    let mut d = Diagnostic::new(Severity::Warning, span.clone(), "lint", "something odd".into());
    d.continuation.push("(more)".into());
    d.snippet = Some(span);
    d.notes.push("note one".into());
    d.reason = Some("because".into());
    d.fixes.push(FixHint {
        kind: HintKind::AndThen,
        lines: vec!["first".into(), "second".into()],
        spans: Vec::new(),
    });
    let out = render_text(&d, &sources, &RenderOptions::default());
    assert_eq!(
        out,
        "a.adb:1:6: warning: something odd\n\
         \x20                   (more)\n\
         \x20   1 | X := Y;\n\
         \x20     |      ^ here\n\
         \x20 note one\n\
         \x20 reason for check: because\n\
         \x20 possible fix: first\n\
         \x20 second\n"
    );
    let json = to_json(&d);
    assert_eq!(json["severity"], "warning");
    assert_eq!(json["line"], 1);
    assert_eq!(json["column"], 6);
    assert_eq!(json["fix"][0], "first second");
    assert_eq!(json["message"], "something odd (more)\nnote one");
}

#[test]
fn sorting_is_by_location() {
    let at = |line, col| SourceSpan::new("a.adb".into(), line, col, 1, (line * 100 + col) as usize);
    let mut ds = vec![
        Diagnostic::new(Severity::Medium, at(3, 1), "x", "c".into()),
        Diagnostic::new(Severity::Medium, at(1, 9), "x", "b".into()),
        Diagnostic::new(Severity::Medium, at(1, 2), "x", "a".into()),
    ];
    sort_diagnostics(&mut ds);
    let order: Vec<&str> = ds.iter().map(|d| d.message.as_str()).collect();
    assert_eq!(order, ["a", "b", "c"]);
}
