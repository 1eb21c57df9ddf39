//! Acceptance suite: transcript reproduction for the Erase walkthrough,
//! the quantifier lint, and property checks for soundness, splitting and
//! determinism. Prints one PASS/FAIL line per criterion.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use miniprove::scenarios::{case_dirs, run_case};
use miniprove_core::driver::{analyze, load_files, Analysis, CexMode, Options, Status};
use miniprove_core::interp::{self, enumerate_inputs, InputDomain, Outcome, ReplayVerdict};
use miniprove_core::solver::{check_validity, DomainBounds, SVal, SolveResult};
use miniprove_core::syntax::SourceFile;
use miniprove_core::vcgen::{split_vc, CheckKind, Vc};

const INDEX_BLOCK: &str = "\
strings.adb:6:13: medium: array index check might fail
    6 |         S (J) := ' ';
      |            ^ here
  e.g. when J = 1
        and S'First = 2
  reason for check: value must be a valid index into the array
";

const FRAME_BLOCK: &str = "\
strings.ads:9:19: medium: postcondition might fail
    9 |     with Post => All_Blanks (S);
      |                  ^~~~~~~~~~~~~
  possible fix: loop at strings.adb:5 should mention S in a loop invariant
    5 |      for J in S'Range loop
      |                       ^ here
";

const FRAME_INFO: &str = "\
strings.adb:5:24: info: cannot unroll loop (too many loop iterations)
strings.ads:6:18: info: expression function body not available for proof
                        (\"All_Blanks\" might not return)
";

const CONTRACT_BLOCK: &str = "\
strings.ads:7:19: medium: postcondition might fail, cannot prove All_Blanks (S)
    7 |     with Post => All_Blanks (S);
      |                  ^~~~~~~~~~~~~
  possible fix: you should consider adding a postcondition to function All_Blanks
  or turning it into an expression function
";

const SPLIT_GOAL: &str = "goal def'vc : __attr__init (get2 S _f) = True";
const GET2: &str = "function get2 (f:'a -> 'b) (x:'a) : 'b = f \\@ x";
const WRAPPER_DECLS: &str = "\
type character__init_wrapper =
  | character__init_wrapper'mk (rec__value:character) (__attr__init:bool)

function character__init_wrapper___attr__init__projection (a1:
  character__init_wrapper) : bool = __attr__init a1";

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn sources(case: &str) -> Vec<PathBuf> {
    let dir = corpus().join(case);
    let mut v: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "ads" || e == "adb"))
        .collect();
    v.sort();
    v
}

fn cli(case: &str, flags: &[&str]) -> (String, i32) {
    let mut args: Vec<String> = vec!["miniprove".into()];
    args.extend(flags.iter().map(|s| s.to_string()));
    args.extend(sources(case).iter().map(|p| p.display().to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = miniprove::main_with_args(args, &mut std::io::empty(), &mut out, &mut err);
    out.extend(err);
    (String::from_utf8(out).unwrap(), code)
}

fn analysis(case: &str, opts: &Options) -> Analysis {
    let files = load_files(&sources(case)).unwrap();
    analyze(&files, opts).unwrap()
}

fn cex_on() -> Options {
    Options {
        counterexamples: CexMode::On,
        ..Options::default()
    }
}

/// Replaces `file:line[:col]` locations and snippet gutters with fixed
/// placeholders.
fn strip_locations(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines() {
        let mut line = line.to_string();
        if let Some(bar) = line.find(" |") {
            if line[..bar].trim().chars().all(|c| c.is_ascii_digit()) {
                line = format!("#{}", &line[bar..]);
            }
        }
        let words: Vec<String> = line
            .split(' ')
            .map(|w| {
                let parts: Vec<&str> = w.split(':').collect();
                let is_loc = parts.len() >= 2
                    && (parts[0].ends_with(".ads") || parts[0].ends_with(".adb"))
                    && parts[1].chars().all(|c| c.is_ascii_digit());
                if is_loc {
                    let tail = if w.ends_with(':') { ":" } else { "" };
                    format!("LOC{tail}")
                } else {
                    w.to_string()
                }
            })
            .collect();
        out.push_str(&words.join(" "));
        out.push('\n');
    }
    out
}

/// Location-free and with runs of spaces collapsed.
fn loose(text: &str) -> String {
    strip_locations(text)
        .lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
}

type Outcome8 = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion_1() -> Outcome8 {
    let a = analysis("s2_index", &cex_on());
    let unproved: Vec<_> = a.results().filter(|r| r.status != Status::Proved).collect();
    ensure(unproved.len() == 1, format!("{} unproved obligations", unproved.len()))?;
    ensure(unproved[0].kind == CheckKind::ArrayIndex, format!("kind {:?}", unproved[0].kind))?;
    ensure(
        unproved[0].replay == Some(ReplayVerdict::Confirmed),
        format!("replay {:?}", unproved[0].replay),
    )?;
    let (text, code) = cli("s2_index", &["--counterexamples", "on"]);
    ensure(code == 1, format!("exit status {code}"))?;
    ensure(
        strip_locations(&text) == strip_locations(INDEX_BLOCK),
        format!("block differs:\n{text}"),
    )?;
    Ok("one array_index obligation, block identical modulo locations, replay confirmed".into())
}

fn criterion_2() -> Outcome8 {
    let (text, _) = cli("s3_frame", &[]);
    ensure(
        loose(&text).contains(&loose(FRAME_BLOCK)),
        format!("postcondition block with loop hint not found:\n{text}"),
    )?;
    ensure(
        text.contains("possible fix: loop at strings.adb:5 should mention S in a loop invariant"),
        "fix line",
    )?;
    let (text, _) = cli("s3_frame", &["--info"]);
    let mut info = String::new();
    let mut lines = text.lines().peekable();
    while let Some(l) = lines.next() {
        if l.contains(": info: ") {
            info.push_str(l);
            info.push('\n');
            while let Some(c) = lines.peek().filter(|c| c.starts_with(' ') && !c.trim_start().starts_with(|ch: char| ch.is_ascii_digit() || ch == '|')) {
                info.push_str(c);
                info.push('\n');
                lines.next();
            }
        }
    }
    ensure(info == FRAME_INFO, format!("info lines:\n{info}"))?;
    Ok("loop invariant hint with loop snippet; exactly the two info lines".into())
}

fn criterion_3() -> Outcome8 {
    let (text, _) = cli("s4_contract", &[]);
    ensure(
        loose(&text).contains(&loose(CONTRACT_BLOCK)),
        format!("contract block not found:\n{text}"),
    )?;
    ensure(!text.contains("loop invariant"), "unexpected loop invariant hint")?;
    Ok("cannot-prove message with function contract fix, no loop hint".into())
}

fn criterion_4() -> Outcome8 {
    // (a) Expression function: postcondition proved, initialization left to flow analysis.
    let a = analysis("s5a_expr_function", &Options::default());
    let post: Vec<_> = a.results().filter(|r| r.kind == CheckKind::Postcondition).collect();
    ensure(
        !post.is_empty() && post.iter().all(|r| r.status == Status::Proved),
        "postcondition not proved in (a)",
    )?;
    let flow_a = a.diagnostics.iter().filter(|d| d.kind == "flow").count();
    let (text_a, _) = cli("s5a_expr_function", &[]);
    ensure(
        flow_a > 0 && text_a.contains("\"S\" might not be initialized"),
        format!("flow findings in (a):\n{text_a}"),
    )?;

    // (b) Relaxed initialization: proof replaces flow analysis.
    let b = analysis("s5b_relaxed", &Options::default());
    ensure(b.diagnostics.iter().all(|d| d.kind != "flow"), "flow findings remain in (b)")?;
    let init_unproved = b
        .results()
        .filter(|r| r.kind == CheckKind::InitCheck && r.status != Status::Proved)
        .count();
    ensure(init_unproved > 0, "no unproved init_check in (b)")?;
    let (session, _) = run_case(&corpus().join("s5b_explore"))?;
    let blocks: Vec<&str> = session.split("\n> ").collect();
    let response = |cmd: &str| {
        blocks
            .iter()
            .find(|b| b.starts_with(cmd))
            .map(|b| b[cmd.len()..].trim().to_string())
            .unwrap_or_default()
    };
    ensure(
        response("split_vc").lines().last() == Some(SPLIT_GOAL),
        format!("split goal: {}", response("split_vc")),
    )?;
    ensure(response("print get2") == GET2, format!("get2: {}", response("print get2")))?;
    ensure(
        response("search __attr__init") == WRAPPER_DECLS,
        format!("search: {}", response("search __attr__init")),
    )?;
    let h_shape = response("search to_wrapper").lines().any(|l| {
        l.split_once(" : ").is_some_and(|(h, rest)| {
            h.starts_with('H') && h[1..].chars().all(|c| c.is_ascii_digit()) && rest == "S = set2 S1 J (to_wrapper o)"
        })
    });
    ensure(h_shape, "no hypothesis of shape Hn : S = set2 S1 J (to_wrapper o)")?;

    // (c) 'Initialized invariant: everything proved.
    let c = analysis("s5c_initialized", &Options::default());
    ensure(a.results().count() > 0 && c.results().all(|r| r.status == Status::Proved), "unproved in (c)")?;
    let spec = std::fs::read_to_string(corpus().join("s5c_initialized/strings.ads")).unwrap();
    ensure(spec.contains("Post => All_Blanks (S) and then S'Initialized"), "postcondition text")?;
    let (text_c, code) = cli("s5c_initialized", &[]);
    ensure(code == 0 && text_c.is_empty(), format!("exit {code}:\n{text_c}"))?;
    Ok(format!(
        "flow findings then {init_unproved} unproved init checks, explorer transcript matches, all proved at the end"
    ))
}

fn criterion_5() -> Outcome8 {
    let (text, code) = cli("lint", &[]);
    let spec = std::fs::read_to_string(corpus().join("lint/search.ads")).unwrap();
    let line_of = |needle: &str| spec.lines().position(|l| l.contains(needle)).map(|i| i + 1);
    let suspicious = line_of("Has_Blank_Suspicious").ok_or("fixture")?;
    let warnings: Vec<&str> = text.lines().filter(|l| l.contains(": warning: ")).collect();
    ensure(warnings.len() == 1, format!("{} warnings:\n{text}", warnings.len()))?;
    let body_line = suspicious + 1;
    ensure(
        warnings[0].starts_with(&format!("search.ads:{body_line}:")) && warnings[0].ends_with("warning: suspicious expression"),
        format!("warning: {}", warnings[0]),
    )?;
    ensure(text.contains("  did you mean (for all X => (if "), "first suggestion")?;
    ensure(text.contains("  or (for some X => ") && text.contains(") instead?"), "second suggestion")?;
    ensure(code == 0, format!("exit status {code}"))?;
    Ok("fires once on the if-inside-some form, silent on both rewrites".into())
}

fn runner(seed: u8) -> TestRunner {
    TestRunner::new_with_rng(Config::default(), TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

fn analyze_program(source: &str) -> Result<Analysis, String> {
    let files = vec![SourceFile::new("p.adb", source.to_string())];
    analyze(&files, &cex_on()).map_err(|e| format!("{e}\n{source}"))
}

#[derive(Default)]
struct SoundnessStats {
    straight: usize,
    loops: usize,
    all_proved: usize,
    runs: usize,
    confirmed: usize,
}

fn check_soundness(source: &str, stats: &mut SoundnessStats) -> Result<(), String> {
    let a = analyze_program(source)?;
    let proved = a.results().all(|r| r.status == Status::Proved);
    if proved {
        stats.all_proved += 1;
        let sp = a.unit.unit.subprogram("Q").ok_or("no Q")?;
        let domain = InputDomain::default();
        for args in enumerate_inputs(sp, &a.unit.symbols, &domain) {
            stats.runs += 1;
            let outcome = interp::run(&a.unit, "Q", &args, interp::DEFAULT_FUEL);
            if matches!(outcome, Outcome::CheckFailure { .. } | Outcome::UninitRead { .. } | Outcome::Error(_)) {
                return Err(format!("all VCs proved but {outcome:?} on {args:?}\n{source}"));
            }
        }
    }
    for r in a.results() {
        let (Some((_, leaf)), Some(_)) = (&r.failed, &r.model) else {
            continue;
        };
        if leaf.vc.cut_crossed {
            continue;
        }
        if r.replay != Some(ReplayVerdict::Confirmed) {
            return Err(format!("{} counterexample replay {:?}\n{source}", r.id, r.replay));
        }
        stats.confirmed += 1;
    }
    Ok(())
}

fn criterion_6() -> Outcome8 {
    let mut stats = SoundnessStats::default();
    let mut run = runner(6);
    let straight = common::straight_line();
    let looped = common::with_loop();
    for _ in 0..200 {
        let p = straight.new_tree(&mut run).map_err(|e| e.to_string())?.current();
        stats.straight += usize::from(!p.has_loop);
        check_soundness(&p.source, &mut stats)?;
    }
    for _ in 0..50 {
        let p = looped.new_tree(&mut run).map_err(|e| e.to_string())?.current();
        stats.loops += usize::from(p.has_loop);
        check_soundness(&p.source, &mut stats)?;
    }
    ensure(stats.straight == 200 && stats.loops == 50, "program counts")?;
    ensure(stats.all_proved > 0 && stats.confirmed > 0, "degenerate sample")?;
    Ok(format!(
        "{} straight-line + {} loop programs; {} fully proved ({} interpreter runs); {} counterexamples confirmed",
        stats.straight, stats.loops, stats.all_proved, stats.runs, stats.confirmed
    ))
}

fn as_bool(v: Result<SVal, impl std::fmt::Debug>) -> Option<bool> {
    match v {
        Ok(SVal::Bool(b)) => Some(b),
        _ => None,
    }
}

/// Checks one VC: the original is valid iff every leaf is, and each leaf
/// counterexample is also a counterexample of the original.
fn check_split(vc: &Vc, bounds: &DomainBounds) -> Result<bool, String> {
    let original = check_validity(vc, bounds).map_err(|e| e.to_string())?;
    if original == SolveResult::ResourceOut {
        return Ok(false);
    }
    let mut all_leaves_proved = true;
    for leaf in split_vc(vc) {
        match check_validity(&leaf.vc, bounds).map_err(|e| e.to_string())? {
            SolveResult::Proved => {}
            SolveResult::ResourceOut => return Ok(false),
            SolveResult::Counterexample(m) => {
                all_leaves_proved = false;
                let hyps = vc.hypotheses.iter().all(|h| as_bool(m.eval(vc, &h.formula)) == Some(true));
                let goal = as_bool(m.eval(vc, &vc.goal));
                if !hyps || goal != Some(false) {
                    return Err(format!(
                        "leaf counterexample does not falsify the original\nleaf: {}\noriginal: {}",
                        leaf.vc.show(&leaf.vc.goal),
                        vc.show(&vc.goal)
                    ));
                }
            }
        }
    }
    if original.is_proved() != all_leaves_proved {
        return Err(format!(
            "validity disagrees (original proved: {}) on {}",
            original.is_proved(),
            vc.show(&vc.goal)
        ));
    }
    Ok(true)
}

fn criterion_7() -> Outcome8 {
    let bounds = DomainBounds::default();
    let mut run = runner(7);
    let strategies = [common::straight_line(), common::with_loop()];
    let (mut checked, mut multi, mut skipped) = (0usize, 0usize, 0usize);
    let mut k = 0;
    while checked < 150 {
        let p = strategies[k % 2].new_tree(&mut run).map_err(|e| e.to_string())?.current();
        k += 1;
        let a = analyze_program(&p.source)?;
        for sub in &a.subprograms {
            for cv in &sub.vcs.vcs {
                if check_split(&cv.vc, &bounds)? {
                    checked += 1;
                    multi += usize::from(split_vc(&cv.vc).len() > 1);
                } else {
                    skipped += 1;
                }
            }
        }
    }
    ensure(multi > 0, "no VC split into several leaves")?;
    Ok(format!(
        "{checked} VCs agree ({multi} with several leaves, {skipped} skipped at resource limit)"
    ))
}

fn criterion_8() -> Outcome8 {
    let run_all = || -> Result<Vec<String>, String> {
        let mut outputs = Vec::new();
        for dir in case_dirs(&corpus())? {
            outputs.push(run_case(&dir)?.0);
            let name = dir.file_name().unwrap().to_string_lossy().into_owned();
            if sources(&name).is_empty() {
                continue;
            }
            for format in ["text", "json"] {
                let flags = ["--level", "2", "--info", "--proof-warnings", "--cex-trace", "--format", format];
                outputs.push(cli(&name, &flags).0);
            }
        }
        Ok(outputs)
    };
    let first = run_all()?;
    let second = run_all()?;
    ensure(first == second, "outputs differ between runs")?;
    let bytes: usize = first.iter().map(String::len).sum();
    Ok(format!("{} outputs, {bytes} bytes, identical across two runs", first.len()))
}

fn main() {
    type Check = fn() -> Outcome8;
    let criteria: [(u32, &str, Duration, Check); 8] = [
        (1, "index check transcript", Duration::from_secs(1), criterion_1),
        (2, "loop invariant hint and info notes", Duration::from_secs(1), criterion_2),
        (3, "function contract fix", Duration::from_secs(1), criterion_3),
        (4, "initialization sequence and explorer", Duration::from_secs(5), criterion_4),
        (5, "suspicious quantifier lint", Duration::from_secs(1), criterion_5),
        (6, "soundness against the interpreter", Duration::from_secs(120), criterion_6),
        (7, "splitting preserves validity", Duration::from_secs(60), criterion_7),
        (8, "determinism", Duration::from_secs(60), criterion_8),
    ];
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let verdict = match result {
            Ok(_) if took > limit => Err(format!("took {took:.2?}, limit {limit:?}")),
            r => r,
        };
        match verdict {
            Ok(detail) => println!("criterion {n} ({name}): PASS in {took:.2?}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL in {took:.2?}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
