//! Regression harness over a corpus of scenario directories.
//!
//! A case is a directory holding `expected.txt`. Its command line comes from
//! an optional `args` file (paths relative to the case directory); when it
//! names no source file, the case's own `.ads`/`.adb` files are used. An
//! optional `exit` file holds the expected exit status.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::{execute, Cli};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseOutcome {
    pub name: String,
    pub output: String,
    pub exit_code: i32,
    /// First mismatch, if any.
    pub mismatch: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub cases: Vec<CaseOutcome>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.cases.iter().all(|c| c.mismatch.is_none())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            match &c.mismatch {
                None => {
                    let _ = writeln!(out, "PASS {}", c.name);
                }
                Some(m) => {
                    let _ = writeln!(out, "FAIL {}: {m}", c.name);
                }
            }
        }
        let failed = self.cases.iter().filter(|c| c.mismatch.is_some()).count();
        let _ = writeln!(out, "{} passed, {failed} failed", self.cases.len() - failed);
        out
    }
}

fn sources_in(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "ads" || e == "adb"))
        .collect();
    v.sort();
    v
}

fn rebase(dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}

/// Runs one case directory and returns its output and exit status.
pub fn run_case(dir: &Path) -> Result<(String, i32), String> {
    let args = std::fs::read_to_string(dir.join("args")).unwrap_or_default();
    let argv = std::iter::once("miniprove").chain(args.split_whitespace());
    let mut cli = Cli::try_parse_from(argv).map_err(|e| e.to_string())?;
    if cli.files.is_empty() {
        cli.files = sources_in(dir);
    } else {
        cli.files = cli.files.iter().map(|p| rebase(dir, p)).collect();
    }
    cli.script = cli.script.as_deref().map(|p| rebase(dir, p));
    let opts = cli.options();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = execute(&opts, &mut std::io::empty(), &mut out, &mut err);
    out.extend(err);
    Ok((String::from_utf8_lossy(&out).into_owned(), code))
}

fn first_difference(expected: &str, actual: &str) -> Option<String> {
    if expected == actual {
        return None;
    }
    let (e, a): (Vec<&str>, Vec<&str>) = (expected.lines().collect(), actual.lines().collect());
    for i in 0..e.len().max(a.len()) {
        let (x, y) = (e.get(i).copied(), a.get(i).copied());
        if x != y {
            return Some(format!(
                "line {}: expected {:?}, got {:?}",
                i + 1,
                x.unwrap_or("<end>"),
                y.unwrap_or("<end>")
            ));
        }
    }
    Some("trailing newline differs".into())
}

/// Every case directory under `root`, in name order.
pub fn case_dirs(root: &Path) -> Result<Vec<PathBuf>, String> {
    let entries = std::fs::read_dir(root).map_err(|e| format!("cannot read {}: {e}", root.display()))?;
    let mut dirs: Vec<PathBuf> = entries
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.join("expected.txt").is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}

pub fn run_scenarios(root: &Path) -> Result<Report, String> {
    let mut report = Report::default();
    for dir in case_dirs(root)? {
        let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let expected = std::fs::read_to_string(dir.join("expected.txt")).map_err(|e| e.to_string())?;
        let (output, exit_code) = run_case(&dir)?;
        let mut mismatch = first_difference(&expected, &output);
        if mismatch.is_none() {
            if let Ok(want) = std::fs::read_to_string(dir.join("exit")) {
                if want.trim() != exit_code.to_string() {
                    mismatch = Some(format!("exit status {exit_code}, expected {}", want.trim()));
                }
            }
        }
        report.cases.push(CaseOutcome {
            name,
            output,
            exit_code,
            mismatch,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_difference_reports_line() {
        assert_eq!(first_difference("a\nb\n", "a\nb\n"), None);
        assert_eq!(
            first_difference("a\nb\n", "a\nc\n").unwrap(),
            "line 2: expected \"b\", got \"c\""
        );
        assert_eq!(
            first_difference("a\n", "a\nb\n").unwrap(),
            "line 2: expected \"<end>\", got \"b\""
        );
    }

    #[test]
    fn empty_corpus_passes() {
        let dir = std::env::temp_dir().join(format!("miniprove-empty-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let r = run_scenarios(&dir).unwrap();
        assert!(r.cases.is_empty() && r.all_passed());
        assert_eq!(r.render(), "0 passed, 0 failed\n");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
