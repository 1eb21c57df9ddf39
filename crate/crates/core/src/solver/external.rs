//! Bridge to an external SMT-LIB2 solver run as a subprocess.

use std::io::Write;
use std::process::{Command, Stdio};

/// Environment variable naming the solver command line.
pub const SOLVER_ENV: &str = "MINIPROVE_SOLVER";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExternalVerdict {
    /// The negated goal is unsatisfiable.
    Unsat,
    /// A model was found; carries the solver's model text.
    Sat(String),
    Unknown(String),
}

#[derive(Debug, thiserror::Error)]
pub enum ExternalError {
    #[error("{SOLVER_ENV} is not set")]
    NotConfigured,
    #[error("cannot run external solver `{0}`: {1}")]
    Spawn(String, std::io::Error),
}

/// Command configured through [`SOLVER_ENV`], split on whitespace.
pub fn configured_command() -> Option<Vec<String>> {
    let v = std::env::var(SOLVER_ENV).ok()?;
    let parts: Vec<String> = v.split_whitespace().map(str::to_string).collect();
    (!parts.is_empty()).then_some(parts)
}

/// Feeds `script` to the solver on standard input and classifies its answer.
pub fn run(command: &[String], script: &str) -> Result<ExternalVerdict, ExternalError> {
    let (prog, args) = command.split_first().ok_or(ExternalError::NotConfigured)?;
    let spawn_err = |e| ExternalError::Spawn(command.join(" "), e);
    let mut child = Command::new(prog)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(spawn_err)?;
    if let Some(mut stdin) = child.stdin.take() {
        // A solver may exit before reading everything; its answer still counts.
        let _ = stdin.write_all(script.as_bytes());
    }
    let out = child.wait_with_output().map_err(spawn_err)?;
    Ok(classify(&String::from_utf8_lossy(&out.stdout)))
}

/// Classifies solver output by its first answer line.
pub fn classify(output: &str) -> ExternalVerdict {
    let mut lines = output.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("unsat") => ExternalVerdict::Unsat,
        Some("sat") => ExternalVerdict::Sat(lines.collect::<Vec<_>>().join("\n")),
        Some(other) => ExternalVerdict::Unknown(other.to_string()),
        None => ExternalVerdict::Unknown(String::new()),
    }
}
