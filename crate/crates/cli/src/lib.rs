//! Command-line front end: flag parsing, output, the explorer loop and the
//! scenario regression harness.

pub mod scenarios;

use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use miniprove_core::driver::{analyze, load_files, CexMode, DriverError, Format, Options};
use miniprove_core::explorer::PROMPT;
use miniprove_core::solver::DomainBounds;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CexArg {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "miniprove", version, about = "Deductive verifier for a small SPARK-like language")]
pub struct Cli {
    /// Source files (.ads/.adb, or single combined files).
    pub files: Vec<PathBuf>,
    /// Proof effort, 0 to 2.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=2))]
    pub level: u8,
    /// Report decisions made during proof (loops not unrolled, bodies not used).
    #[arg(long)]
    pub info: bool,
    /// Warn about contexts with contradictory hypotheses.
    #[arg(long)]
    pub proof_warnings: bool,
    /// Force counterexamples on or off (default: on at level 2).
    #[arg(long, value_enum)]
    pub counterexamples: Option<CexArg>,
    /// Show the counterexample trace.
    #[arg(long)]
    pub cex_trace: bool,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    /// Maximum static iteration count of a loop that is unrolled.
    #[arg(long)]
    pub unroll_limit: Option<u64>,
    /// Integer window and maximum array length, as lo:hi:len.
    #[arg(long, value_parser = parse_bounds)]
    pub bounds: Option<(i64, i64, i64)>,
    /// Open the explorer on a check id.
    #[arg(long)]
    pub explore: Option<String>,
    /// Explorer commands to run instead of reading standard input.
    #[arg(long, requires = "explore")]
    pub script: Option<PathBuf>,
    /// Use the SMT-LIB2 solver named by MINIPROVE_SOLVER.
    #[arg(long)]
    pub external_solver: bool,
    /// Write one SMT-LIB2 file per verification condition into this directory.
    #[arg(long)]
    pub export_smt: Option<PathBuf>,
    /// Run the scenario corpus in this directory and report mismatches.
    #[arg(long, conflicts_with = "files")]
    pub run_scenarios: Option<PathBuf>,
}

fn parse_bounds(s: &str) -> Result<(i64, i64, i64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, len] = parts.as_slice() else {
        return Err("expected lo:hi:len".into());
    };
    let num = |x: &str| x.trim().parse::<i64>().map_err(|e| format!("{x}: {e}"));
    let (lo, hi, len) = (num(lo)?, num(hi)?, num(len)?);
    if lo > hi || len < 0 {
        return Err(format!("empty bounds {s}"));
    }
    Ok((lo, hi, len))
}

impl Cli {
    pub fn options(&self) -> Options {
        let mut bounds = DomainBounds::for_level(self.level);
        if let Some((lo, hi, len)) = self.bounds {
            bounds.int_lo = lo;
            bounds.int_hi = hi;
            bounds.max_len = len;
        }
        Options {
            inputs: self.files.clone(),
            level: self.level,
            info: self.info,
            proof_warnings: self.proof_warnings,
            counterexamples: match self.counterexamples {
                None => CexMode::Auto,
                Some(CexArg::On) => CexMode::On,
                Some(CexArg::Off) => CexMode::Off,
            },
            cex_trace: self.cex_trace,
            format: match self.format {
                FormatArg::Text => Format::Text,
                FormatArg::Json => Format::Json,
            },
            unroll_limit: self.unroll_limit.unwrap_or(Options::default().unroll_limit),
            bounds,
            explore: self.explore.clone(),
            script: self.script.clone(),
            external_solver: self.external_solver,
            export_smt: self.export_smt.clone(),
        }
    }
}

/// Runs an analysis (and the explorer, if requested) and returns the exit
/// code. Interactive explorer commands are read from `input`.
pub fn execute(opts: &Options, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute_inner(opts, input, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_string().trim_end());
            e.exit_code()
        }
    }
}

fn execute_inner(opts: &Options, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<i32, DriverError> {
    if opts.inputs.is_empty() {
        return Err(DriverError::Usage("no input files".into()));
    }
    let files = load_files(&opts.inputs)?;
    let analysis = analyze(&files, opts)?;
    let io = |e: std::io::Error| DriverError::Io(PathBuf::from("<stdout>"), e);
    let Some(id) = &opts.explore else {
        out.write_all(analysis.render(opts).as_bytes()).map_err(io)?;
        return Ok(analysis.exit_code());
    };
    let mut session = analysis.start_session(id, &opts.bounds).map_err(DriverError::Usage)?;
    if let Some(path) = &opts.script {
        let script = std::fs::read_to_string(path).map_err(|e| DriverError::Io(path.clone(), e))?;
        out.write_all(session.run_script(&script).as_bytes()).map_err(io)?;
        return Ok(0);
    }
    write!(out, "{}\n{PROMPT}", session.banner()).map_err(io)?;
    out.flush().map_err(io)?;
    for line in input.lines() {
        let line = line.map_err(io)?;
        let line = line.trim();
        if !line.is_empty() && !line.starts_with('#') {
            writeln!(out, "{}\n", session.exec(line)).map_err(io)?;
            if session.finished {
                break;
            }
        }
        write!(out, "{PROMPT}").map_err(io)?;
        out.flush().map_err(io)?;
    }
    Ok(0)
}

/// Entry point shared by the binary and the tests.
pub fn main_with_args<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    if let Some(dir) = &cli.run_scenarios {
        return match scenarios::run_scenarios(dir) {
            Ok(report) => {
                let _ = out.write_all(report.render().as_bytes());
                i32::from(!report.all_passed())
            }
            Err(e) => {
                let _ = writeln!(err, "{e}");
                2
            }
        };
    }
    execute(&cli.options(), input, out, err)
}
