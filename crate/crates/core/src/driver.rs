//! The analysis pipeline behind the command line: parse, resolve, flow
//! analysis, VC generation, solving, diagnostics and output assembly.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::diagnose::{
    flow_diagnostics, hint_and_then, hint_function_contract, hint_loop_invariant, info_notes,
    lint_suspicious_quantifier, render, render_text, sort_diagnostics, to_json, warn_inconsistencies,
    Diagnostic, RenderOptions, Unproved,
};
use crate::explorer::Session;
use crate::flow::analyze_init;
use crate::interp::{replay, ReplayVerdict};
use crate::sema::{resolve, CallGraph, FunctionClass, ResolvedUnit};
use crate::solver::external::{self, ExternalVerdict};
use crate::solver::{check_validity, export_smtlib, DomainBounds, Model, SolveResult};
use crate::syntax::{parse_sources, Body, SourceFile, SourceMap, SourceSpan};
use crate::vcgen::{function_table, generate, split_vc, CheckKind, FunTable, GenOptions, Leaf, SubprogramVcs};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CexMode {
    #[default]
    Auto,
    On,
    Off,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub inputs: Vec<PathBuf>,
    pub level: u8,
    pub info: bool,
    pub proof_warnings: bool,
    pub counterexamples: CexMode,
    pub cex_trace: bool,
    pub format: Format,
    pub unroll_limit: u64,
    pub bounds: DomainBounds,
    pub explore: Option<String>,
    pub script: Option<PathBuf>,
    pub external_solver: bool,
    pub export_smt: Option<PathBuf>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            inputs: Vec::new(),
            level: 0,
            info: false,
            proof_warnings: false,
            counterexamples: CexMode::Auto,
            cex_trace: false,
            format: Format::Text,
            unroll_limit: GenOptions::default().unroll_limit,
            bounds: DomainBounds::for_level(0),
            explore: None,
            script: None,
            external_solver: false,
            export_smt: None,
        }
    }
}

impl Options {
    /// Counterexamples are shown by default only at the highest level.
    pub fn counterexamples_enabled(&self) -> bool {
        match self.counterexamples {
            CexMode::Auto => self.level >= 2,
            CexMode::On => true,
            CexMode::Off => false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    /// Syntax or resolution error, already rendered.
    #[error("{0}")]
    FrontEnd(String),
    #[error("{0}")]
    Usage(String),
}

impl DriverError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Reads the input files. Files are named by their base name in messages.
pub fn load_files(paths: &[PathBuf]) -> Result<Vec<SourceFile>, DriverError> {
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| DriverError::Io(p.clone(), e))?;
            let name = p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
            Ok(SourceFile::new(name, text))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Proved,
    Unproved,
    ResourceOut,
}

/// Result for one obligation.
#[derive(Clone, Debug)]
pub struct ObligationResult {
    pub id: String,
    pub kind: CheckKind,
    pub status: Status,
    /// Index of the path VC and the first unproved leaf.
    pub failed: Option<(usize, Leaf)>,
    pub model: Option<Model>,
    pub replay: Option<ReplayVerdict>,
}

pub struct SubprogramAnalysis {
    pub vcs: SubprogramVcs,
    pub results: Vec<ObligationResult>,
}

pub struct Analysis {
    pub sources: SourceMap,
    pub unit: ResolvedUnit,
    pub graph: CallGraph,
    pub classes: BTreeMap<String, FunctionClass>,
    pub funs: Arc<FunTable>,
    pub subprograms: Vec<SubprogramAnalysis>,
    pub diagnostics: Vec<Diagnostic>,
}

enum LeafResult {
    Proved,
    Failed(Option<Model>),
    ResourceOut,
}

fn solve_leaf(leaf: &Leaf, opts: &Options, solver_cmd: Option<&[String]>) -> LeafResult {
    if let Some(cmd) = solver_cmd {
        return match external::run(cmd, &export_smtlib(&leaf.vc)) {
            Ok(ExternalVerdict::Unsat) => LeafResult::Proved,
            Ok(ExternalVerdict::Sat(_)) => LeafResult::Failed(None),
            _ => LeafResult::ResourceOut,
        };
    }
    match check_validity(&leaf.vc, &opts.bounds) {
        Ok(SolveResult::Proved) => LeafResult::Proved,
        Ok(SolveResult::Counterexample(m)) => LeafResult::Failed(Some(m)),
        Ok(SolveResult::ResourceOut) | Err(_) => LeafResult::ResourceOut,
    }
}

fn front_end_error(sources: &SourceMap, span: &SourceSpan, message: &str) -> String {
    let mut d = Diagnostic::new(crate::diagnose::Severity::Medium, span.clone(), "error", message.into());
    d.snippet = Some(span.point());
    render_text(&d, sources, &RenderOptions::default()).replacen(": medium: ", ": error: ", 1)
}

fn classify_all(unit: &ResolvedUnit, graph: &CallGraph, proved_variants: &BTreeSet<String>) -> BTreeMap<String, FunctionClass> {
    unit.unit
        .subprograms()
        .map(|sp| {
            let key = sp.name.key();
            let class = FunctionClass::classify(sp, graph, proved_variants.contains(&key));
            (key, class)
        })
        .collect()
}

/// Runs the whole pipeline on already loaded sources.
pub fn analyze(files: &[SourceFile], opts: &Options) -> Result<Analysis, DriverError> {
    let mut sources = SourceMap::new();
    for f in files {
        sources.add(f.clone());
    }
    let parsed = parse_sources(files)
        .map_err(|e| DriverError::FrontEnd(front_end_error(&sources, e.span(), &e.to_string())))?;
    let unit = resolve(&parsed).map_err(|e| DriverError::FrontEnd(front_end_error(&sources, e.span(), &e.to_string())))?;
    let graph = CallGraph::build(&unit.unit);
    let gen_opts = GenOptions {
        unroll_limit: opts.unroll_limit,
    };
    let solver_cmd = if opts.external_solver {
        Some(external::configured_command().ok_or_else(|| DriverError::Usage(external::ExternalError::NotConfigured.to_string()))?)
    } else {
        None
    };
    let solver_cmd = solver_cmd.as_deref();

    // Termination of recursive expression functions is established first,
    // since it decides whether their bodies can be used as definitions.
    let mut proved_variants = BTreeSet::new();
    let classes = classify_all(&unit, &graph, &proved_variants);
    let funs = function_table(&unit, &graph, &classes);
    for sp in unit.unit.subprograms() {
        if sp.aspects.variant.is_none() || !graph.is_recursive(&sp.name.name) {
            continue;
        }
        let Some(vcs) = generate(&unit, &graph, funs.clone(), &sp.name.name, &gen_opts) else {
            continue;
        };
        let all_proved = vcs
            .vcs
            .iter()
            .filter(|cv| vcs.obligations[cv.obligation].kind == CheckKind::VariantDecrease)
            .flat_map(|cv| split_vc(&cv.vc))
            .all(|leaf| matches!(solve_leaf(&leaf, opts, solver_cmd), LeafResult::Proved));
        if all_proved {
            proved_variants.insert(sp.name.key());
        }
    }
    let classes = classify_all(&unit, &graph, &proved_variants);
    let funs = function_table(&unit, &graph, &classes);

    let render_opts = RenderOptions {
        counterexamples: opts.counterexamples_enabled(),
        trace: opts.cex_trace,
    };
    let mut diagnostics = Vec::new();
    let mut subprograms = Vec::new();
    let mut all_loops = Vec::new();
    let mut seen = BTreeSet::new();
    for sp in unit.unit.subprograms() {
        if sp.body == Body::None || !seen.insert(sp.name.key()) {
            continue;
        }
        diagnostics.extend(flow_diagnostics(&analyze_init(sp, &unit.symbols)));
        let Some(vcs) = generate(&unit, &graph, funs.clone(), &sp.name.name, &gen_opts) else {
            continue;
        };
        all_loops.extend(vcs.loops.iter().cloned());
        let mut results = Vec::new();
        for (i, o) in vcs.obligations.iter().enumerate() {
            let mut result = ObligationResult {
                id: o.id.clone(),
                kind: o.kind,
                status: Status::Proved,
                failed: None,
                model: None,
                replay: None,
            };
            'paths: for (k, cv) in vcs.vcs.iter().enumerate().filter(|(_, cv)| cv.obligation == i) {
                let leaves = split_vc(&cv.vc);
                if let Some(dir) = &opts.export_smt {
                    export_leaves(dir, &o.id, k, &leaves);
                }
                for leaf in leaves {
                    match solve_leaf(&leaf, opts, solver_cmd) {
                        LeafResult::Proved => continue,
                        LeafResult::Failed(model) => {
                            result.status = Status::Unproved;
                            result.model = model;
                        }
                        LeafResult::ResourceOut => result.status = Status::ResourceOut,
                    }
                    result.failed = Some((k, leaf));
                    break 'paths;
                }
            }
            if let (Some((_, leaf)), Some(model)) = (&result.failed, &result.model) {
                result.replay = Some(replay(&unit, o, &leaf.vc, model).verdict);
            }
            if let Some((k, leaf)) = &result.failed {
                let cv = &vcs.vcs[*k];
                let mut hints = Vec::new();
                if !o.kind.is_runtime() {
                    hints.extend(hint_function_contract(&unit, &leaf.vc, &classes));
                }
                let at_end = o.kind == CheckKind::Postcondition;
                hints.extend(hint_loop_invariant(&unit, sp, &leaf.vc, &o.span, at_end, &vcs.loops));
                if let Some(pre) = &sp.aspects.pre {
                    hints.extend(hint_and_then(&leaf.vc, &cv.and_lefts, &pre.span, &opts.bounds));
                }
                let inputs = result
                    .model
                    .as_ref()
                    .map(|m| crate::interp::model_inputs(&unit, &o.subprogram, &leaf.vc, m));
                let mut d = render(
                    Unproved {
                        obligation: o,
                        property: cv.property.as_deref(),
                        leaf,
                        model: result.model.as_ref(),
                        inputs: inputs.as_ref(),
                        replay: result.replay,
                        hints,
                    },
                    &sources,
                    &render_opts,
                );
                d.ordinal = i;
                diagnostics.push(d);
            }
            results.push(result);
        }
        if opts.proof_warnings {
            diagnostics.extend(warn_inconsistencies(&vcs, &opts.bounds));
        }
        subprograms.push(SubprogramAnalysis { vcs, results });
    }
    if opts.info {
        diagnostics.extend(info_notes(&unit, &graph, &all_loops, &classes));
    }
    diagnostics.extend(lint_suspicious_quantifier(&unit));
    sort_diagnostics(&mut diagnostics);
    Ok(Analysis {
        sources,
        unit,
        graph,
        classes,
        funs,
        subprograms,
        diagnostics,
    })
}

fn export_leaves(dir: &Path, id: &str, path: usize, leaves: &[Leaf]) {
    let stem: String = id.chars().map(|c| if c == ':' { '_' } else { c }).collect();
    for (j, leaf) in leaves.iter().enumerate() {
        let name = format!("{stem}.p{path}.l{j}.smt2");
        let text = format!("; {id}\n{}", export_smtlib(&leaf.vc));
        // Export is best effort; analysis results do not depend on it.
        let _ = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join(name), text));
    }
}

impl Analysis {
    pub fn results(&self) -> impl Iterator<Item = &ObligationResult> {
        self.subprograms.iter().flat_map(|s| s.results.iter())
    }

    /// 0 when everything is proved and flow analysis found nothing.
    pub fn exit_code(&self) -> i32 {
        let failing = self
            .diagnostics
            .iter()
            .any(|d| d.severity == crate::diagnose::Severity::Medium);
        i32::from(failing)
    }

    pub fn render(&self, opts: &Options) -> String {
        match opts.format {
            Format::Text => {
                let ropts = RenderOptions {
                    counterexamples: opts.counterexamples_enabled(),
                    trace: opts.cex_trace,
                };
                self.diagnostics
                    .iter()
                    .map(|d| render_text(d, &self.sources, &ropts))
                    .collect()
            }
            Format::Json => {
                let proved = self.results().filter(|r| r.status == Status::Proved).count();
                let total = self.results().count();
                let value = serde_json::json!({
                    "schema_version": 1,
                    "diagnostics": self.diagnostics.iter().map(to_json).collect::<Vec<_>>(),
                    "summary": {
                        "obligations": total,
                        "proved": proved,
                        "unproved": total - proved,
                    },
                });
                let mut s = serde_json::to_string_pretty(&value).expect("json");
                s.push('\n');
                s
            }
        }
    }

    /// Opens an explorer session on an obligation. The session starts
    /// on the first path that failed, or on the first path.
    pub fn start_session(&self, check_id: &str, bounds: &DomainBounds) -> Result<Session, String> {
        for s in &self.subprograms {
            let Some(i) = s.vcs.obligations.iter().position(|o| o.id == check_id) else {
                continue;
            };
            let r = &s.results[i];
            let k = r
                .failed
                .as_ref()
                .map(|(k, _)| *k)
                .or_else(|| s.vcs.vcs.iter().position(|cv| cv.obligation == i));
            let vc = match k {
                Some(k) => s.vcs.vcs[k].vc.clone(),
                None => return Err(format!("{check_id} has no verification condition")),
            };
            return Ok(Session::new(check_id, vc, r.status == Status::Proved, bounds.clone()));
        }
        let ids: Vec<&str> = self.results().map(|r| r.id.as_str()).collect();
        Err(format!("unknown check id {check_id}; available ids:\n  {}", ids.join("\n  ")))
    }
}
