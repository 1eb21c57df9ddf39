//! A line-oriented shell for looking inside one verification condition:
//! split it, print declarations, search the theory and hypotheses, and run
//! the bounded solver on single goals.

use std::fmt::Write;

use crate::solver::{check_validity, DomainBounds, SolveResult};
use crate::vcgen::logic::Sym;
use crate::vcgen::theory::{self, DECLARATIONS};
use crate::vcgen::{split_vc, FunDecl, Vc};

pub const PROMPT: &str = "> ";

const HELP: &str = "commands:
  split_vc        introduce quantified variables and hypotheses, split conjunctions
  print <name>    show the declaration of <name>
  search <name>   list declarations and hypotheses mentioning <name>
  goals           show the proof tree
  show            show the current goal
  prove           run the bounded solver on the current goal
  help            this text
  quit            end the session";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Open,
    Proved,
    Failed,
    /// All children are proved.
    Closed,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub vc: Vc,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Command that created this node from its parent.
    pub via: Option<String>,
    pub status: Status,
}

#[derive(Clone, Debug)]
pub struct Session {
    pub check_id: String,
    pub nodes: Vec<Node>,
    pub current: usize,
    pub history: Vec<String>,
    pub bounds: DomainBounds,
    pub finished: bool,
    already_proved: bool,
}

impl Session {
    pub fn new(check_id: &str, vc: Vc, already_proved: bool, bounds: DomainBounds) -> Session {
        Session {
            check_id: check_id.to_string(),
            nodes: vec![Node {
                vc,
                parent: None,
                children: Vec::new(),
                via: None,
                status: Status::Open,
            }],
            current: 0,
            history: Vec::new(),
            bounds,
            finished: false,
            already_proved,
        }
    }

    fn vc(&self) -> &Vc {
        &self.nodes[self.current].vc
    }

    pub fn banner(&self) -> String {
        let mut out = format!("session on {}\n", self.check_id);
        if self.already_proved {
            out.push_str("note: already proved\n");
        }
        out.push_str(&self.goal_line());
        out.push('\n');
        out
    }

    fn goal_line(&self) -> String {
        format!("goal def'vc : {}", self.vc().show(&self.vc().goal))
    }

    fn hypotheses(&self) -> Vec<String> {
        let vc = self.vc();
        vc.hypotheses
            .iter()
            .enumerate()
            .map(|(i, h)| format!("H{} : {}", i + 1, vc.show(&h.formula)))
            .collect()
    }

    /// Executes one command and returns its response (without the
    /// terminating blank line).
    pub fn exec(&mut self, line: &str) -> String {
        let line = line.trim();
        self.history.push(line.to_string());
        let mut words = line.split_whitespace();
        let cmd = words.next().unwrap_or("");
        let arg = words.next();
        match (cmd, arg) {
            ("split_vc", None) => self.split(),
            ("print", Some(name)) => self.print(name),
            ("search", Some(name)) => self.search(name),
            ("goals", None) => self.goals(),
            ("show", None) => self.show(),
            ("prove", None) => self.prove(),
            ("help", None) => HELP.to_string(),
            ("quit", None) => {
                self.finished = true;
                "bye".to_string()
            }
            _ => format!("unknown command: {line}\n{HELP}"),
        }
    }

    fn split(&mut self) -> String {
        let leaves = split_vc(self.vc());
        let parent = self.current;
        if leaves.is_empty() || leaves.iter().all(|l| l.vc.goal == crate::vcgen::logic::Term::Bool(true)) {
            self.nodes[parent].status = Status::Closed;
            return "goal closed".to_string();
        }
        for leaf in leaves {
            let id = self.nodes.len();
            self.nodes.push(Node {
                vc: leaf.vc,
                parent: Some(parent),
                children: Vec::new(),
                via: Some("split_vc".into()),
                status: Status::Open,
            });
            self.nodes[parent].children.push(id);
        }
        self.current = self.nodes[parent].children[0];
        let n = self.nodes[parent].children.len();
        format!("{n} goal{}\n{}", if n == 1 { "" } else { "s" }, self.goal_line())
    }

    fn print(&self, name: &str) -> String {
        if let Some(d) = theory::lookup(name) {
            return d.text.to_string();
        }
        let vc = self.vc();
        if let Some(f) = vc.functions.get(&Sym::from(name.to_lowercase())) {
            return show_function(vc, f);
        }
        let names = vc.names();
        for s in &vc.symbols {
            if names.get(&s.id).map(String::as_str) == Some(name) {
                let mut out = format!("constant {name} : {}", s.sort);
                if let Some(d) = &s.def {
                    let _ = write!(out, " = {}", vc.show(d));
                }
                return out;
            }
        }
        format!("no declaration named {name}")
    }

    fn search(&self, name: &str) -> String {
        let mut hits: Vec<String> = DECLARATIONS
            .iter()
            .filter(|d| theory::mentions(d.text, name))
            .map(|d| d.text.to_string())
            .collect();
        hits.extend(self.hypotheses().into_iter().filter(|h| theory::mentions(h, name)));
        if hits.is_empty() {
            return format!("no declaration named {name}");
        }
        hits.join("\n\n")
    }

    fn goals(&self) -> String {
        let mut out = Vec::new();
        self.tree(0, 0, &mut out);
        out.join("\n")
    }

    fn tree(&self, id: usize, depth: usize, out: &mut Vec<String>) {
        let n = &self.nodes[id];
        let mark = match n.status {
            Status::Open => "open",
            Status::Proved | Status::Closed => "proved",
            Status::Failed => "failed",
        };
        let cursor = if id == self.current { "*" } else { " " };
        let via = n.via.as_deref().map(|v| format!(" ({v})")).unwrap_or_default();
        out.push(format!(
            "{cursor}{}[{mark}] {}{via}",
            "  ".repeat(depth),
            n.vc.show(&n.vc.goal)
        ));
        for &c in &n.children {
            self.tree(c, depth + 1, out);
        }
    }

    fn show(&self) -> String {
        let mut lines = self.hypotheses();
        lines.push(self.goal_line());
        lines.join("\n")
    }

    fn prove(&mut self) -> String {
        let result = check_validity(self.vc(), &self.bounds);
        let node = &mut self.nodes[self.current];
        match result {
            Ok(SolveResult::Proved) => {
                node.status = Status::Proved;
                "proved (within bounds)".to_string()
            }
            Ok(SolveResult::Counterexample(m)) => {
                node.status = Status::Failed;
                let vc = &node.vc;
                let names = vc.names();
                let vals: Vec<String> = vc
                    .symbols
                    .iter()
                    .filter(|s| s.def.is_none())
                    .filter_map(|s| {
                        let v = m.render(vc, &s.id)?;
                        Some(format!("{} = {v}", names.get(&s.id).cloned().unwrap_or_else(|| s.base.clone())))
                    })
                    .collect();
                format!("counterexample: {}", vals.join(", "))
            }
            Ok(SolveResult::ResourceOut) => "resource limit reached".to_string(),
            Err(e) => e.to_string(),
        }
    }

    /// Runs a script (one command per line, `#` comments) and returns the
    /// transcript: banner, then each prompt, command and response followed
    /// by a blank line.
    pub fn run_script(&mut self, script: &str) -> String {
        let mut out = self.banner();
        out.push('\n');
        for line in script.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let _ = writeln!(out, "{PROMPT}{line}");
            let _ = writeln!(out, "{}\n", self.exec(line));
            if self.finished {
                break;
            }
        }
        out
    }
}

fn show_function(vc: &Vc, f: &FunDecl) -> String {
    let params: Vec<String> = f
        .params
        .iter()
        .zip(&f.param_sorts)
        .map(|(p, s)| format!("({}:{s})", crate::vcgen::base_of(p)))
        .collect();
    let mut out = format!("function {} {} : {}", f.name, params.join(" "), f.result);
    if let Some(d) = &f.def {
        let _ = write!(out, " =\n  {}", vc.show(d));
    }
    if let Some(p) = &f.post {
        let _ = write!(out, "\naxiom {}'post : {}", f.name, vc.show(p));
    }
    out
}
