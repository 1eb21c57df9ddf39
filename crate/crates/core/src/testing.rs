//! Fixtures shared by unit tests.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::sema::{resolve, CallGraph, FunctionClass, ResolvedUnit};
use crate::syntax::{parse_sources, SourceFile};
use crate::vcgen::{function_table, generate, FunTable, GenOptions, SubprogramVcs};

pub struct Fixture {
    pub unit: ResolvedUnit,
    pub graph: CallGraph,
    pub funs: Arc<FunTable>,
}

impl Fixture {
    pub fn new(files: &[(&str, &str)]) -> Fixture {
        let files: Vec<SourceFile> = files.iter().map(|(p, t)| SourceFile::new(*p, *t)).collect();
        let unit = resolve(&parse_sources(&files).expect("parse")).expect("resolve");
        let graph = CallGraph::build(&unit.unit);
        let classes: BTreeMap<String, FunctionClass> = unit
            .unit
            .subprograms()
            .map(|sp| (sp.name.key(), FunctionClass::classify(sp, &graph, true)))
            .collect();
        let funs = function_table(&unit, &graph, &classes);
        Fixture { unit, graph, funs }
    }

    pub fn scenario(name: &str) -> Fixture {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
        let mut files: Vec<(String, String)> = std::fs::read_dir(&dir)
            .expect("scenario dir")
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "ads" || e == "adb"))
            .map(|p| {
                let name = p.file_name().unwrap().to_string_lossy().into_owned();
                (name, std::fs::read_to_string(&p).unwrap())
            })
            .collect();
        files.sort();
        let refs: Vec<(&str, &str)> = files.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Fixture::new(&refs)
    }

    pub fn vcs(&self, subprogram: &str) -> SubprogramVcs {
        generate(&self.unit, &self.graph, self.funs.clone(), subprogram, &GenOptions::default())
            .expect("subprogram with body")
    }
}
