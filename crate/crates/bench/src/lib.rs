//! Inputs shared by the benchmarks.

use std::path::{Path, PathBuf};

use miniprove_core::driver::load_files;
use miniprove_core::syntax::SourceFile;

/// Source files of one case under `scenarios/`, in path order.
pub fn scenario(name: &str) -> Vec<SourceFile> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "ads" || e == "adb"))
        .collect();
    paths.sort();
    load_files(&paths).unwrap_or_else(|e| panic!("{e}"))
}
