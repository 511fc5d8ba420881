//! Golden tests: every `NAME.azc` in a directory is run and its transcript
//! compared byte for byte with `NAME.expected`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::driver::{run_source, RunOptions};

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub path: PathBuf,
    pub expected: Option<String>,
    pub actual: String,
}

impl CaseResult {
    pub fn passed(&self) -> bool {
        self.expected.as_deref() == Some(self.actual.as_str())
    }
}

/// Sorted `.azc` files of `dir`.
pub fn corpus_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<_> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "azc"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn run_case(path: &Path) -> io::Result<CaseResult> {
    let source = fs::read_to_string(path)?;
    let expected = fs::read_to_string(path.with_extension("expected")).ok();
    let actual = run_source(&source, RunOptions::default()).transcript();
    Ok(CaseResult {
        path: path.to_path_buf(),
        expected,
        actual,
    })
}

pub fn run_corpus(dir: &Path) -> io::Result<Vec<CaseResult>> {
    corpus_files(dir)?.iter().map(|p| run_case(p)).collect()
}

/// Line-level difference, `-` for expected and `+` for actual.
pub fn diff(expected: &str, actual: &str) -> String {
    let mut out = String::new();
    let (e, a): (Vec<_>, Vec<_>) = (expected.lines().collect(), actual.lines().collect());
    for i in 0..e.len().max(a.len()) {
        match (e.get(i), a.get(i)) {
            (Some(x), Some(y)) if x == y => out.push_str(&format!("  {x}\n")),
            (x, y) => {
                if let Some(x) = x {
                    out.push_str(&format!("- {x}\n"));
                }
                if let Some(y) = y {
                    out.push_str(&format!("+ {y}\n"));
                }
            }
        }
    }
    if expected.ends_with('\n') != actual.ends_with('\n') {
        out.push_str("  (trailing newline differs)\n");
    }
    out
}
