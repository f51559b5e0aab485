//! Session ingestion: HAR captures to per-site dependency trees.

mod domain;
mod har;
mod kind;
mod tree;

pub use domain::registrable_domain;
pub use har::{parse_har, InitiatorType, RequestEntry, SessionRecord, SkipReport};
pub use kind::{classify_interaction, InteractionKind};
pub use tree::{build_tree, DependencyTree, Endpoint, TreeDiagnostics, TreeEdge, TreeNode};

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use crate::exec::{self, Execution};
use crate::{Error, Result};

/// Outcome of ingesting a directory of captures.
#[derive(Debug, Default)]
pub struct IngestReport {
    pub trees: Vec<DependencyTree>,
    pub failed: Vec<(PathBuf, Error)>,
    pub skipped: SkipReport,
}

/// Parses every `*.har` file under `dir` (sorted by path) into trees.
pub fn ingest_dir(dir: &Path, exec: Execution) -> Result<IngestReport> {
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "har") {
            paths.push(path);
        }
    }
    paths.sort();

    let results = exec::map_slice(exec, &paths, |path| {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        build_tree(&parse_har(&bytes)?)
    });

    let mut report = IngestReport::default();
    for (path, result) in paths.into_iter().zip(results) {
        match result {
            Ok(tree) => {
                report.skipped.absorb(&tree.diagnostics.skipped);
                report.trees.push(tree);
            }
            Err(e) => report.failed.push((path, e)),
        }
    }
    Ok(report)
}

/// Writes trees as JSON lines, one tree per line.
pub fn write_trees(path: &Path, trees: &[DependencyTree]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for tree in trees {
        serde_json::to_writer(&mut out, tree)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trees(path: &Path) -> Result<Vec<DependencyTree>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut trees = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            trees.push(serde_json::from_str(&line)?);
        }
    }
    Ok(trees)
}
