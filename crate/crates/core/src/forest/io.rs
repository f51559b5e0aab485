//! Versioned flat-file model format with pre-order tree encoding.
//!
//! ```text
//! widegraph-forest 1
//! features <d>
//! trees <n>
//! tree <node count>
//! S <feature> <threshold> <weight> <impurity decrease>
//! L <benign weight> <adtracker weight>
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so a load/save cycle is
//! byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use super::{DecisionTree, ForestModel, Node};
use crate::{Error, Result};

pub const MODEL_FORMAT: u32 = 1;
const MAGIC: &str = "widegraph-forest";

pub fn save_model(model: &ForestModel) -> Vec<u8> {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {MODEL_FORMAT}");
    let _ = writeln!(out, "features {}", model.feature_count);
    let _ = writeln!(out, "trees {}", model.trees.len());
    for tree in &model.trees {
        let _ = writeln!(out, "tree {}", tree.nodes.len());
        for node in &tree.nodes {
            let _ = match node {
                Node::Split {
                    feature,
                    threshold,
                    weight,
                    impurity_decrease,
                    ..
                } => writeln!(out, "S {feature} {threshold} {weight} {impurity_decrease}"),
                Node::Leaf { counts } => writeln!(out, "L {} {}", counts[0], counts[1]),
            };
        }
    }
    out.into_bytes()
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<Vec<&'a str>> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.split_ascii_whitespace().collect())
            }
            None => Err(Error::ModelFormat("unexpected end of file".into())),
        }
    }

    fn err(&self, message: impl std::fmt::Display) -> Error {
        Error::ModelFormat(format!("line {}: {message}", self.line))
    }

    fn keyed(&mut self, key: &str) -> Result<usize> {
        let fields = self.next()?;
        match fields.as_slice() {
            [k, v] if *k == key => v.parse().map_err(|_| self.err(format!("bad {key} count"))),
            _ => Err(self.err(format!("expected `{key} <n>`"))),
        }
    }

    fn number<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("bad number {s:?}")))
    }
}

pub fn load_model(bytes: &[u8]) -> Result<ForestModel> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::ModelFormat(e.to_string()))?;
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let header = lines.next()?;
    match header.as_slice() {
        [m, v] if *m == MAGIC => {
            if *v != MODEL_FORMAT.to_string() {
                return Err(lines.err(format!("unsupported model version {v}")));
            }
        }
        _ => return Err(lines.err("not a forest model")),
    }
    let feature_count = lines.keyed("features")?;
    let n_trees = lines.keyed("trees")?;
    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let count = lines.keyed("tree")?;
        let mut raw = Vec::with_capacity(count);
        for _ in 0..count {
            let fields = lines.next()?;
            let node = match fields.as_slice() {
                ["S", f, t, w, d] => {
                    let feature: usize = lines.number(f)?;
                    let threshold: f64 = lines.number(t)?;
                    if feature >= feature_count {
                        return Err(lines.err(format!("feature {feature} out of range")));
                    }
                    if !threshold.is_finite() {
                        return Err(lines.err("non-finite threshold"));
                    }
                    Node::Split {
                        feature,
                        threshold,
                        right: 0,
                        weight: lines.number(w)?,
                        impurity_decrease: lines.number(d)?,
                    }
                }
                ["L", a, b] => Node::Leaf {
                    counts: [lines.number(a)?, lines.number(b)?],
                },
                _ => return Err(lines.err("expected S or L node")),
            };
            raw.push(node);
        }
        trees.push(link(raw).map_err(|m| lines.err(m))?);
    }
    if lines.inner.any(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::ModelFormat("trailing data after last tree".into()));
    }
    Ok(ForestModel { trees, feature_count })
}

/// Recomputes right-child indices of a pre-order node list.
fn link(mut nodes: Vec<Node>) -> std::result::Result<DecisionTree, &'static str> {
    fn walk(nodes: &mut [Node], i: usize) -> std::result::Result<usize, &'static str> {
        if i >= nodes.len() {
            return Err("truncated tree");
        }
        if matches!(nodes[i], Node::Leaf { .. }) {
            return Ok(i + 1);
        }
        let right = walk(nodes, i + 1)?;
        if let Node::Split { right: r, .. } = &mut nodes[i] {
            *r = right;
        }
        walk(nodes, right)
    }
    if walk(&mut nodes, 0)? != nodes.len() {
        return Err("tree has unreachable nodes");
    }
    Ok(DecisionTree { nodes })
}

pub fn write_model(path: &Path, model: &ForestModel) -> Result<()> {
    std::fs::write(path, save_model(model)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: &Path) -> Result<ForestModel> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load_model(&bytes)
}
