//! Line-delimited graph persistence.
//!
//! Line one is a header naming the format version and the number of records
//! of each type that follow; each later line is a single JSON record. Records
//! come out in key order, so identical graphs serialize to identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ContractDiagnostics, EdgeData, EdgeKey, NodeKey, SubdomainDocument, WideGraph};
use crate::ingest::InteractionKind;
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const FORMAT_NAME: &str = "widegraph";

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    roots: usize,
    nodes: usize,
    edges: usize,
    documents: usize,
    diagnostics: ContractDiagnostics,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Record {
    Root(String),
    Node(NodeKey),
    Edge {
        src: NodeKey,
        dst: NodeKey,
        label: InteractionKind,
        multiplicity: u64,
        sites: BTreeSet<String>,
    },
    Document {
        host: String,
        kind: InteractionKind,
        domain: String,
        urls: Vec<(String, u64)>,
        sites: BTreeSet<String>,
    },
}

pub fn save_graph(graph: &WideGraph) -> Vec<u8> {
    let header = Header {
        format: FORMAT_NAME.to_string(),
        version: FORMAT_VERSION,
        roots: graph.roots.len(),
        nodes: graph.nodes.len(),
        edges: graph.edges.len(),
        documents: graph.documents.len(),
        diagnostics: graph.diagnostics,
    };
    let mut out = Vec::new();
    push_line(&mut out, &header);
    let mut push = |record: &Record| push_line(&mut out, record);
    for root in &graph.roots {
        push(&Record::Root(root.clone()));
    }
    for key in graph.nodes.keys() {
        push(&Record::Node(key.clone()));
    }
    for (key, data) in &graph.edges {
        push(&Record::Edge {
            src: key.src.clone(),
            dst: key.dst.clone(),
            label: key.label,
            multiplicity: data.multiplicity,
            sites: data.sites.clone(),
        });
    }
    for doc in graph.documents.values() {
        push(&Record::Document {
            host: doc.host.clone(),
            kind: doc.kind,
            domain: doc.domain.clone(),
            urls: doc.urls.iter().map(|(u, n)| (u.clone(), *n)).collect(),
            sites: doc.sites.clone(),
        });
    }
    out
}

fn push_line<T: Serialize>(out: &mut Vec<u8>, value: &T) {
    serde_json::to_writer(&mut *out, value).expect("graph records serialize");
    out.push(b'\n');
}

fn bad(message: impl Into<String>) -> Error {
    Error::GraphFormat(message.into())
}

pub fn load_graph(bytes: &[u8]) -> Result<WideGraph> {
    let text = std::str::from_utf8(bytes).map_err(|e| bad(format!("not UTF-8: {e}")))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| bad("empty input"))?;
    let header: Header = serde_json::from_str(first).map_err(|e| bad(format!("header: {e}")))?;
    if header.format != FORMAT_NAME {
        return Err(bad(format!("unexpected format {:?}", header.format)));
    }
    if header.version != FORMAT_VERSION {
        return Err(bad(format!(
            "version {} is not supported (expected {FORMAT_VERSION})",
            header.version
        )));
    }

    let mut graph = WideGraph {
        diagnostics: header.diagnostics,
        ..WideGraph::default()
    };
    let expected = [header.roots, header.nodes, header.edges, header.documents];
    let mut seen = [0usize; 4];
    for (lineno, line) in lines {
        let record: Record = serde_json::from_str(line).map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?;
        let section = match &record {
            Record::Root(_) => 0,
            Record::Node(_) => 1,
            Record::Edge { .. } => 2,
            Record::Document { .. } => 3,
        };
        if seen[section + 1..].iter().any(|&n| n > 0) {
            return Err(bad(format!("line {}: record out of order", lineno + 1)));
        }
        seen[section] += 1;
        if seen[section] > expected[section] {
            return Err(bad(format!(
                "line {}: more records than the header declares",
                lineno + 1
            )));
        }
        match record {
            Record::Root(r) => {
                graph.roots.insert(r);
            }
            Record::Node(k) => {
                graph.nodes.insert(k, Default::default());
            }
            Record::Edge {
                src,
                dst,
                label,
                multiplicity,
                sites,
            } => {
                if !graph.nodes.contains_key(&src) || !graph.nodes.contains_key(&dst) {
                    return Err(bad(format!("line {}: edge endpoint missing", lineno + 1)));
                }
                graph
                    .edges
                    .insert(EdgeKey { src, dst, label }, EdgeData { multiplicity, sites });
            }
            Record::Document {
                host,
                kind,
                domain,
                urls,
                sites,
            } => {
                let doc = SubdomainDocument {
                    host,
                    kind,
                    domain,
                    urls: urls.into_iter().collect::<BTreeMap<_, _>>(),
                    sites,
                };
                let parent = graph
                    .nodes
                    .get_mut(&doc.parent())
                    .ok_or_else(|| bad(format!("line {}: document parent missing", lineno + 1)))?;
                parent.documents.insert(doc.key());
                graph.documents.insert(doc.key(), doc);
            }
        }
    }
    if seen != expected {
        return Err(bad(format!(
            "truncated: header declares {expected:?} records, found {seen:?}"
        )));
    }
    Ok(graph)
}

pub fn write_graph(path: &Path, graph: &WideGraph) -> Result<()> {
    std::fs::write(path, save_graph(graph)).map_err(|e| Error::io(path, e))
}

pub fn read_graph(path: &Path) -> Result<WideGraph> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load_graph(&bytes)
}
