use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::domain::registrable_domain;
use super::har::{SessionRecord, SkipReport};
use super::kind::InteractionKind;
use crate::Result;

/// Source of a dependency edge: the site root (the page document) or a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Root,
    Node(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub url: String,
    pub host: String,
    pub kind: InteractionKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub from: Endpoint,
    pub to: usize,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDiagnostics {
    /// Entries that were the page document itself (or a repeat of it).
    pub root_entries: usize,
    /// Entries whose initiator was unknown or not captured; attached to root.
    pub attached_to_root: usize,
    pub skipped: SkipReport,
}

/// Initiator -> requested relation for one site visit, keyed by (url, kind).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyTree {
    pub root: String,
    pub site_url: String,
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<TreeEdge>,
    pub diagnostics: TreeDiagnostics,
}

impl DependencyTree {
    /// Total request occurrences represented by edges plus root entries.
    pub fn entry_count(&self) -> usize {
        self.diagnostics.root_entries + self.edges.iter().map(|e| e.multiplicity as usize).sum::<usize>()
    }
}

fn host_of(url: &str) -> Option<String> {
    url::Url::parse(url)
        .ok()
        .and_then(|u| u.host_str().map(str::to_ascii_lowercase))
}

pub fn build_tree(record: &SessionRecord) -> Result<DependencyTree> {
    let site_host = host_of(&record.site_url).unwrap_or_default();
    let root = registrable_domain(&site_host)?;

    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut index: HashMap<(String, InteractionKind), usize> = HashMap::new();
    let mut by_url: HashMap<String, usize> = HashMap::new();
    let mut edges: BTreeMap<(Endpoint, usize), u32> = BTreeMap::new();
    let mut diagnostics = TreeDiagnostics {
        skipped: record.skipped,
        ..Default::default()
    };

    // First pass assigns node ids so initiators captured after the requests
    // they started still resolve.
    let mut targets = Vec::with_capacity(record.entries.len());
    for entry in &record.entries {
        if entry.url == record.site_url {
            targets.push(None);
            continue;
        }
        let key = (entry.url.clone(), entry.kind());
        let id = *index.entry(key).or_insert_with(|| {
            nodes.push(TreeNode {
                url: entry.url.clone(),
                host: entry.host.clone(),
                kind: entry.kind(),
            });
            nodes.len() - 1
        });
        by_url.entry(entry.url.clone()).or_insert(id);
        targets.push(Some(id));
    }

    for (entry, target) in record.entries.iter().zip(targets) {
        let Some(to) = target else {
            diagnostics.root_entries += 1;
            continue;
        };
        let from = match entry.initiator_url.as_deref() {
            Some(u) if u == record.site_url => Endpoint::Root,
            Some(u) => match by_url.get(u) {
                Some(&id) if id != to => Endpoint::Node(id),
                _ => {
                    diagnostics.attached_to_root += 1;
                    Endpoint::Root
                }
            },
            None => {
                diagnostics.attached_to_root += 1;
                Endpoint::Root
            }
        };
        *edges.entry((from, to)).or_insert(0) += 1;
    }

    Ok(DependencyTree {
        root,
        site_url: record.site_url.clone(),
        nodes,
        edges: edges
            .into_iter()
            .map(|((from, to), multiplicity)| TreeEdge { from, to, multiplicity })
            .collect(),
        diagnostics,
    })
}
