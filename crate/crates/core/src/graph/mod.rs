//! The merged cross-site dependency graph.
//!
//! Each site's [`DependencyTree`] is contracted (all first-party URLs become a
//! single super-node), expanded (every third party reachable only through an
//! intermediary gets a virtual `Bounced` edge from the root), then fused into
//! the [`WideGraph`] on `(registrable domain, interaction kind)`.

mod coverage;
mod io;
mod stats;

pub use coverage::Coverage;
pub use io::{load_graph, read_graph, save_graph, write_graph, FORMAT_VERSION};
pub use stats::{graph_stats, GraphStats};

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ingest::{registrable_domain, DependencyTree, Endpoint, InteractionKind};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKey {
    FirstParty(String),
    ThirdParty { domain: String, kind: InteractionKind },
}

impl NodeKey {
    pub fn third_party(domain: impl Into<String>, kind: InteractionKind) -> Self {
        NodeKey::ThirdParty {
            domain: domain.into(),
            kind,
        }
    }

    pub fn domain(&self) -> &str {
        match self {
            NodeKey::FirstParty(d) | NodeKey::ThirdParty { domain: d, .. } => d,
        }
    }

    pub fn kind(&self) -> Option<InteractionKind> {
        match self {
            NodeKey::FirstParty(_) => None,
            NodeKey::ThirdParty { kind, .. } => Some(*kind),
        }
    }

    pub fn is_first_party(&self) -> bool {
        matches!(self, NodeKey::FirstParty(_))
    }
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKey::FirstParty(d) => write!(f, "{d}[first-party]"),
            NodeKey::ThirdParty { domain, kind } => write!(f, "{domain}[{kind}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey {
    pub src: NodeKey,
    pub dst: NodeKey,
    pub label: InteractionKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeData {
    pub multiplicity: u64,
    pub sites: BTreeSet<String>,
}

/// Identity of a sub-domain document: full hostname plus interaction kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DocKey {
    pub host: String,
    pub kind: InteractionKind,
}

impl fmt::Display for DocKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.host, self.kind)
    }
}

/// All URLs of one (hostname, kind) pair, with the first parties that led to them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdomainDocument {
    pub host: String,
    pub kind: InteractionKind,
    pub domain: String,
    /// URL multiset: url -> request count.
    pub urls: BTreeMap<String, u64>,
    pub sites: BTreeSet<String>,
}

impl SubdomainDocument {
    pub fn key(&self) -> DocKey {
        DocKey {
            host: self.host.clone(),
            kind: self.kind,
        }
    }

    pub fn parent(&self) -> NodeKey {
        NodeKey::third_party(self.domain.clone(), self.kind)
    }

    pub fn url_count(&self) -> u64 {
        self.urls.values().sum()
    }

    /// URLs with multiplicity, in sorted order.
    pub fn iter_urls(&self) -> impl Iterator<Item = &str> + '_ {
        self.urls
            .iter()
            .flat_map(|(u, &n)| std::iter::repeat_n(u.as_str(), n as usize))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractDiagnostics {
    /// Third-party -> first-party edges, dropped because roots take no in-edges.
    pub edges_into_first_party: u64,
    /// Edges that became self-loops after re-keying.
    pub self_edges: u64,
}

impl ContractDiagnostics {
    fn absorb(&mut self, other: &ContractDiagnostics) {
        self.edges_into_first_party += other.edges_into_first_party;
        self.self_edges += other.self_edges;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteDocument {
    pub domain: String,
    pub urls: BTreeMap<String, u64>,
}

/// One site's tree after path contraction (and optionally edge expansion).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteTree {
    pub root: String,
    pub nodes: BTreeSet<NodeKey>,
    pub edges: BTreeMap<EdgeKey, u64>,
    pub documents: BTreeMap<DocKey, SiteDocument>,
    pub diagnostics: ContractDiagnostics,
}

impl SiteTree {
    pub fn root_key(&self) -> NodeKey {
        NodeKey::FirstParty(self.root.clone())
    }
}

/// Collapses first-party URLs into a super-node and re-keys third parties on
/// `(registrable domain, kind)`.
pub fn contract_tree(tree: &DependencyTree) -> Result<SiteTree> {
    let root = NodeKey::FirstParty(tree.root.clone());
    let mut keys = Vec::with_capacity(tree.nodes.len());
    for node in &tree.nodes {
        let domain = registrable_domain(&node.host)?;
        keys.push(if domain == tree.root {
            root.clone()
        } else {
            NodeKey::third_party(domain, node.kind)
        });
    }

    let mut site = SiteTree {
        root: tree.root.clone(),
        nodes: keys.iter().filter(|k| !k.is_first_party()).cloned().collect(),
        edges: BTreeMap::new(),
        documents: BTreeMap::new(),
        diagnostics: ContractDiagnostics::default(),
    };

    for edge in &tree.edges {
        let dst = &keys[edge.to];
        let dst_node = &tree.nodes[edge.to];
        if let NodeKey::ThirdParty { domain, kind } = dst {
            let doc = site
                .documents
                .entry(DocKey {
                    host: dst_node.host.clone(),
                    kind: *kind,
                })
                .or_insert_with(|| SiteDocument {
                    domain: domain.clone(),
                    urls: BTreeMap::new(),
                });
            *doc.urls.entry(dst_node.url.clone()).or_insert(0) += u64::from(edge.multiplicity);
        }

        let src = match edge.from {
            Endpoint::Root => &root,
            Endpoint::Node(i) => &keys[i],
        };
        if src == dst {
            site.diagnostics.self_edges += 1;
            continue;
        }
        let Some(label) = dst.kind() else {
            site.diagnostics.edges_into_first_party += 1;
            continue;
        };
        *site
            .edges
            .entry(EdgeKey {
                src: src.clone(),
                dst: dst.clone(),
                label,
            })
            .or_insert(0) += u64::from(edge.multiplicity);
    }
    Ok(site)
}

/// Adds a `Bounced` root edge to every third party reachable from the root
/// that has no direct root edge.
pub fn expand_edges(mut site: SiteTree) -> SiteTree {
    let root = site.root_key();
    let mut adjacency: BTreeMap<&NodeKey, Vec<&NodeKey>> = BTreeMap::new();
    let mut linked_from_root: BTreeSet<&NodeKey> = BTreeSet::new();
    for key in site.edges.keys() {
        adjacency.entry(&key.src).or_default().push(&key.dst);
        if key.src == root {
            linked_from_root.insert(&key.dst);
        }
    }

    let mut seen: BTreeSet<&NodeKey> = BTreeSet::from([&root]);
    let mut queue = VecDeque::from([&root]);
    let mut bounced = Vec::new();
    while let Some(node) = queue.pop_front() {
        for &next in adjacency.get(node).map(Vec::as_slice).unwrap_or_default() {
            if seen.insert(next) {
                if !linked_from_root.contains(next) {
                    bounced.push(next.clone());
                }
                queue.push_back(next);
            }
        }
    }

    for dst in bounced {
        site.edges.insert(
            EdgeKey {
                src: root.clone(),
                dst,
                label: InteractionKind::Bounced,
            },
            1,
        );
    }
    site
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub documents: BTreeSet<DocKey>,
}

/// The fused graph of every site's contracted, expanded tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WideGraph {
    pub roots: BTreeSet<String>,
    pub nodes: BTreeMap<NodeKey, Node>,
    pub edges: BTreeMap<EdgeKey, EdgeData>,
    pub documents: BTreeMap<DocKey, SubdomainDocument>,
    pub diagnostics: ContractDiagnostics,
}

impl WideGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fuses a contracted, expanded site into the graph.
    pub fn merge(&mut self, site: SiteTree) {
        let root = site.root_key();
        self.roots.insert(site.root.clone());
        self.nodes.entry(root).or_default();
        for node in site.nodes {
            self.nodes.entry(node).or_default();
        }
        for (key, multiplicity) in site.edges {
            let data = self.edges.entry(key).or_default();
            data.multiplicity += multiplicity;
            data.sites.insert(site.root.clone());
        }
        for (key, doc) in site.documents {
            let parent = NodeKey::third_party(doc.domain.clone(), key.kind);
            self.nodes.entry(parent).or_default().documents.insert(key.clone());
            let merged = self.documents.entry(key.clone()).or_insert_with(|| SubdomainDocument {
                host: key.host.clone(),
                kind: key.kind,
                domain: doc.domain.clone(),
                urls: BTreeMap::new(),
                sites: BTreeSet::new(),
            });
            for (url, n) in doc.urls {
                *merged.urls.entry(url).or_insert(0) += n;
            }
            merged.sites.insert(site.root.clone());
        }
        self.diagnostics.absorb(&site.diagnostics);
    }

    /// Contracts, expands and merges a batch of trees, in order.
    pub fn from_trees<'a>(trees: impl IntoIterator<Item = &'a DependencyTree>) -> Result<Self> {
        let mut graph = WideGraph::new();
        for tree in trees {
            graph.merge(expand_edges(contract_tree(tree)?));
        }
        Ok(graph)
    }

    pub fn third_party_nodes(&self) -> impl Iterator<Item = &NodeKey> + '_ {
        self.nodes.keys().filter(|k| !k.is_first_party())
    }

    pub fn documents_of(&self, node: &NodeKey) -> impl Iterator<Item = &SubdomainDocument> + '_ {
        self.nodes
            .get(node)
            .into_iter()
            .flat_map(|n| n.documents.iter())
            .filter_map(|k| self.documents.get(k))
    }

    /// Distinct in-edges per node (multiplicity ignored).
    pub fn in_degrees(&self) -> BTreeMap<&NodeKey, usize> {
        let mut deg: BTreeMap<&NodeKey, usize> = self.nodes.keys().map(|k| (k, 0)).collect();
        for key in self.edges.keys() {
            *deg.entry(&key.dst).or_insert(0) += 1;
        }
        deg
    }
}
