use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use super::{Coverage, NodeKey, WideGraph};
use crate::ingest::InteractionKind;

#[derive(Debug, Clone, Serialize)]
pub struct GraphStats {
    pub roots: usize,
    pub first_party_nodes: usize,
    pub third_party_nodes: usize,
    pub edges: usize,
    pub edges_by_label: BTreeMap<InteractionKind, usize>,
    pub documents: usize,
    /// Mean hop count from a first party to the third parties its own session
    /// reached, following only that site's non-`Bounced` edges.
    pub mean_path_length: f64,
    pub top_coverage: Vec<(NodeKey, Coverage)>,
    pub edges_into_first_party: u64,
}

pub fn graph_stats(graph: &WideGraph, top_k: usize) -> GraphStats {
    let mut edges_by_label = BTreeMap::new();
    for key in graph.edges.keys() {
        *edges_by_label.entry(key.label).or_insert(0) += 1;
    }

    let mut top: Vec<(NodeKey, Coverage)> = graph.coverage_all().into_iter().map(|(k, c)| (k.clone(), c)).collect();
    top.sort_by(|a, b| {
        b.1.indirect_roots
            .cmp(&a.1.indirect_roots)
            .then(b.1.direct_roots.cmp(&a.1.direct_roots))
            .then(a.0.cmp(&b.0))
    });
    top.truncate(top_k);

    let first_party_nodes = graph.nodes.keys().filter(|k| k.is_first_party()).count();
    GraphStats {
        roots: graph.roots.len(),
        first_party_nodes,
        third_party_nodes: graph.nodes.len() - first_party_nodes,
        edges: graph.edges.len(),
        edges_by_label,
        documents: graph.documents.len(),
        mean_path_length: mean_path_length(graph),
        top_coverage: top,
        edges_into_first_party: graph.diagnostics.edges_into_first_party,
    }
}

fn mean_path_length(graph: &WideGraph) -> f64 {
    // site -> adjacency restricted to edges that site contributed
    let mut per_site: HashMap<&str, HashMap<&NodeKey, Vec<&NodeKey>>> = HashMap::new();
    for (key, data) in &graph.edges {
        if key.label == InteractionKind::Bounced {
            continue;
        }
        for site in &data.sites {
            per_site
                .entry(site.as_str())
                .or_default()
                .entry(&key.src)
                .or_default()
                .push(&key.dst);
        }
    }
    let (mut total, mut count) = (0usize, 0usize);
    for root in &graph.roots {
        let Some(adj) = per_site.get(root.as_str()) else {
            continue;
        };
        let start = NodeKey::FirstParty(root.clone());
        let mut dist: HashMap<&NodeKey, usize> = HashMap::from([(&start, 0)]);
        let mut queue = VecDeque::from([&start]);
        while let Some(n) = queue.pop_front() {
            let d = dist[n];
            for &next in adj.get(n).map(Vec::as_slice).unwrap_or_default() {
                if !dist.contains_key(next) {
                    dist.insert(next, d + 1);
                    total += d + 1;
                    count += 1;
                    queue.push_back(next);
                }
            }
        }
    }
    if count == 0 {
        0.0
    } else {
        total as f64 / count as f64
    }
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "roots              {}", self.roots)?;
        writeln!(f, "first-party nodes  {}", self.first_party_nodes)?;
        writeln!(f, "third-party nodes  {}", self.third_party_nodes)?;
        writeln!(f, "documents          {}", self.documents)?;
        writeln!(f, "edges              {}", self.edges)?;
        for (label, n) in &self.edges_by_label {
            writeln!(f, "  {label:<16} {n}")?;
        }
        writeln!(f, "dropped into root  {}", self.edges_into_first_party)?;
        writeln!(f, "mean path length   {:.3}", self.mean_path_length)?;
        writeln!(f)?;
        writeln!(f, "{:<40} {:>8} {:>8}", "node", "direct", "indirect")?;
        for (node, cov) in &self.top_coverage {
            writeln!(
                f,
                "{:<40} {:>8.4} {:>8.4}",
                node.to_string(),
                cov.direct(),
                cov.indirect()
            )?;
        }
        Ok(())
    }
}
