//! Ground truth derived from the generator's own bookkeeping.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::{har, Ecosystem, Parent, SyntheticSession};
use crate::filter::LabelClass;
use crate::graph::{write_graph, DocKey, EdgeData, EdgeKey, NodeKey, SubdomainDocument, WideGraph};
use crate::ingest::InteractionKind;
use crate::{Error, Result};

pub const TRUTH_LABELS: &str = "truth-labels.tsv";
pub const TRUTH_RULES: &str = "truth-rules.txt";
pub const TRUTH_GRAPH: &str = "truth-graph.wg";
pub const HAR_DIR: &str = "har";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthSummary {
    pub har_files: usize,
    pub requests: usize,
    pub trackers: usize,
    pub benign: usize,
}

impl SyntheticSession {
    fn node_of(&self, i: usize) -> NodeKey {
        let r = &self.requests[i];
        if r.is_first_party() {
            NodeKey::FirstParty(self.site_domain.clone())
        } else {
            NodeKey::third_party(r.domain.clone(), r.kind)
        }
    }

    fn source_of(&self, i: usize) -> NodeKey {
        match self.requests[i].parent {
            Parent::Page => NodeKey::FirstParty(self.site_domain.clone()),
            Parent::Request(p) => self.node_of(p),
        }
    }

    /// Third-party nodes present in the session, and whether each has a
    /// request caused by the first party.
    pub fn presence(&self) -> BTreeMap<NodeKey, bool> {
        let mut out = BTreeMap::new();
        for i in 0..self.requests.len() {
            let node = self.node_of(i);
            if node.is_first_party() {
                continue;
            }
            let direct = self.source_of(i).is_first_party();
            *out.entry(node).or_insert(false) |= direct;
        }
        out
    }
}

impl Ecosystem {
    pub fn har_bytes(&self, session: usize) -> Vec<u8> {
        har::render(&self.sessions[session])
    }

    pub fn har_file_name(&self, session: usize) -> String {
        format!("{:04}-{}.har", session, self.sessions[session].site_domain)
    }

    /// The graph the pipeline should build from the rendered captures.
    pub fn truth_graph(&self) -> WideGraph {
        let mut g = WideGraph::new();
        for s in &self.sessions {
            let root = NodeKey::FirstParty(s.site_domain.clone());
            g.roots.insert(s.site_domain.clone());
            g.nodes.entry(root.clone()).or_default();
            let mut edges: BTreeMap<EdgeKey, u64> = BTreeMap::new();
            for (i, r) in s.requests.iter().enumerate() {
                let dst = s.node_of(i);
                let src = s.source_of(i);
                if !dst.is_first_party() {
                    let key = DocKey {
                        host: r.host.clone(),
                        kind: r.kind,
                    };
                    g.nodes.entry(dst.clone()).or_default().documents.insert(key.clone());
                    let doc = g.documents.entry(key).or_insert_with(|| SubdomainDocument {
                        host: r.host.clone(),
                        kind: r.kind,
                        domain: r.domain.clone(),
                        urls: BTreeMap::new(),
                        sites: BTreeSet::new(),
                    });
                    *doc.urls.entry(r.url.clone()).or_insert(0) += 1;
                    doc.sites.insert(s.site_domain.clone());
                }
                if src == dst {
                    g.diagnostics.self_edges += 1;
                } else if dst.is_first_party() {
                    g.diagnostics.edges_into_first_party += 1;
                } else {
                    *edges
                        .entry(EdgeKey {
                            src,
                            dst,
                            label: r.kind,
                        })
                        .or_insert(0) += 1;
                }
            }
            for (node, direct) in s.presence() {
                if !direct {
                    edges.insert(
                        EdgeKey {
                            src: root.clone(),
                            dst: node,
                            label: InteractionKind::Bounced,
                        },
                        1,
                    );
                }
            }
            for (key, n) in edges {
                let data: &mut EdgeData = g.edges.entry(key).or_default();
                data.multiplicity += n;
                data.sites.insert(s.site_domain.clone());
            }
        }
        g
    }

    /// `host<TAB>class` per service, readable as an overrides file.
    pub fn truth_labels(&self) -> String {
        let mut out = String::from("# synthetic ground truth: host\tlabel\n");
        for s in &self.services {
            out.push_str(&format!("{}\t{}\n", s.host, s.class));
        }
        out
    }

    /// One `||host^` rule per tracker host.
    pub fn truth_rules(&self) -> String {
        let mut out = String::from("! synthetic ground-truth tracker list\n");
        for s in self.services.iter().filter(|s| s.class == LabelClass::AdTracker) {
            out.push_str(&format!("||{}^\n", s.host));
        }
        out
    }

    /// Writes `har/*.har`, the truth files and a ready-to-use `run.conf`.
    pub fn write(&self, dir: &Path) -> Result<SynthSummary> {
        let har_dir = dir.join(HAR_DIR);
        std::fs::create_dir_all(&har_dir).map_err(|e| Error::io(&har_dir, e))?;
        let write = |path: &Path, bytes: &[u8]| std::fs::write(path, bytes).map_err(|e| Error::io(path, e));
        for i in 0..self.sessions.len() {
            write(&har_dir.join(self.har_file_name(i)), &self.har_bytes(i))?;
        }
        write(&dir.join(TRUTH_LABELS), self.truth_labels().as_bytes())?;
        write(&dir.join(TRUTH_RULES), self.truth_rules().as_bytes())?;
        write_graph(&dir.join(TRUTH_GRAPH), &self.truth_graph())?;
        let conf = format!(
            "# generated with seed {}\nhar_dir = {HAR_DIR}\nout_dir = out\nrules = {TRUTH_RULES}\noverrides = {TRUTH_LABELS}\n",
            self.config.seed
        );
        write(&dir.join("run.conf"), conf.as_bytes())?;
        write(&dir.join("synth.conf"), self.config.to_text().as_bytes())?;
        let trackers = self.services.iter().filter(|s| s.class.is_positive()).count();
        Ok(SynthSummary {
            har_files: self.sessions.len(),
            requests: self.sessions.iter().map(|s| s.requests.len()).sum(),
            trackers,
            benign: self.services.len() - trackers,
        })
    }
}
