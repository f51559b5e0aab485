use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{MatchContext, Request, RuleSet};
use crate::exec::{self, Execution};
use crate::graph::{DocKey, SubdomainDocument, WideGraph};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelClass {
    Benign,
    AdTracker,
}

impl LabelClass {
    pub fn is_positive(self) -> bool {
        self == LabelClass::AdTracker
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LabelClass::AdTracker => "adtracker",
            LabelClass::Benign => "benign",
        }
    }
}

impl fmt::Display for LabelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LabelClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adtracker" => Ok(LabelClass::AdTracker),
            "benign" => Ok(LabelClass::Benign),
            other => Err(Error::InvalidArgument(format!(
                "label {other:?} (expected adtracker|benign)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    FilterList,
    Override,
}

impl LabelSource {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelSource::FilterList => "filter_list",
            LabelSource::Override => "override",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub class: LabelClass,
    pub source: LabelSource,
}

/// AdTracker when any of the document's URLs is blocked in the context of any
/// first party that reached it.
pub fn label_document(rules: &RuleSet, document: &SubdomainDocument) -> Label {
    let blocked = document.urls.keys().filter_map(|u| Request::parse(u)).any(|req| {
        document.sites.iter().any(|site| {
            rules.matches_request(
                &req,
                &MatchContext {
                    page_domain: site,
                    kind: document.kind,
                },
            )
        })
    });
    Label {
        class: if blocked {
            LabelClass::AdTracker
        } else {
            LabelClass::Benign
        },
        source: LabelSource::FilterList,
    }
}

/// Labels every document of the graph, applying `overrides` when given.
pub fn label_graph(
    rules: &RuleSet,
    graph: &WideGraph,
    overrides: Option<&Overrides>,
    exec: Execution,
) -> Vec<LabeledDocument> {
    let docs: Vec<&SubdomainDocument> = graph.documents.values().collect();
    exec::map_slice(exec, &docs, |d| {
        let mut label = label_document(rules, d);
        if let Some(o) = overrides {
            label = o.apply(&d.host, label);
        }
        LabeledDocument { key: d.key(), label }
    })
}

/// Manual hostname -> label corrections; they win over filter-list labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub by_host: BTreeMap<String, LabelClass>,
}

impl Overrides {
    /// Parses `hostname<TAB>adtracker|benign` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut by_host = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (host, class) = line
                .split_once('\t')
                .ok_or_else(|| Error::InvalidArgument(format!("overrides line {}: expected host<TAB>label", i + 1)))?;
            by_host.insert(host.trim().to_ascii_lowercase(), class.parse()?);
        }
        Ok(Overrides { by_host })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn is_empty(&self) -> bool {
        self.by_host.is_empty()
    }

    pub fn apply(&self, host: &str, label: Label) -> Label {
        match self.by_host.get(host) {
            Some(&class) => Label {
                class,
                source: LabelSource::Override,
            },
            None => label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDocument {
    pub key: DocKey,
    pub label: Label,
}

pub fn write_labels(path: &Path, labels: &[LabeledDocument]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(out, "host\tkind\tlabel\tsource").map_err(io)?;
    for l in labels {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            l.key.host,
            l.key.kind,
            l.label.class,
            l.label.source.as_str()
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_labels(path: &Path) -> Result<BTreeMap<DocKey, Label>> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some("host\tkind\tlabel\tsource") {
        return Err(Error::table(&name, "expected header host\\tkind\\tlabel\\tsource"));
    }
    let mut out = BTreeMap::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(Error::table(&name, format!("line {}: expected 4 fields", i + 2)));
        }
        let source = match f[3] {
            "filter_list" => LabelSource::FilterList,
            "override" => LabelSource::Override,
            other => return Err(Error::table(&name, format!("line {}: source {other:?}", i + 2))),
        };
        out.insert(
            DocKey {
                host: f[0].to_string(),
                kind: f[1].parse()?,
            },
            Label {
                class: f[2].parse()?,
                source,
            },
        );
    }
    Ok(out)
}
