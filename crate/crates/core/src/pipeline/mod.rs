//! End-to-end orchestration: eligibility, splitting, feature tables,
//! evaluation, candidate rules and analysis data.

mod analysis;
mod candidates;
mod config;
mod metrics;
mod run;
mod tables;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::filter::{Label, LabelClass};
use crate::graph::{DocKey, SubdomainDocument, WideGraph};
use crate::{Error, Result};

pub use analysis::{
    class_mean_direct_coverage, coverage_ccdf, degree_buckets, keyword_rates, write_analysis, Analysis, CcdfPoint,
    DegreeBucket, KeywordRate,
};
pub use candidates::{candidate_rules, render_candidates, CandidateInput, CandidateRule};
pub use config::RunConfig;
pub use metrics::{evaluate, metrics, score_rows, BiasProxy, ClassMetrics, MetricsReport, Scored, WeightMode};
pub use run::{run_all, RunOutput};
pub use tables::{
    content_table, join_features, read_content_table, read_scores, write_content_table, write_metrics, write_scores,
    ContentTable, Dataset, DocumentMeta, ScoreRow,
};

pub const DEFAULT_MIN_IN_DEGREE: usize = 3;

/// Documents whose parent node has enough distinct in-edges.
#[derive(Debug, Clone)]
pub struct Eligibility<'g> {
    pub kept: Vec<&'g SubdomainDocument>,
    pub total: usize,
    pub removed: usize,
}

pub fn filter_eligible(graph: &WideGraph, min_in_degree: usize) -> Eligibility<'_> {
    let degrees = graph.in_degrees();
    let mut kept = Vec::new();
    let mut total = 0;
    for doc in graph.documents.values() {
        total += 1;
        let parent = doc.parent();
        if degrees.get(&parent).copied().unwrap_or(0) >= min_in_degree {
            kept.push(doc);
        }
    }
    Eligibility {
        removed: total - kept.len(),
        kept,
        total,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Test,
}

impl SplitTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Test => "test",
        }
    }
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitTag::Train),
            "test" => Ok(SplitTag::Test),
            other => Err(Error::InvalidArgument(format!("split {other:?} (expected train|test)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    /// Split each class separately; needs labels.
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            seed: 1,
            stratified: false,
        }
    }
}

/// ⌈fraction · n⌉, tolerant of products like 0.7 · 10 = 7.000000000000001.
pub fn train_count(fraction: f64, n: usize) -> usize {
    (((fraction * n as f64) - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Train/test assignment of document keys.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitAssignment {
    pub train: Vec<DocKey>,
    pub test: Vec<DocKey>,
}

impl SplitAssignment {
    pub fn tags(&self) -> BTreeMap<&DocKey, SplitTag> {
        self.train
            .iter()
            .map(|k| (k, SplitTag::Train))
            .chain(self.test.iter().map(|k| (k, SplitTag::Test)))
            .collect()
    }
}

/// Sorts the keys, shuffles them with the seed and puts the first
/// ⌈fraction · n⌉ into the training set.
pub fn split(keys: &[DocKey], spec: &SplitSpec, labels: Option<&BTreeMap<DocKey, Label>>) -> Result<SplitAssignment> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {} not in (0, 1)",
            spec.train_fraction
        )));
    }
    if keys.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 documents to split, got {}",
            keys.len()
        )));
    }
    let mut sorted = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = SplitAssignment::default();
    let mut take = |mut group: Vec<DocKey>, out: &mut SplitAssignment| {
        group.shuffle(&mut rng);
        let n_train = train_count(spec.train_fraction, group.len());
        out.test.extend(group.split_off(n_train));
        out.train.extend(group);
    };
    if spec.stratified {
        let labels = labels.ok_or_else(|| Error::InvalidArgument("stratified split needs labels".into()))?;
        let mut groups: [Vec<DocKey>; 2] = [Vec::new(), Vec::new()];
        for key in sorted {
            let label = labels.get(&key).ok_or_else(|| Error::MissingData {
                what: "label",
                document: key.to_string(),
            })?;
            groups[usize::from(label.class == LabelClass::AdTracker)].push(key);
        }
        let [benign, tracker] = groups;
        take(benign, &mut out);
        take(tracker, &mut out);
    } else {
        take(sorted, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::LabelSource;
    use crate::graph::tests::tree;
    use crate::ingest::InteractionKind;

    fn key(i: usize) -> DocKey {
        DocKey {
            host: format!("h{i:03}.example"),
            kind: InteractionKind::Script,
        }
    }

    #[test]
    fn train_count_rounds_up() {
        assert_eq!(train_count(0.8, 10), 8);
        assert_eq!(train_count(0.7, 10), 7);
        assert_eq!(train_count(0.8, 18979), 15184);
        assert_eq!(train_count(0.5, 3), 2);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let keys: Vec<_> = (0..10).map(key).collect();
        let spec = SplitSpec::default();
        let a = split(&keys, &spec, None).unwrap();
        assert_eq!((a.train.len(), a.test.len()), (8, 2));
        let mut reversed = keys.clone();
        reversed.reverse();
        assert_eq!(split(&reversed, &spec, None).unwrap(), a);
        let mut all: Vec<_> = a.train.iter().chain(&a.test).cloned().collect();
        all.sort();
        assert_eq!(all, keys);
        let b = split(&keys, &SplitSpec { seed: 2, ..spec }, None).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn split_rejects_bad_input() {
        let keys: Vec<_> = (0..10).map(key).collect();
        assert!(split(
            &keys,
            &SplitSpec {
                train_fraction: 1.0,
                ..Default::default()
            },
            None
        )
        .is_err());
        assert!(split(&keys[..1], &SplitSpec::default(), None).is_err());
        let strat = SplitSpec {
            stratified: true,
            ..Default::default()
        };
        assert!(split(&keys, &strat, None).is_err());
    }

    #[test]
    fn stratified_split_balances_classes() {
        let keys: Vec<_> = (0..20).map(key).collect();
        let labels: BTreeMap<_, _> = keys
            .iter()
            .enumerate()
            .map(|(i, k)| {
                let class = if i < 5 {
                    LabelClass::AdTracker
                } else {
                    LabelClass::Benign
                };
                (
                    k.clone(),
                    Label {
                        class,
                        source: LabelSource::FilterList,
                    },
                )
            })
            .collect();
        let spec = SplitSpec {
            stratified: true,
            ..Default::default()
        };
        let s = split(&keys, &spec, Some(&labels)).unwrap();
        let pos = s.train.iter().filter(|k| labels[*k].class.is_positive()).count();
        assert_eq!(pos, 4);
        assert_eq!(s.train.len(), 16);
    }

    #[test]
    fn eligibility_boundary() {
        use InteractionKind::Script;
        let mut g = WideGraph::new();
        // t3.com is embedded by three sites, t2.com by two.
        for (i, site) in ["a.com", "b.com", "c.com"].iter().enumerate() {
            let mut nodes = vec![("https://x.t3.com/s.js", Script)];
            let mut edges = vec![(None, 0)];
            if i < 2 {
                nodes.push(("https://y.t2.com/s.js", Script));
                edges.push((None, 1));
            }
            let t = tree(site, &nodes, &edges);
            g.merge(crate::graph::expand_edges(crate::graph::contract_tree(&t).unwrap()));
        }
        let e = filter_eligible(&g, DEFAULT_MIN_IN_DEGREE);
        let hosts: Vec<_> = e.kept.iter().map(|d| d.host.as_str()).collect();
        assert_eq!(hosts, vec!["x.t3.com"]);
        assert_eq!(e.total, e.kept.len() + e.removed);
        assert_eq!(e.removed, 1);
    }
}
