//! Class-conditional views of the labeled graph: degree buckets, coverage
//! CCDFs and keyword occurrence rates.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;

use crate::content::{tokenize_url, Vocabulary};
use crate::filter::{Label, LabelClass};
use crate::graph::{DocKey, SubdomainDocument, WideGraph};
use crate::{Error, Result};

/// Documents whose parent in-degree falls in `lo..=hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeBucket {
    pub lo: usize,
    pub hi: usize,
    pub adtracker: usize,
    pub benign: usize,
}

impl DegreeBucket {
    pub fn tracker_fraction(&self) -> f64 {
        let n = self.adtracker + self.benign;
        if n == 0 {
            0.0
        } else {
            self.adtracker as f64 / n as f64
        }
    }
}

fn labeled<'g>(
    graph: &'g WideGraph,
    labels: &'g BTreeMap<DocKey, Label>,
) -> impl Iterator<Item = (&'g SubdomainDocument, LabelClass)> + 'g {
    labels
        .iter()
        .filter_map(|(k, l)| graph.documents.get(k).map(|d| (d, l.class)))
}

/// Power-of-two buckets [1,1], [2,3], [4,7], ... over parent in-degree.
pub fn degree_buckets(graph: &WideGraph, labels: &BTreeMap<DocKey, Label>) -> Vec<DegreeBucket> {
    let degrees = graph.in_degrees();
    let mut buckets: BTreeMap<u32, DegreeBucket> = BTreeMap::new();
    for (doc, class) in labeled(graph, labels) {
        let d = degrees.get(&doc.parent()).copied().unwrap_or(0);
        let b = if d == 0 { 0 } else { d.ilog2() + 1 };
        let entry = buckets.entry(b).or_insert_with(|| DegreeBucket {
            lo: if b == 0 { 0 } else { 1 << (b - 1) },
            hi: if b == 0 { 0 } else { (1 << b) - 1 },
            adtracker: 0,
            benign: 0,
        });
        match class {
            LabelClass::AdTracker => entry.adtracker += 1,
            LabelClass::Benign => entry.benign += 1,
        }
    }
    buckets.into_values().collect()
}

fn direct_coverages(graph: &WideGraph, labels: &BTreeMap<DocKey, Label>, class: LabelClass) -> Vec<f64> {
    let coverage = graph.coverage_all();
    labeled(graph, labels)
        .filter(|(_, c)| *c == class)
        .filter_map(|(d, _)| coverage.get(&d.parent()).map(|c| c.direct()))
        .collect()
}

/// Mean direct coverage of the labeled documents' parents, `[benign,
/// adtracker]`; 0 for an empty class.
pub fn class_mean_direct_coverage(graph: &WideGraph, labels: &BTreeMap<DocKey, Label>) -> [f64; 2] {
    [LabelClass::Benign, LabelClass::AdTracker].map(|class| {
        let v = direct_coverages(graph, labels, class);
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcdfPoint {
    pub x: f64,
    /// Share of documents with direct coverage ≥ x.
    pub fraction: f64,
}

pub fn coverage_ccdf(graph: &WideGraph, labels: &BTreeMap<DocKey, Label>, class: LabelClass) -> Vec<CcdfPoint> {
    let mut v = direct_coverages(graph, labels, class);
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out: Vec<CcdfPoint> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        if out.last().is_some_and(|p| p.x == x) {
            continue;
        }
        out.push(CcdfPoint {
            x,
            fraction: (v.len() - i) as f64 / n,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeywordRate {
    pub term: String,
    /// Share of AdTracker documents containing the term.
    pub adtracker: f64,
    pub benign: f64,
}

/// Occurrence rates of the first `n` vocabulary terms per class.
pub fn keyword_rates(
    documents: &[&SubdomainDocument],
    labels: &BTreeMap<DocKey, Label>,
    vocabulary: &Vocabulary,
    n: usize,
) -> Vec<KeywordRate> {
    let terms = &vocabulary.terms[..n.min(vocabulary.len())];
    let mut hits = vec![[0usize; 2]; terms.len()];
    let mut totals = [0usize; 2];
    for doc in documents {
        let Some(label) = labels.get(&doc.key()) else {
            continue;
        };
        let c = usize::from(label.class.is_positive());
        totals[c] += 1;
        let tokens: HashSet<String> = doc.urls.keys().flat_map(|u| tokenize_url(u)).collect();
        for (i, t) in terms.iter().enumerate() {
            if tokens.contains(t) {
                hits[i][c] += 1;
            }
        }
    }
    let rate = |h: usize, t: usize| if t == 0 { 0.0 } else { h as f64 / t as f64 };
    terms
        .iter()
        .zip(hits)
        .map(|(t, h)| KeywordRate {
            term: t.clone(),
            adtracker: rate(h[1], totals[1]),
            benign: rate(h[0], totals[0]),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Analysis {
    pub degree_buckets: Vec<DegreeBucket>,
    pub ccdf_adtracker: Vec<CcdfPoint>,
    pub ccdf_benign: Vec<CcdfPoint>,
    /// `[benign, adtracker]`.
    pub mean_direct_coverage: [f64; 2],
    pub keywords: Vec<KeywordRate>,
}

impl Analysis {
    pub fn compute(
        graph: &WideGraph,
        documents: &[&SubdomainDocument],
        labels: &BTreeMap<DocKey, Label>,
        vocabulary: &Vocabulary,
        top_keywords: usize,
    ) -> Self {
        Analysis {
            degree_buckets: degree_buckets(graph, labels),
            ccdf_adtracker: coverage_ccdf(graph, labels, LabelClass::AdTracker),
            ccdf_benign: coverage_ccdf(graph, labels, LabelClass::Benign),
            mean_direct_coverage: class_mean_direct_coverage(graph, labels),
            keywords: keyword_rates(documents, labels, vocabulary, top_keywords),
        }
    }
}

/// Long-format table `section key a b`:
/// - `degree lo-hi adtracker benign`
/// - `ccdf_adtracker x fraction -` and `ccdf_benign x fraction -`
/// - `mean_direct_coverage class value -`
/// - `keyword term adtracker_rate benign_rate`
pub fn write_analysis(path: &Path, analysis: &Analysis) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        writeln!(out, "section\tkey\ta\tb")?;
        for b in &analysis.degree_buckets {
            writeln!(out, "degree\t{}-{}\t{}\t{}", b.lo, b.hi, b.adtracker, b.benign)?;
        }
        for (name, points) in [
            ("ccdf_adtracker", &analysis.ccdf_adtracker),
            ("ccdf_benign", &analysis.ccdf_benign),
        ] {
            for p in points {
                writeln!(out, "{name}\t{}\t{}\t-", p.x, p.fraction)?;
            }
        }
        let [benign, tracker] = analysis.mean_direct_coverage;
        writeln!(out, "mean_direct_coverage\tadtracker\t{tracker}\t-")?;
        writeln!(out, "mean_direct_coverage\tbenign\t{benign}\t-")?;
        for k in &analysis.keywords {
            writeln!(out, "keyword\t{}\t{}\t{}", k.term, k.adtracker, k.benign)?;
        }
        out.flush()
    };
    body().map_err(|e| Error::io(path, e))
}
