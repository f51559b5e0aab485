//! Candidate `||host^` rules for predicted trackers the lists miss.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::filter::{label_document, LabelClass, RuleSet};
use crate::graph::{Coverage, SubdomainDocument};
use crate::ingest::InteractionKind;

pub const CANDIDATE_HEADER: &str = "! widegraph candidate rules: predicted trackers not blocked by the input lists";

#[derive(Debug, Clone)]
pub struct CandidateInput<'a> {
    pub document: &'a SubdomainDocument,
    pub score: f64,
    pub label: LabelClass,
    /// Coverage of the document's parent node.
    pub coverage: Coverage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRule {
    pub host: String,
    pub kind: InteractionKind,
    pub score: f64,
    pub direct: f64,
    pub indirect: f64,
}

impl CandidateRule {
    pub fn rule(&self) -> String {
        format!("||{}^", self.host)
    }
}

/// Predicted-AdTracker documents none of whose URLs the rules already block,
/// one per host (highest score wins), sorted by score descending then host.
pub fn candidate_rules(inputs: &[CandidateInput<'_>], rules: &RuleSet) -> Vec<CandidateRule> {
    let mut best: BTreeMap<&str, CandidateRule> = BTreeMap::new();
    for input in inputs {
        if input.label != LabelClass::AdTracker {
            continue;
        }
        let doc = input.document;
        if label_document(rules, doc).class == LabelClass::AdTracker {
            continue;
        }
        let candidate = CandidateRule {
            host: doc.host.clone(),
            kind: doc.kind,
            score: input.score,
            direct: input.coverage.direct(),
            indirect: input.coverage.indirect(),
        };
        match best.get(doc.host.as_str()) {
            Some(existing) if existing.score >= candidate.score => {}
            _ => {
                best.insert(&doc.host, candidate);
            }
        }
    }
    let mut out: Vec<CandidateRule> = best.into_values().collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.host.cmp(&b.host)));
    out
}

/// Filter-list text: a header, then a comment and a rule per candidate.
pub fn render_candidates(candidates: &[CandidateRule]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CANDIDATE_HEADER}");
    for c in candidates {
        let _ = writeln!(
            out,
            "! score={:.4} direct={:.4} indirect={:.4} kind={}",
            c.score, c.direct, c.indirect, c.kind
        );
        let _ = writeln!(out, "{}", c.rule());
    }
    out
}
