//! The `run-all` driver: every stage in order, artifacts written to the
//! output directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use super::{
    candidate_rules, content_table, filter_eligible, join_features, metrics, render_candidates, score_rows, split,
    write_analysis, write_content_table, write_metrics, write_scores, Analysis, CandidateInput, CandidateRule,
    MetricsReport, RunConfig, ScoreRow, SplitTag, WeightMode,
};
use crate::content::build_vocabulary;
use crate::filter::{label_graph, write_labels, Label, LabelClass, Overrides, RuleSet};
use crate::forest::{train_with_oob, write_model, Prediction};
use crate::graph::{write_graph, DocKey, SubdomainDocument, WideGraph};
use crate::ingest::{ingest_dir, write_trees};
use crate::structural::{structural_features, write_struct_matrix};
use crate::{Error, Result};

/// In-memory results of a run; the same data is also on disk.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub sessions: usize,
    pub failed_sessions: usize,
    pub skipped_entries: usize,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    pub documents_total: usize,
    pub documents_removed: usize,
    pub documents_kept: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub feature_count: usize,
    pub reports: Vec<MetricsReport>,
    pub candidates: Vec<CandidateRule>,
    pub analysis: Analysis,
    /// (feature name, importance), most important first.
    pub importance: Vec<(String, f64)>,
}

impl fmt::Display for RunOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "sessions: {} ({} failed, {} entries skipped)",
            self.sessions, self.failed_sessions, self.skipped_entries
        )?;
        writeln!(f, "graph: {} nodes, {} edges", self.graph_nodes, self.graph_edges)?;
        writeln!(
            f,
            "documents: {} total, {} removed by in-degree filter, {} kept",
            self.documents_total, self.documents_removed, self.documents_kept
        )?;
        writeln!(
            f,
            "split: {} train, {} test; {} features",
            self.train_size, self.test_size, self.feature_count
        )?;
        for r in &self.reports {
            writeln!(f)?;
            write!(f, "{r}")?;
        }
        writeln!(f)?;
        writeln!(f, "top features:")?;
        for (name, v) in self.importance.iter().take(10) {
            writeln!(f, "  {v:.4}  {name}")?;
        }
        writeln!(f, "candidate rules: {}", self.candidates.len())
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn run_all(config: &RunConfig) -> Result<RunOutput> {
    let exec = config.execution;
    let out = &config.out_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let ingest = ingest_dir(&config.har_dir, exec)?;
    if ingest.trees.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no usable sessions in {}",
            config.har_dir.display()
        )));
    }
    write_trees(&out.join("trees.jsonl"), &ingest.trees)?;

    let graph = WideGraph::from_trees(&ingest.trees)?;
    write_graph(&out.join("graph.wg"), &graph)?;

    let structural = structural_features(&graph, &config.structural)?;
    write_struct_matrix(&out.join("structural.tsv"), &structural)?;

    let rules = RuleSet::read_files(&config.rules)?;
    let labeled = label_graph(&rules, &graph, None, exec);
    write_labels(&out.join("labels.tsv"), &labeled)?;
    let labels: BTreeMap<DocKey, Label> = labeled.into_iter().map(|l| (l.key, l.label)).collect();
    let overrides = config.overrides.as_deref().map(Overrides::read).transpose()?;

    let eligible = filter_eligible(&graph, config.min_in_degree);
    let keys: Vec<DocKey> = eligible.kept.iter().map(|d| d.key()).collect();
    let assignment = split(&keys, &config.split, Some(&labels))?;
    let tags = assignment.tags();

    let train_docs: Vec<&SubdomainDocument> = eligible
        .kept
        .iter()
        .copied()
        .filter(|d| tags.get(&d.key()) == Some(&SplitTag::Train))
        .collect();
    let vocabulary = build_vocabulary(&train_docs, config.vocab_size, config.vocab_ranking, exec)?;
    vocabulary.write(&out.join("vocab.tsv"))?;

    let content = content_table(&eligible.kept, &tags, &vocabulary, config.clamp_idf, exec)?;
    write_content_table(&out.join("content.tsv"), &content)?;
    let dataset = join_features(content, std::slice::from_ref(&structural))?;

    let train_rows = dataset.rows_in(SplitTag::Train);
    let test_rows = dataset.rows_in(SplitTag::Test);
    let y = dataset.labels_for(&train_rows, &labels)?;
    let trained = train_with_oob(&dataset.subset(&train_rows), &y, &config.forest)?;
    let model = trained.model;
    write_model(&out.join("model.forest"), &model)?;

    let test_scored = score_rows(&model, &dataset, &test_rows, exec)?;
    let mut reports = Vec::new();
    let variants: Vec<Option<&Overrides>> = match &overrides {
        Some(o) => vec![None, Some(o)],
        None => vec![None],
    };
    for corrected in variants {
        for mode in [WeightMode::Biased, WeightMode::Unbiased] {
            reports.push(metrics(&test_scored, &labels, mode, config.bias_proxy, corrected)?);
        }
    }
    write_metrics(&out.join("metrics.tsv"), &reports)?;

    // Training documents are scored out-of-bag so the candidate list does not
    // just echo the training labels.
    let train_scored = score_rows(&model, &dataset, &train_rows, exec)?;
    let mut scores: BTreeMap<DocKey, Prediction> = BTreeMap::new();
    for (s, oob) in train_scored.iter().zip(&trained.oob_scores) {
        let prediction = match oob {
            Some(score) => Prediction {
                score: *score,
                label: if *score > 0.5 {
                    LabelClass::AdTracker
                } else {
                    LabelClass::Benign
                },
            },
            None => s.prediction,
        };
        scores.insert(s.key.clone(), prediction);
    }
    for s in &test_scored {
        scores.insert(s.key.clone(), s.prediction);
    }
    write_scores(
        &out.join("scores.tsv"),
        &scores
            .iter()
            .map(|(k, p)| ScoreRow {
                key: k.clone(),
                score: p.score,
                label: p.label,
            })
            .collect::<Vec<_>>(),
    )?;

    let coverage = graph.coverage_all();
    let inputs: Vec<CandidateInput<'_>> = eligible
        .kept
        .iter()
        .filter_map(|d| {
            let p = scores.get(&d.key())?;
            Some(CandidateInput {
                document: d,
                score: p.score,
                label: p.label,
                coverage: *coverage.get(&d.parent())?,
            })
        })
        .collect();
    let candidates = candidate_rules(&inputs, &rules);
    write_text(&out.join("candidates.txt"), &render_candidates(&candidates))?;

    let analysis = Analysis::compute(&graph, &eligible.kept, &labels, &vocabulary, config.top_keywords);
    write_analysis(&out.join("analysis.tsv"), &analysis)?;

    let importance: Vec<(String, f64)> = model
        .feature_importance()
        .into_iter()
        .map(|(i, v)| (dataset.names[i].clone(), v))
        .collect();
    write_text(
        &out.join("importance.tsv"),
        &std::iter::once("feature\timportance\n".to_string())
            .chain(importance.iter().map(|(n, v)| format!("{n}\t{v}\n")))
            .collect::<String>(),
    )?;

    let output = RunOutput {
        sessions: ingest.trees.len(),
        failed_sessions: ingest.failed.len(),
        skipped_entries: ingest.skipped.total(),
        graph_nodes: graph.nodes.len(),
        graph_edges: graph.edges.len(),
        documents_total: eligible.total,
        documents_removed: eligible.removed,
        documents_kept: eligible.kept.len(),
        train_size: train_rows.len(),
        test_size: test_rows.len(),
        feature_count: dataset.names.len(),
        reports,
        candidates,
        analysis,
        importance,
    };
    write_text(&out.join("report.txt"), &output.to_string())?;
    Ok(output)
}
