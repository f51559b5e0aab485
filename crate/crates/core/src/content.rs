//! URL tokenization, TF-IDF keyword vocabulary, engineered URL statistics and
//! per-document feature vector assembly.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::exec::{self, Execution};
use crate::graph::SubdomainDocument;
use crate::{Error, Result};

pub const ENGINEERED_NAMES: [&str; 5] = ["avg_url_len", "amp_count", "eq_count", "qmark_count", "kind_code"];

const DELIMITERS: [char; 6] = ['/', '?', '&', '=', '.', '-'];

/// Lowercases, strips an `http://` or `https://` prefix, and splits on
/// `/ ? & = . -`, dropping empty tokens.
pub fn tokenize_url(url: &str) -> Vec<String> {
    let lower = url.to_lowercase();
    let rest = lower
        .strip_prefix("https://")
        .or_else(|| lower.strip_prefix("http://"))
        .unwrap_or(&lower);
    rest.split(DELIMITERS)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Token -> occurrence count over all of a document's URLs (with multiplicity).
pub fn term_counts(doc: &SubdomainDocument) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for (url, &n) in &doc.urls {
        for token in tokenize_url(url) {
            *counts.entry(token).or_insert(0) += n;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocabRanking {
    /// Number of documents containing the term.
    #[default]
    DocumentFrequency,
    /// Total occurrences across the corpus.
    TermFrequency,
}

impl std::str::FromStr for VocabRanking {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "df" | "document_frequency" => Ok(VocabRanking::DocumentFrequency),
            "tf" | "term_frequency" => Ok(VocabRanking::TermFrequency),
            _ => Err(Error::InvalidArgument(format!(
                "vocabulary ranking {s:?} (expected df|tf)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub terms: Vec<String>,
    pub df: Vec<u64>,
    pub corpus_size: usize,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>, df: Vec<u64>, corpus_size: usize) -> Result<Self> {
        if terms.len() != df.len() {
            return Err(Error::InvalidArgument("terms and df differ in length".into()));
        }
        if corpus_size == 0 {
            return Err(Error::InvalidArgument(
                "vocabulary corpus size must be at least 1".into(),
            ));
        }
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Vocabulary {
            terms,
            df,
            corpus_size,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn position(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Inverse document frequency of the term at `pos`: ln(|D| / (1 + df)).
    pub fn idf(&self, pos: usize, clamp: bool) -> f64 {
        let idf = (self.corpus_size as f64 / (1.0 + self.df[pos] as f64)).ln();
        if clamp {
            idf.max(0.0)
        } else {
            idf
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let file = std::fs::File::create(path).map_err(io)?;
        let mut out = std::io::BufWriter::new(file);
        writeln!(out, "# corpus_size\t{}", self.corpus_size).map_err(io)?;
        writeln!(out, "term\tdf").map_err(io)?;
        for (t, df) in self.terms.iter().zip(&self.df) {
            writeln!(out, "{t}\t{df}").map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let name = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = std::io::BufReader::new(file).lines();
        let mut next = || -> Result<Option<String>> { lines.next().transpose().map_err(|e| Error::io(path, e)) };
        let first = next()?.ok_or_else(|| Error::table(&name, "empty file"))?;
        let corpus_size = first
            .strip_prefix("# corpus_size\t")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| Error::table(&name, "missing corpus_size header"))?;
        if next()?.as_deref() != Some("term\tdf") {
            return Err(Error::table(&name, "missing term\\tdf header"));
        }
        let (mut terms, mut df) = (Vec::new(), Vec::new());
        while let Some(line) = next()? {
            if line.is_empty() {
                continue;
            }
            let (t, d) = line
                .split_once('\t')
                .ok_or_else(|| Error::table(&name, format!("bad row {line:?}")))?;
            terms.push(t.to_string());
            df.push(
                d.parse()
                    .map_err(|_| Error::table(&name, format!("bad df in {line:?}")))?,
            );
        }
        Vocabulary::new(terms, df, corpus_size)
    }
}

/// Keeps the top `k` terms by the chosen frequency (descending, ties
/// lexicographic) over `documents`.
pub fn build_vocabulary(
    documents: &[&SubdomainDocument],
    k: usize,
    ranking: VocabRanking,
    exec: Execution,
) -> Result<Vocabulary> {
    if documents.is_empty() {
        return Err(Error::InvalidArgument("vocabulary needs at least one document".into()));
    }
    let per_doc = exec::map_slice(exec, documents, |d| term_counts(d));
    let mut df: HashMap<&str, u64> = HashMap::new();
    let mut tf: HashMap<&str, u64> = HashMap::new();
    for counts in &per_doc {
        for (term, &n) in counts {
            *df.entry(term).or_insert(0) += 1;
            *tf.entry(term).or_insert(0) += n;
        }
    }
    let mut ranked: Vec<(&str, u64)> = match ranking {
        VocabRanking::DocumentFrequency => df.iter().map(|(t, &n)| (*t, n)).collect(),
        VocabRanking::TermFrequency => tf.iter().map(|(t, &n)| (*t, n)).collect(),
    };
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.truncate(k);
    let terms: Vec<String> = ranked.iter().map(|(t, _)| t.to_string()).collect();
    let dfs = ranked.iter().map(|(t, _)| df[t]).collect();
    Vocabulary::new(terms, dfs, documents.len())
}

/// log(1 + f) * log(|D| / (1 + df)), natural log. Errors for terms outside
/// the vocabulary.
pub fn tfidf(term: &str, document: &SubdomainDocument, vocabulary: &Vocabulary, clamp_idf: bool) -> Result<f64> {
    let pos = vocabulary
        .position(term)
        .ok_or_else(|| Error::OutOfVocabulary(term.to_string()))?;
    let f = term_counts(document).get(term).copied().unwrap_or(0);
    Ok(score(f, vocabulary.idf(pos, clamp_idf)))
}

fn score(f: u64, idf: f64) -> f64 {
    (1.0 + f as f64).ln() * idf
}

/// [mean URL length, '&' count, '=' count, '?' count, interaction kind code],
/// counted over the URL multiset.
pub fn engineered(document: &SubdomainDocument) -> [f64; 5] {
    let (mut n, mut len, mut amp, mut eq, mut q) = (0u64, 0u64, 0u64, 0u64, 0u64);
    for (url, &mult) in &document.urls {
        n += mult;
        len += mult * url.chars().count() as u64;
        for c in url.chars() {
            match c {
                '&' => amp += mult,
                '=' => eq += mult,
                '?' => q += mult,
                _ => {}
            }
        }
    }
    let mean = if n == 0 { 0.0 } else { len as f64 / n as f64 };
    [mean, amp as f64, eq as f64, q as f64, f64::from(document.kind.code())]
}

/// `[keywords | engineered | structural]` for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// (vocabulary position, TF-IDF) for terms present in the document.
    pub keywords: Vec<(usize, f64)>,
    pub keyword_len: usize,
    pub engineered: [f64; 5],
    pub structural: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.keyword_len + self.engineered.len() + self.structural.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.keyword_len];
        for &(i, v) in &self.keywords {
            out[i] = v;
        }
        out.extend_from_slice(&self.engineered);
        out.extend_from_slice(&self.structural);
        out
    }
}

pub fn assemble_vector(
    document: &SubdomainDocument,
    vocabulary: &Vocabulary,
    structural_row: &[f64],
    clamp_idf: bool,
) -> FeatureVector {
    let mut keywords: Vec<(usize, f64)> = term_counts(document)
        .into_iter()
        .filter_map(|(t, f)| {
            vocabulary
                .position(&t)
                .map(|p| (p, score(f, vocabulary.idf(p, clamp_idf))))
        })
        .collect();
    keywords.sort_by_key(|(p, _)| *p);
    FeatureVector {
        keywords,
        keyword_len: vocabulary.len(),
        engineered: engineered(document),
        structural: structural_row.to_vec(),
    }
}

/// Column names matching [`FeatureVector::to_dense`].
pub fn feature_names(vocabulary: &Vocabulary, structural: &[&str]) -> Vec<String> {
    vocabulary
        .terms
        .iter()
        .map(|t| format!("kw:{t}"))
        .chain(ENGINEERED_NAMES.iter().map(|s| s.to_string()))
        .chain(structural.iter().map(|s| format!("st:{s}")))
        .collect()
}
