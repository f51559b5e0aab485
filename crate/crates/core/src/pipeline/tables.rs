//! Tab-separated tables exchanged between pipeline stages.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use super::{MetricsReport, SplitTag};
use crate::content::{assemble_vector, feature_names, Vocabulary};
use crate::exec::{self, Execution};
use crate::filter::{Label, LabelClass};
use crate::forest::FeatureMatrix;
use crate::graph::{DocKey, NodeKey, SubdomainDocument};
use crate::structural::StructMatrix;
use crate::{Error, Result};

const META_COLUMNS: [&str; 6] = ["host", "kind", "domain", "sites", "urls", "split"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentMeta {
    pub key: DocKey,
    pub domain: String,
    /// Distinct first parties that reached the document.
    pub sites: u64,
    /// Total URL occurrences.
    pub urls: u64,
    pub split: SplitTag,
}

impl DocumentMeta {
    pub fn parent(&self) -> NodeKey {
        NodeKey::third_party(self.domain.clone(), self.key.kind)
    }
}

/// Keyword and engineered features per document.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentTable {
    pub names: Vec<String>,
    pub meta: Vec<DocumentMeta>,
    pub values: Vec<Vec<f64>>,
}

pub fn content_table(
    documents: &[&SubdomainDocument],
    tags: &BTreeMap<&DocKey, SplitTag>,
    vocabulary: &Vocabulary,
    clamp_idf: bool,
    exec: Execution,
) -> Result<ContentTable> {
    let mut meta = Vec::with_capacity(documents.len());
    for doc in documents {
        let key = doc.key();
        let split = *tags.get(&key).ok_or_else(|| Error::MissingData {
            what: "split assignment",
            document: key.to_string(),
        })?;
        meta.push(DocumentMeta {
            key,
            domain: doc.domain.clone(),
            sites: doc.sites.len() as u64,
            urls: doc.url_count(),
            split,
        });
    }
    let values = exec::map_slice(exec, documents, |d| {
        assemble_vector(d, vocabulary, &[], clamp_idf).to_dense()
    });
    Ok(ContentTable {
        names: feature_names(vocabulary, &[]),
        meta,
        values,
    })
}

fn write_tsv(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    body(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

pub fn write_content_table(path: &Path, table: &ContentTable) -> Result<()> {
    write_tsv(path, |out| {
        writeln!(out, "{}\t{}", META_COLUMNS.join("\t"), table.names.join("\t"))?;
        for (m, row) in table.meta.iter().zip(&table.values) {
            write!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                m.key.host, m.key.kind, m.domain, m.sites, m.urls, m.split
            )?;
            for v in row {
                write!(out, "\t{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    })
}

fn parse_field<T: std::str::FromStr>(name: &str, line: usize, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::table(name, format!("line {line}: bad value {raw:?}")))
}

pub fn read_content_table(path: &Path) -> Result<ContentTable> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::table(&name, "empty file"))?
        .split('\t')
        .collect();
    if header.len() < META_COLUMNS.len() || header[..META_COLUMNS.len()] != META_COLUMNS {
        return Err(Error::table(
            &name,
            format!("expected header starting with {}", META_COLUMNS.join(" ")),
        ));
    }
    let names: Vec<String> = header[META_COLUMNS.len()..].iter().map(|s| s.to_string()).collect();
    let mut table = ContentTable {
        names,
        meta: Vec::new(),
        values: Vec::new(),
    };
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let n = i + 2;
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != header.len() {
            return Err(Error::table(
                &name,
                format!("line {n}: expected {} fields", header.len()),
            ));
        }
        table.meta.push(DocumentMeta {
            key: DocKey {
                host: f[0].to_string(),
                kind: f[1].parse()?,
            },
            domain: f[2].to_string(),
            sites: parse_field(&name, n, f[3])?,
            urls: parse_field(&name, n, f[4])?,
            split: f[5].parse()?,
        });
        table.values.push(
            f[META_COLUMNS.len()..]
                .iter()
                .map(|raw| parse_field(&name, n, raw))
                .collect::<Result<_>>()?,
        );
    }
    Ok(table)
}

/// Model-ready rows: content columns followed by the parent node's
/// structural columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub meta: Vec<DocumentMeta>,
    pub matrix: FeatureMatrix,
}

impl Dataset {
    pub fn rows_in(&self, split: SplitTag) -> Vec<usize> {
        (0..self.meta.len()).filter(|&i| self.meta[i].split == split).collect()
    }

    pub fn subset(&self, rows: &[usize]) -> FeatureMatrix {
        let d = self.matrix.n_features;
        let mut values = Vec::with_capacity(rows.len() * d);
        for &r in rows {
            values.extend_from_slice(self.matrix.row(r));
        }
        FeatureMatrix::new(values, rows.len(), d).expect("row lengths match")
    }

    pub fn labels_for(&self, rows: &[usize], labels: &BTreeMap<DocKey, Label>) -> Result<Vec<LabelClass>> {
        rows.iter()
            .map(|&r| {
                let key = &self.meta[r].key;
                labels.get(key).map(|l| l.class).ok_or_else(|| Error::MissingData {
                    what: "label",
                    document: key.to_string(),
                })
            })
            .collect()
    }
}

/// Appends structural columns (prefixed `st:`) looked up by parent node.
pub fn join_features(content: ContentTable, structural: &[StructMatrix]) -> Result<Dataset> {
    let mut names = content.names;
    let lookups: Vec<HashMap<&NodeKey, usize>> = structural.iter().map(|m| m.row_index()).collect();
    for m in structural {
        names.extend(m.column_names().iter().map(|n| format!("st:{n}")));
    }
    let d = names.len();
    let mut values = Vec::with_capacity(content.meta.len() * d);
    for (meta, row) in content.meta.iter().zip(content.values) {
        values.extend(row);
        let parent = meta.parent();
        for (m, lookup) in structural.iter().zip(&lookups) {
            let r = *lookup.get(&parent).ok_or_else(|| Error::MissingData {
                what: "structural row",
                document: meta.key.to_string(),
            })?;
            values.extend(m.columns.iter().map(|c| c.values[r]));
        }
    }
    let n = content.meta.len();
    Ok(Dataset {
        names,
        meta: content.meta,
        matrix: FeatureMatrix::new(values, n, d)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub key: DocKey,
    pub score: f64,
    pub label: LabelClass,
}

pub fn write_scores(path: &Path, rows: &[ScoreRow]) -> Result<()> {
    write_tsv(path, |out| {
        writeln!(out, "host\tkind\tscore\tlabel")?;
        for r in rows {
            writeln!(out, "{}\t{}\t{}\t{}", r.key.host, r.key.kind, r.score, r.label)?;
        }
        Ok(())
    })
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRow>> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some("host\tkind\tscore\tlabel") {
        return Err(Error::table(&name, "expected header host\\tkind\\tscore\\tlabel"));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(Error::table(&name, format!("line {}: expected 4 fields", i + 2)));
        }
        out.push(ScoreRow {
            key: DocKey {
                host: f[0].to_string(),
                kind: f[1].parse()?,
            },
            score: parse_field(&name, i + 2, f[2])?,
            label: f[3].parse()?,
        });
    }
    Ok(out)
}

/// One `mode corrected metric value` row per number in each report.
pub fn write_metrics(path: &Path, reports: &[MetricsReport]) -> Result<()> {
    write_tsv(path, |out| {
        writeln!(out, "mode\tcorrected\tmetric\tvalue")?;
        for r in reports {
            for (metric, value) in r.entries() {
                writeln!(out, "{}\t{}\t{metric}\t{value}", r.mode_name(), r.corrected)?;
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::{build_vocabulary, VocabRanking};
    use crate::ingest::InteractionKind;
    use crate::structural::Column;

    fn doc(host: &str, domain: &str, urls: &[&str], sites: &[&str]) -> SubdomainDocument {
        SubdomainDocument {
            host: host.into(),
            kind: InteractionKind::Script,
            domain: domain.into(),
            urls: urls.iter().map(|u| (u.to_string(), 1)).collect(),
            sites: sites.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn content_round_trip_and_join() {
        let a = doc(
            "a.t.com",
            "t.com",
            &["https://a.t.com/p?id=1", "https://a.t.com/q"],
            &["x.com", "y.com"],
        );
        let b = doc("cdn.b.net", "b.net", &["https://cdn.b.net/lib.js"], &["x.com"]);
        let docs = [&a, &b];
        let vocab = build_vocabulary(&docs, 10, VocabRanking::DocumentFrequency, Execution::Sequential).unwrap();
        let (ka, kb) = (a.key(), b.key());
        let tags: BTreeMap<&DocKey, SplitTag> = [(&ka, SplitTag::Train), (&kb, SplitTag::Test)].into();
        let table = content_table(&docs, &tags, &vocab, false, Execution::Sequential).unwrap();
        assert_eq!(table.meta[0].sites, 2);
        assert_eq!(table.meta[0].urls, 2);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("content.tsv");
        write_content_table(&path, &table).unwrap();
        let back = read_content_table(&path).unwrap();
        assert_eq!(back, table);

        let structural = StructMatrix {
            rows: vec![
                NodeKey::third_party("b.net", InteractionKind::Script),
                NodeKey::third_party("t.com", InteractionKind::Script),
            ],
            columns: vec![Column {
                name: "degree".into(),
                generation: 0,
                values: vec![1.0, 5.0],
            }],
        };
        let ds = join_features(back, std::slice::from_ref(&structural)).unwrap();
        assert_eq!(ds.names.last().unwrap(), "st:degree");
        assert_eq!(*ds.matrix.row(0).last().unwrap(), 5.0);
        assert_eq!(*ds.matrix.row(1).last().unwrap(), 1.0);
        assert_eq!(ds.rows_in(SplitTag::Test), vec![1]);

        let mut missing = structural;
        missing.rows.truncate(1);
        missing.columns[0].values.truncate(1);
        let err = join_features(table, &[missing]).unwrap_err();
        assert!(matches!(err, Error::MissingData { .. }));
    }

    #[test]
    fn scores_round_trip() {
        let rows = vec![ScoreRow {
            key: DocKey {
                host: "a.t.com".into(),
                kind: InteractionKind::Media,
            },
            score: 0.52,
            label: LabelClass::AdTracker,
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.tsv");
        write_scores(&path, &rows).unwrap();
        assert_eq!(read_scores(&path).unwrap(), rows);
    }
}
