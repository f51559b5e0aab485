//! Per-node structural features: egonet base counts, coverage, and recursive
//! neighbor aggregates with correlation pruning.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::exec::{self, Execution};
use crate::graph::{NodeKey, WideGraph};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructConfig {
    pub depth: usize,
    pub prune_threshold: f64,
    /// Aggregate in- and out-neighbors separately instead of the undirected
    /// neighborhood.
    pub directed: bool,
    pub execution: Execution,
}

impl Default for StructConfig {
    fn default() -> Self {
        StructConfig {
            depth: 2,
            prune_threshold: 0.95,
            directed: false,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BaseFeatureRow {
    pub degree: usize,
    pub in_degree: usize,
    pub out_degree: usize,
    pub ego_inter: usize,
    pub ego_out: usize,
    pub direct_cov: f64,
    pub indirect_cov: f64,
}

const BASE_NAMES: [&str; 7] = [
    "degree",
    "in_degree",
    "out_degree",
    "ego_inter",
    "ego_out",
    "direct_cov",
    "indirect_cov",
];

impl BaseFeatureRow {
    fn values(&self) -> [f64; 7] {
        [
            self.degree as f64,
            self.in_degree as f64,
            self.out_degree as f64,
            self.ego_inter as f64,
            self.ego_out as f64,
            self.direct_cov,
            self.indirect_cov,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    /// 0 for base features, k for columns produced at recursion level k.
    pub generation: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StructMatrix {
    pub rows: Vec<NodeKey>,
    pub columns: Vec<Column>,
}

impl StructMatrix {
    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[i]).collect()
    }

    /// Row lookup by node key.
    pub fn row_index(&self) -> HashMap<&NodeKey, usize> {
        self.rows.iter().enumerate().map(|(i, k)| (k, i)).collect()
    }

    fn select_rows(&self, keep: &[usize]) -> StructMatrix {
        StructMatrix {
            rows: keep.iter().map(|&i| self.rows[i].clone()).collect(),
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    generation: c.generation,
                    values: keep.iter().map(|&i| c.values[i]).collect(),
                })
                .collect(),
        }
    }
}

/// Index view of the graph. Edges are distinct `(src, dst, label)` triples.
pub struct StructuralIndex<'g> {
    graph: &'g WideGraph,
    keys: Vec<&'g NodeKey>,
    lookup: HashMap<&'g NodeKey, usize>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
    in_neighbors: Vec<Vec<usize>>,
    out_neighbors: Vec<Vec<usize>>,
}

fn sorted_unique(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

impl<'g> StructuralIndex<'g> {
    pub fn new(graph: &'g WideGraph) -> Self {
        let keys: Vec<&NodeKey> = graph.nodes.keys().collect();
        let lookup: HashMap<&NodeKey, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let n = keys.len();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for key in graph.edges.keys() {
            let (s, d) = (lookup[&key.src], lookup[&key.dst]);
            out_edges[s].push(d);
            in_edges[d].push(s);
        }
        let out_neighbors: Vec<Vec<usize>> = out_edges
            .iter()
            .enumerate()
            .map(|(i, v)| sorted_unique(v.iter().copied().filter(|&j| j != i).collect()))
            .collect();
        let in_neighbors: Vec<Vec<usize>> = in_edges
            .iter()
            .enumerate()
            .map(|(i, v)| sorted_unique(v.iter().copied().filter(|&j| j != i).collect()))
            .collect();
        let neighbors = (0..n)
            .map(|i| sorted_unique(out_neighbors[i].iter().chain(&in_neighbors[i]).copied().collect()))
            .collect();
        StructuralIndex {
            graph,
            keys,
            lookup,
            out_edges,
            in_edges,
            neighbors,
            in_neighbors,
            out_neighbors,
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    fn base_row(&self, i: usize, coverage: &HashMap<&NodeKey, (f64, f64)>) -> BaseFeatureRow {
        let nbrs = &self.neighbors[i];
        let in_ego = |j: usize| j == i || nbrs.binary_search(&j).is_ok();
        let (mut inter, mut out) = (0, 0);
        for m in std::iter::once(i).chain(nbrs.iter().copied()) {
            for &x in &self.out_edges[m] {
                if in_ego(x) {
                    inter += 1;
                } else {
                    out += 1;
                }
            }
            out += self.in_edges[m].iter().filter(|&&x| !in_ego(x)).count();
        }
        let (direct_cov, indirect_cov) = coverage.get(self.keys[i]).copied().unwrap_or((0.0, 0.0));
        BaseFeatureRow {
            degree: self.in_edges[i].len() + self.out_edges[i].len(),
            in_degree: self.in_edges[i].len(),
            out_degree: self.out_edges[i].len(),
            ego_inter: inter,
            ego_out: out,
            direct_cov,
            indirect_cov,
        }
    }

    fn coverage_map(&self) -> HashMap<&'g NodeKey, (f64, f64)> {
        self.graph
            .coverage_all()
            .into_iter()
            .map(|(k, c)| (k, (c.direct(), c.indirect())))
            .collect()
    }

    /// Base features for every node, first parties included (their coverage is 0).
    pub fn base_matrix(&self, exec: Execution) -> StructMatrix {
        let coverage = self.coverage_map();
        let rows = exec::map_range(exec, self.len(), |i| self.base_row(i, &coverage).values());
        let mut columns: Vec<Column> = BASE_NAMES
            .iter()
            .enumerate()
            .map(|(c, name)| Column {
                name: name.to_string(),
                generation: 0,
                values: rows.iter().map(|r| r[c]).collect(),
            })
            .collect();
        columns.sort_by(|a, b| a.name.cmp(&b.name));
        StructMatrix {
            rows: self.keys.iter().map(|k| (*k).clone()).collect(),
            columns,
        }
    }
}

pub fn base_features(graph: &WideGraph, node: &NodeKey) -> Result<BaseFeatureRow> {
    let index = StructuralIndex::new(graph);
    let i = *index
        .lookup
        .get(node)
        .ok_or_else(|| Error::UnknownNode(node.to_string()))?;
    Ok(index.base_row(i, &index.coverage_map()))
}

fn pearson(a: &[f64], b: &[f64], mask: &[bool]) -> f64 {
    let mut n = 0.0;
    let (mut sa, mut sb) = (0.0, 0.0);
    for ((x, y), &m) in a.iter().zip(b).zip(mask) {
        if m {
            n += 1.0;
            sa += x;
            sb += y;
        }
    }
    if n == 0.0 {
        return 1.0;
    }
    let (ma, mb) = (sa / n, sb / n);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for ((x, y), &m) in a.iter().zip(b).zip(mask) {
        if m {
            let (dx, dy) = (x - ma, y - mb);
            cov += dx * dy;
            va += dx * dx;
            vb += dy * dy;
        }
    }
    match (is_constant(va, ma), is_constant(vb, mb)) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        (false, false) => cov / (va.sqrt() * vb.sqrt()),
    }
}

fn is_constant(sum_sq_dev: f64, mean: f64) -> bool {
    sum_sq_dev <= 1e-24 * (1.0 + mean * mean)
}

/// Greedy correlation pruning. Columns are visited in (generation, name)
/// order; a column is dropped when its |r| with any retained column reaches
/// `threshold`. Correlations use only rows where `mask` is set.
fn prune_with_mask(columns: Vec<Column>, mask: &[bool], threshold: f64) -> Vec<Column> {
    let mut ordered = columns;
    ordered.sort_by(|a, b| a.generation.cmp(&b.generation).then(a.name.cmp(&b.name)));
    let mut kept: Vec<Column> = Vec::new();
    for col in ordered {
        let redundant = kept
            .iter()
            .any(|k| pearson(&k.values, &col.values, mask).abs() >= threshold);
        if !redundant {
            kept.push(col);
        }
    }
    kept
}

fn third_party_mask(rows: &[NodeKey]) -> Vec<bool> {
    let mask: Vec<bool> = rows.iter().map(|k| !k.is_first_party()).collect();
    if mask.iter().any(|&m| m) {
        mask
    } else {
        vec![true; rows.len()]
    }
}

/// Drops columns correlated with an earlier-ordered retained column.
/// Correlations are measured over third-party rows when there are any.
pub fn prune_correlated(matrix: StructMatrix, threshold: f64) -> Result<StructMatrix> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "prune threshold {threshold} outside (0, 1]"
        )));
    }
    let mask = third_party_mask(&matrix.rows);
    Ok(StructMatrix {
        columns: prune_with_mask(matrix.columns, &mask, threshold),
        rows: matrix.rows,
    })
}

fn aggregate(values: &[f64], neighbors: &[Vec<usize>], exec: Execution) -> (Vec<f64>, Vec<f64>) {
    let pairs = exec::map_range(exec, neighbors.len(), |i| {
        let nb = &neighbors[i];
        if nb.is_empty() {
            (0.0, 0.0)
        } else {
            let sum: f64 = nb.iter().map(|&j| values[j]).sum();
            (sum / nb.len() as f64, sum)
        }
    });
    pairs.into_iter().unzip()
}

/// Appends neighbor means and sums of the previous generation's columns,
/// `depth` times, pruning after each level.
///
/// Only the newest generation is aggregated: aggregating an older column again
/// reproduces an existing column exactly, which pruning would remove anyway.
/// `matrix` must hold one row per graph node in key order, as produced by
/// [`StructuralIndex::base_matrix`].
pub fn refex_expand(
    matrix: StructMatrix,
    index: &StructuralIndex<'_>,
    depth: usize,
    config: &StructConfig,
) -> Result<StructMatrix> {
    if matrix.rows.len() != index.len() {
        return Err(Error::InvalidArgument(format!(
            "matrix has {} rows, graph has {} nodes",
            matrix.rows.len(),
            index.len()
        )));
    }
    if depth == 0 {
        return Ok(matrix);
    }
    let mask = third_party_mask(&matrix.rows);
    let mut columns = matrix.columns;
    for level in 1..=depth {
        let mut fresh = Vec::new();
        for col in columns.iter().filter(|c| c.generation == level - 1) {
            let views: Vec<(&str, &[Vec<usize>])> = if config.directed {
                vec![("in_", &index.in_neighbors), ("out_", &index.out_neighbors)]
            } else {
                vec![("", &index.neighbors)]
            };
            for (prefix, nb) in views {
                let (mean, sum) = aggregate(&col.values, nb, config.execution);
                fresh.push(Column {
                    name: format!("{prefix}mean({})", col.name),
                    generation: level,
                    values: mean,
                });
                fresh.push(Column {
                    name: format!("{prefix}sum({})", col.name),
                    generation: level,
                    values: sum,
                });
            }
        }
        if fresh.is_empty() {
            break;
        }
        columns.extend(fresh);
        columns = prune_with_mask(columns, &mask, config.prune_threshold);
    }
    Ok(StructMatrix {
        rows: matrix.rows,
        columns,
    })
}

/// Full structural feature extraction: one row per third-party node.
pub fn structural_features(graph: &WideGraph, config: &StructConfig) -> Result<StructMatrix> {
    if !(config.prune_threshold > 0.0 && config.prune_threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "prune threshold {} outside (0, 1]",
            config.prune_threshold
        )));
    }
    let index = StructuralIndex::new(graph);
    let base = index.base_matrix(config.execution);
    let full = refex_expand(base, &index, config.depth, config)?;
    let keep: Vec<usize> = full
        .rows
        .iter()
        .enumerate()
        .filter(|(_, k)| !k.is_first_party())
        .map(|(i, _)| i)
        .collect();
    Ok(full.select_rows(&keep))
}

/// Writes the matrix as a tab-separated table: `domain kind <feature...>`.
pub fn write_struct_matrix(path: &Path, matrix: &StructMatrix) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    write!(out, "domain\tkind").map_err(io)?;
    for c in &matrix.columns {
        write!(out, "\t{}", c.name).map_err(io)?;
    }
    writeln!(out).map_err(io)?;
    for (i, key) in matrix.rows.iter().enumerate() {
        let kind = key.kind().map_or("first-party", |k| k.as_str());
        write!(out, "{}\t{}", key.domain(), kind).map_err(io)?;
        for c in &matrix.columns {
            write!(out, "\t{}", c.values[i]).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_struct_matrix(path: &Path) -> Result<StructMatrix> {
    let name = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = std::io::BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::table(&name, "empty file"))?
        .map_err(|e| Error::io(path, e))?;
    let cols: Vec<&str> = header.split('\t').collect();
    if cols.len() < 2 || cols[0] != "domain" || cols[1] != "kind" {
        return Err(Error::table(&name, "expected header starting with domain\\tkind"));
    }
    let mut matrix = StructMatrix {
        rows: Vec::new(),
        columns: cols[2..]
            .iter()
            .map(|n| Column {
                name: n.to_string(),
                generation: n.matches('(').count(),
                values: Vec::new(),
            })
            .collect(),
    };
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != cols.len() {
            return Err(Error::table(&name, format!("line {}: wrong field count", lineno + 2)));
        }
        matrix.rows.push(NodeKey::third_party(fields[0], fields[1].parse()?));
        for (c, raw) in matrix.columns.iter_mut().zip(&fields[2..]) {
            c.values.push(
                raw.parse()
                    .map_err(|_| Error::table(&name, format!("line {}: bad number {raw:?}", lineno + 2)))?,
            );
        }
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeKey, SiteTree};
    use crate::ingest::InteractionKind::{self, *};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn tp(d: &str) -> NodeKey {
        NodeKey::third_party(d, Script)
    }

    fn graph_from_edges(root: Option<&str>, edges: &[(NodeKey, NodeKey, InteractionKind)]) -> WideGraph {
        let mut g = WideGraph::new();
        let mut site = SiteTree {
            root: root.unwrap_or("r.com").to_string(),
            nodes: Default::default(),
            edges: Default::default(),
            documents: Default::default(),
            diagnostics: Default::default(),
        };
        for (s, d, l) in edges {
            for k in [s, d] {
                if !k.is_first_party() {
                    site.nodes.insert(k.clone());
                }
            }
            site.edges.insert(
                EdgeKey {
                    src: s.clone(),
                    dst: d.clone(),
                    label: *l,
                },
                1,
            );
        }
        g.merge(site);
        if root.is_none() {
            g.roots.clear();
            g.nodes.remove(&NodeKey::FirstParty("r.com".into()));
        }
        g
    }

    #[test]
    fn path_with_bounced_edge() {
        let r = NodeKey::FirstParty("r.com".into());
        let g = graph_from_edges(
            Some("r.com"),
            &[
                (r.clone(), tp("a.net"), Script),
                (tp("a.net"), tp("b.net"), Script),
                (r.clone(), tp("b.net"), Bounced),
            ],
        );
        let a = base_features(&g, &tp("a.net")).unwrap();
        assert_eq!((a.in_degree, a.out_degree, a.degree), (1, 1, 2));
        assert_eq!((a.ego_inter, a.ego_out), (3, 0));
        assert_eq!((a.direct_cov, a.indirect_cov), (1.0, 1.0));
        let b = base_features(&g, &tp("b.net")).unwrap();
        assert_eq!((b.in_degree, b.direct_cov, b.indirect_cov), (2, 0.0, 1.0));
    }

    #[test]
    fn triangle() {
        let g = graph_from_edges(
            None,
            &[
                (tp("a.net"), tp("b.net"), Script),
                (tp("b.net"), tp("c.net"), Script),
                (tp("a.net"), tp("c.net"), Script),
            ],
        );
        let b = base_features(&g, &tp("b.net")).unwrap();
        assert_eq!((b.ego_inter, b.ego_out), (3, 0));
    }

    #[test]
    fn ego_out_counts_edges_leaving_egonet() {
        // a -> b -> c -> d : egonet of b is {a,b,c}; c->d leaves it.
        let g = graph_from_edges(
            None,
            &[
                (tp("a.net"), tp("b.net"), Script),
                (tp("b.net"), tp("c.net"), Script),
                (tp("c.net"), tp("d.net"), Script),
                (tp("e.net"), tp("a.net"), Script),
            ],
        );
        let b = base_features(&g, &tp("b.net")).unwrap();
        assert_eq!((b.ego_inter, b.ego_out), (2, 2));
    }

    #[test]
    fn isolated_node_and_unknown() {
        let mut g = WideGraph::new();
        g.nodes.insert(tp("lonely.net"), Default::default());
        assert_eq!(base_features(&g, &tp("lonely.net")).unwrap(), BaseFeatureRow::default());
        assert!(matches!(base_features(&g, &tp("x.net")), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn depth_zero_is_identity_and_depth_one_bounded() {
        let r = NodeKey::FirstParty("r.com".into());
        let g = graph_from_edges(
            Some("r.com"),
            &[
                (r.clone(), tp("a.net"), Script),
                (tp("a.net"), tp("b.net"), Script),
                (tp("a.net"), tp("c.net"), Script),
                (tp("c.net"), tp("d.net"), Script),
                (r.clone(), tp("b.net"), Bounced),
            ],
        );
        let index = StructuralIndex::new(&g);
        let base = index.base_matrix(Execution::Sequential);
        let cfg = StructConfig {
            execution: Execution::Sequential,
            ..Default::default()
        };
        assert_eq!(refex_expand(base.clone(), &index, 0, &cfg).unwrap(), base);
        let one = refex_expand(
            base,
            &index,
            1,
            &StructConfig {
                prune_threshold: 1.0,
                ..cfg
            },
        )
        .unwrap();
        assert!(one.columns.len() <= 21);
        assert!(one.columns.iter().any(|c| c.generation == 1));
    }

    #[test]
    fn ring_collapses() {
        let n = 12;
        let edges: Vec<_> = (0..n)
            .map(|i| (tp(&format!("n{i}.net")), tp(&format!("n{}.net", (i + 1) % n)), Script))
            .collect();
        let g = graph_from_edges(None, &edges);
        let m = structural_features(&g, &StructConfig::default()).unwrap();
        assert_eq!(m.rows.len(), n);
        assert!(m.columns.iter().all(|c| c.generation == 0));
        assert!(m.columns.len() <= 7);
    }

    #[test]
    fn duplicate_and_scaled_columns_pruned() {
        let rows: Vec<_> = (0..5).map(|i| tp(&format!("n{i}.net"))).collect();
        let base = vec![1.0, 4.0, 2.0, 8.0, 5.0];
        let m = StructMatrix {
            rows,
            columns: vec![
                Column {
                    name: "a".into(),
                    generation: 0,
                    values: base.clone(),
                },
                Column {
                    name: "b".into(),
                    generation: 0,
                    values: base.clone(),
                },
                Column {
                    name: "c".into(),
                    generation: 0,
                    values: base.iter().map(|x| 2.0 * x).collect(),
                },
                Column {
                    name: "d".into(),
                    generation: 0,
                    values: base.iter().map(|x| -x + 3.0).collect(),
                },
                Column {
                    name: "e".into(),
                    generation: 0,
                    values: vec![1.0, 0.0, 1.0, 0.0, 0.0],
                },
            ],
        };
        let p = prune_correlated(m, 0.95).unwrap();
        assert_eq!(p.column_names(), vec!["a", "e"]);
    }

    #[test]
    fn constants_keep_only_first() {
        let rows: Vec<_> = (0..3).map(|i| tp(&format!("n{i}.net"))).collect();
        let m = StructMatrix {
            rows,
            columns: vec![
                Column {
                    name: "k1".into(),
                    generation: 0,
                    values: vec![2.0; 3],
                },
                Column {
                    name: "k2".into(),
                    generation: 0,
                    values: vec![5.0; 3],
                },
                Column {
                    name: "v".into(),
                    generation: 1,
                    values: vec![1.0, 2.0, 3.0],
                },
            ],
        };
        let p = prune_correlated(m, 0.95).unwrap();
        assert_eq!(p.column_names(), vec!["k1", "v"]);
    }

    #[test]
    fn threshold_validated() {
        assert!(prune_correlated(StructMatrix::default(), 0.0).is_err());
        assert!(prune_correlated(StructMatrix::default(), 1.5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn independent_columns_survive(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<_> = (0..200).map(|i| tp(&format!("n{i}.net"))).collect();
            let columns: Vec<Column> = (0..6)
                .map(|c| Column {
                    name: format!("c{c}"),
                    generation: 0,
                    values: (0..200).map(|_| rng.gen::<f64>()).collect(),
                })
                .collect();
            let p = prune_correlated(StructMatrix { rows, columns }, 0.95).unwrap();
            prop_assert_eq!(p.columns.len(), 6);
        }

        #[test]
        fn retained_pairs_below_threshold(seed in any::<u64>(), threshold in 0.5f64..0.99) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 40;
            let rows: Vec<_> = (0..n).map(|i| tp(&format!("n{i}.net"))).collect();
            let base: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let columns: Vec<Column> = (0..8)
                .map(|c| Column {
                    name: format!("c{c}"),
                    generation: c % 3,
                    values: base.iter().map(|x| x * (c as f64 + 1.0) + rng.gen::<f64>() * c as f64 * 0.3).collect(),
                })
                .collect();
            let p = prune_correlated(StructMatrix { rows, columns }, threshold).unwrap();
            let mask = vec![true; n];
            for i in 0..p.columns.len() {
                for j in 0..i {
                    prop_assert!(pearson(&p.columns[i].values, &p.columns[j].values, &mask).abs() < threshold);
                }
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let r = NodeKey::FirstParty("r.com".into());
        let g = graph_from_edges(
            Some("r.com"),
            &[
                (r.clone(), tp("a.net"), Script),
                (tp("a.net"), tp("b.net"), Script),
                (r, tp("b.net"), Bounced),
            ],
        );
        let m = structural_features(&g, &StructConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.tsv");
        write_struct_matrix(&path, &m).unwrap();
        assert_eq!(read_struct_matrix(&path).unwrap(), m);
    }
}
