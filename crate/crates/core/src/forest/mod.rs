//! Random forest of bootstrap-sampled Gini trees with feature subsampling.

mod io;
mod tree;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::{self, Execution};
use crate::filter::LabelClass;
use crate::{Error, Result};

pub use io::{load_model, read_model, save_model, write_model, MODEL_FORMAT};
pub use tree::{DecisionTree, Node};

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    pub n_rows: usize,
    pub n_features: usize,
}

impl FeatureMatrix {
    pub fn new(values: Vec<f64>, n_rows: usize, n_features: usize) -> Result<Self> {
        if values.len() != n_rows * n_features {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_features,
                actual: values.len(),
            });
        }
        Ok(FeatureMatrix {
            values,
            n_rows,
            n_features,
        })
    }

    /// Builds a matrix from rows of equal length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_features = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * n_features);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n_features {
                return Err(Error::DimensionMismatch {
                    expected: n_features,
                    actual: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Ok(FeatureMatrix {
            values,
            n_rows: rows.len(),
            n_features,
        })
    }

    #[inline]
    pub fn get(&self, row: usize, feature: usize) -> f64 {
        self.values[row * self.n_features + feature]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_features..(row + 1) * self.n_features]
    }

    fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(i) if self.n_features > 0 => Err(Error::NonFinite {
                row: i / self.n_features,
                column: i % self.n_features,
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ClassWeight {
    #[default]
    None,
    /// Inverse class frequency, so both classes carry equal total weight.
    Balanced,
}

impl ClassWeight {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassWeight::None => "none",
            ClassWeight::Balanced => "balanced",
        }
    }
}

impl fmt::Display for ClassWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ClassWeight::None),
            "balanced" => Ok(ClassWeight::Balanced),
            other => Err(Error::InvalidArgument(format!(
                "class weight {other:?} (expected none|balanced)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features examined per split; `None` means ⌈√d⌉.
    pub mtry: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
    pub class_weight: ClassWeight,
    pub execution: Execution,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 250,
            mtry: None,
            max_depth: None,
            min_samples_split: 2,
            seed: 0,
            class_weight: ClassWeight::None,
            execution: Execution::default(),
        }
    }
}

impl ForestParams {
    pub fn resolved_mtry(&self, d: usize) -> usize {
        self.mtry.unwrap_or_else(|| (d as f64).sqrt().ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: LabelClass,
    /// Fraction of trees voting AdTracker.
    pub score: f64,
}

impl Prediction {
    fn from_votes(positive: usize, total: usize) -> Self {
        let score = positive as f64 / total as f64;
        // A strict majority is required; an even split stays benign.
        let label = if 2 * positive > total {
            LabelClass::AdTracker
        } else {
            LabelClass::Benign
        };
        Prediction { label, score }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub feature_count: usize,
}

pub struct TrainOutput {
    pub model: ForestModel,
    /// Out-of-bag AdTracker vote fraction per training row; `None` when the
    /// row was in every bootstrap sample.
    pub oob_scores: Vec<Option<f64>>,
}

fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

fn draw_bootstrap(rng: &mut ChaCha8Rng, n: usize) -> Vec<u32> {
    let mut multiplicity = vec![0u32; n];
    for _ in 0..n {
        multiplicity[rng.gen_range(0..n)] += 1;
    }
    multiplicity
}

/// How many times each of `n` rows was drawn into the bootstrap sample of
/// tree `tree` when training with `seed`.
pub fn bootstrap_multiplicity(seed: u64, tree: usize, n: usize) -> Vec<u32> {
    draw_bootstrap(&mut tree_rng(seed, tree), n)
}

/// Trains a forest and discards the out-of-bag scores.
pub fn train(x: &FeatureMatrix, y: &[LabelClass], params: &ForestParams) -> Result<ForestModel> {
    train_with_oob(x, y, params).map(|out| out.model)
}

pub fn train_with_oob(x: &FeatureMatrix, y: &[LabelClass], params: &ForestParams) -> Result<TrainOutput> {
    let n = x.n_rows;
    let d = x.n_features;
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::Training(format!("need at least 2 rows, got {n}")));
    }
    if d == 0 {
        return Err(Error::Training("no features".into()));
    }
    if params.n_trees == 0 {
        return Err(Error::Training("n_trees must be at least 1".into()));
    }
    let mtry = params.resolved_mtry(d);
    if mtry > d {
        return Err(Error::Training(format!("mtry {mtry} exceeds feature count {d}")));
    }
    x.check_finite()?;
    let labels: Vec<bool> = y.iter().map(|c| c.is_positive()).collect();
    let positives = labels.iter().filter(|&&b| b).count();
    if positives == 0 || positives == n {
        return Err(Error::Training("training labels contain a single class".into()));
    }
    let class_weight = match params.class_weight {
        ClassWeight::None => [1.0, 1.0],
        ClassWeight::Balanced => [
            n as f64 / (2.0 * (n - positives) as f64),
            n as f64 / (2.0 * positives as f64),
        ],
    };
    let config = tree::GrowConfig {
        mtry,
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        class_weight,
    };

    let grown: Vec<(DecisionTree, Vec<u32>)> = exec::map_range(params.execution, params.n_trees, |t| {
        let mut rng = tree_rng(params.seed, t);
        let multiplicity = draw_bootstrap(&mut rng, n);
        let mut rows: Vec<usize> = (0..n).filter(|&i| multiplicity[i] > 0).collect();
        let tree = tree::Grower::new(x, &labels, &multiplicity, &config, &mut rng).grow(&mut rows);
        (tree, multiplicity)
    });

    let oob_scores = exec::map_range(params.execution, n, |i| {
        let mut votes = 0usize;
        let mut total = 0usize;
        for (tree, multiplicity) in &grown {
            if multiplicity[i] == 0 {
                total += 1;
                votes += usize::from(tree.votes_positive(x.row(i)));
            }
        }
        (total > 0).then(|| votes as f64 / total as f64)
    });

    Ok(TrainOutput {
        model: ForestModel {
            trees: grown.into_iter().map(|(t, _)| t).collect(),
            feature_count: d,
        },
        oob_scores,
    })
}

impl ForestModel {
    pub fn predict(&self, vector: &[f64]) -> Result<Prediction> {
        if vector.len() != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                actual: vector.len(),
            });
        }
        let positive = self.trees.iter().filter(|t| t.votes_positive(vector)).count();
        Ok(Prediction::from_votes(positive, self.trees.len()))
    }

    pub fn predict_all(&self, x: &FeatureMatrix, exec: Execution) -> Result<Vec<Prediction>> {
        if x.n_features != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                actual: x.n_features,
            });
        }
        exec::map_range(exec, x.n_rows, |i| self.predict(x.row(i)))
            .into_iter()
            .collect()
    }

    /// Mean per-tree normalized impurity decrease, renormalized to sum 1.
    /// Sorted by importance descending, ties by feature index. All zeros when
    /// no tree ever split.
    pub fn feature_importance(&self) -> Vec<(usize, f64)> {
        let d = self.feature_count;
        let mut total = vec![0.0; d];
        for tree in &self.trees {
            let mut per = vec![0.0; d];
            for node in &tree.nodes {
                if let Node::Split {
                    feature,
                    impurity_decrease,
                    ..
                } = node
                {
                    per[*feature] += impurity_decrease;
                }
            }
            let sum: f64 = per.iter().sum();
            if sum > 0.0 {
                for (t, p) in total.iter_mut().zip(&per) {
                    *t += p / sum;
                }
            }
        }
        let sum: f64 = total.iter().sum();
        if sum > 0.0 {
            total.iter_mut().for_each(|t| *t /= sum);
        }
        let mut ranked: Vec<(usize, f64)> = total.into_iter().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked
    }
}
