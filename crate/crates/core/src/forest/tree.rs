//! Gini-split decision trees grown on weighted (bootstrap-count) samples.

use rand::Rng;

use super::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        /// Index of the right child; the left child always follows its parent.
        right: usize,
        weight: f64,
        impurity_decrease: f64,
    },
    Leaf {
        /// Weighted class totals: [benign, adtracker].
        counts: [f64; 2],
    },
}

/// Nodes in pre-order.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf_counts(&self, row: &[f64]) -> [f64; 2] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return *counts,
                Node::Split {
                    feature,
                    threshold,
                    right,
                    ..
                } => {
                    i = if row[*feature] <= *threshold { i + 1 } else { *right };
                }
            }
        }
    }

    /// Majority class of the reached leaf; ties go to benign.
    pub fn votes_positive(&self, row: &[f64]) -> bool {
        let c = self.leaf_counts(row);
        c[1] > c[0]
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { right, .. } => 1 + walk(nodes, i + 1).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

pub(super) struct GrowConfig {
    pub mtry: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub class_weight: [f64; 2],
}

pub(super) struct Grower<'a, R: Rng> {
    pub x: &'a FeatureMatrix,
    pub y: &'a [bool],
    /// Per-row sample multiplicity (bootstrap counts).
    pub multiplicity: &'a [u32],
    pub config: &'a GrowConfig,
    pub rng: &'a mut R,
    pub nodes: Vec<Node>,
    features: Vec<usize>,
    scratch: Vec<(f64, f64, f64)>,
}

fn gini(w: [f64; 2]) -> f64 {
    let total = w[0] + w[1];
    if total <= 0.0 {
        return 0.0;
    }
    let (p0, p1) = (w[0] / total, w[1] / total);
    1.0 - p0 * p0 - p1 * p1
}

struct Candidate {
    feature: usize,
    threshold: f64,
    /// Weighted child impurity: w_left * gini_left + w_right * gini_right.
    child_impurity: f64,
}

impl<'a, R: Rng> Grower<'a, R> {
    pub fn new(
        x: &'a FeatureMatrix,
        y: &'a [bool],
        multiplicity: &'a [u32],
        config: &'a GrowConfig,
        rng: &'a mut R,
    ) -> Self {
        Grower {
            x,
            y,
            multiplicity,
            config,
            rng,
            nodes: Vec::new(),
            features: (0..x.n_features).collect(),
            scratch: Vec::new(),
        }
    }

    fn class_weights(&self, rows: &[usize]) -> ([f64; 2], usize) {
        let mut w = [0.0; 2];
        let mut n = 0;
        for &r in rows {
            let m = self.multiplicity[r];
            let c = usize::from(self.y[r]);
            w[c] += f64::from(m) * self.config.class_weight[c];
            n += m as usize;
        }
        (w, n)
    }

    pub fn grow(mut self, rows: &mut [usize]) -> DecisionTree {
        self.build(rows, 0);
        DecisionTree { nodes: self.nodes }
    }

    fn build(&mut self, rows: &mut [usize], depth: usize) {
        let (w, n) = self.class_weights(rows);
        let pure = w[0] == 0.0 || w[1] == 0.0;
        let depth_capped = self.config.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || n < self.config.min_samples_split {
            self.nodes.push(Node::Leaf { counts: w });
            return;
        }
        let Some(best) = self.best_split(rows) else {
            self.nodes.push(Node::Leaf { counts: w });
            return;
        };

        let node_weight = w[0] + w[1];
        let here = self.nodes.len();
        self.nodes.push(Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            right: 0,
            weight: node_weight,
            impurity_decrease: (node_weight * gini(w) - best.child_impurity).max(0.0),
        });
        let mut split = 0;
        for i in 0..rows.len() {
            if self.x.get(rows[i], best.feature) <= best.threshold {
                rows.swap(i, split);
                split += 1;
            }
        }
        let (left, right) = rows.split_at_mut(split);
        self.build(left, depth + 1);
        let right_index = self.nodes.len();
        if let Node::Split { right: r, .. } = &mut self.nodes[here] {
            *r = right_index;
        }
        self.build(right, depth + 1);
    }

    /// Best (feature, midpoint) over a random feature subset. Sampling keeps
    /// going past `mtry` until at least one feature varies across the node.
    /// Zero-gain splits are accepted so patterns like XOR stay learnable.
    fn best_split(&mut self, rows: &[usize]) -> Option<Candidate> {
        let d = self.features.len();
        let mut best: Option<Candidate> = None;
        for visited in 0..d {
            if visited >= self.config.mtry && best.is_some() {
                break;
            }
            let j = self.rng.gen_range(visited..d);
            self.features.swap(visited, j);
            let feature = self.features[visited];
            if let Some(c) = self.scan_feature(rows, feature) {
                if best.as_ref().is_none_or(|b| c.child_impurity < b.child_impurity) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn scan_feature(&mut self, rows: &[usize], feature: usize) -> Option<Candidate> {
        let cw = self.config.class_weight;
        self.scratch.clear();
        for &r in rows {
            let m = f64::from(self.multiplicity[r]);
            let (neg, pos) = if self.y[r] { (0.0, m * cw[1]) } else { (m * cw[0], 0.0) };
            self.scratch.push((self.x.get(r, feature), neg, pos));
        }
        self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
        let first = self.scratch.first()?.0;
        let last = self.scratch.last()?.0;
        if first == last {
            return None;
        }
        let total = self
            .scratch
            .iter()
            .fold([0.0, 0.0], |acc, s| [acc[0] + s.1, acc[1] + s.2]);
        let mut left = [0.0, 0.0];
        let mut best: Option<Candidate> = None;
        for i in 0..self.scratch.len() - 1 {
            let (v, neg, pos) = self.scratch[i];
            left[0] += neg;
            left[1] += pos;
            let next = self.scratch[i + 1].0;
            if next == v {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let wl = left[0] + left[1];
            let wr = right[0] + right[1];
            let child_impurity = wl * gini(left) + wr * gini(right);
            if best.as_ref().is_none_or(|b| child_impurity < b.child_impurity) {
                let mut threshold = v + (next - v) / 2.0;
                if threshold >= next {
                    threshold = v;
                }
                best = Some(Candidate {
                    feature,
                    threshold,
                    child_impurity,
                });
            }
        }
        best
    }
}
