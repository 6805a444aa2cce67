use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gini::gini_from_counts;

/// Splits whose impurity decrease is within this of zero count as no
/// improvement, and decreases this close together count as ties.
const DELTA_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    /// Rows with `x[feature_index] <= threshold` go left.
    Internal {
        feature_index: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        class_counts: Vec<usize>,
    },
}

impl TreeNode {
    pub fn leaf<'a>(&'a self, row: &[f64]) -> &'a [usize] {
        let mut node = self;
        loop {
            match node {
                TreeNode::Internal {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature_index] <= *threshold { left } else { right };
                }
                TreeNode::Leaf { class_counts } => return class_counts,
            }
        }
    }

    /// Majority class of the leaf reached by `row`; ties go to the lowest
    /// class index.
    pub fn vote(&self, row: &[f64]) -> usize {
        argmax(self.leaf(row))
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
            TreeNode::Leaf { .. } => 0,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Internal { left, right, .. } => 1 + left.node_count() + right.node_count(),
            TreeNode::Leaf { .. } => 1,
        }
    }

    pub(crate) fn check(&self, n_features: usize, n_classes: usize) -> bool {
        match self {
            TreeNode::Internal {
                feature_index,
                threshold,
                left,
                right,
            } => {
                *feature_index < n_features
                    && threshold.is_finite()
                    && left.check(n_features, n_classes)
                    && right.check(n_features, n_classes)
            }
            TreeNode::Leaf { class_counts } => class_counts.len() == n_classes,
        }
    }
}

pub(crate) fn argmax<T: PartialOrd + Copy>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

struct Split {
    feature: usize,
    threshold: f64,
    delta: f64,
}

impl Split {
    fn beats(&self, other: &Split) -> bool {
        if self.delta > other.delta + DELTA_EPS {
            return true;
        }
        (self.delta - other.delta).abs() <= DELTA_EPS
            && (self.feature, self.threshold) < (other.feature, other.threshold)
    }
}

pub(crate) struct TreeBuilder<'a> {
    pub x: &'a [Vec<f64>],
    pub y: &'a [usize],
    pub n_classes: usize,
    pub p_features: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Size-weighted impurity decrease per feature, filled during `build`.
    pub importance: Vec<f64>,
    pub n_root: f64,
}

impl TreeBuilder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.y[i]] += 1;
        }
        c
    }

    pub fn build<R: Rng>(&mut self, idx: Vec<usize>, depth: usize, rng: &mut R) -> TreeNode {
        let counts = self.counts(&idx);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || self.max_depth.is_some_and(|d| depth >= d) || idx.len() < 2 * self.min_leaf {
            return TreeNode::Leaf { class_counts: counts };
        }
        let parent = gini_from_counts(&counts);
        let m = self.x[0].len();
        let mut best: Option<Split> = None;
        for f in sample(rng, m, self.p_features.min(m)).into_iter() {
            if let Some(s) = self.best_threshold(&idx, f, parent) {
                if best.as_ref().is_none_or(|b| s.beats(b)) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best.filter(|s| s.delta > DELTA_EPS) else {
            return TreeNode::Leaf { class_counts: counts };
        };
        self.importance[split.feature] += idx.len() as f64 / self.n_root * split.delta;
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.x[i][split.feature] <= split.threshold);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        TreeNode::Internal {
            feature_index: split.feature,
            threshold: split.threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn best_threshold(&self, idx: &[usize], f: usize, parent: f64) -> Option<Split> {
        let mut order: Vec<(f64, usize)> = idx.iter().map(|&i| (self.x[i][f], self.y[i])).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = order.len();
        let mut left = vec![0usize; self.n_classes];
        let mut right = vec![0usize; self.n_classes];
        for &(_, c) in &order {
            right[c] += 1;
        }
        let mut best: Option<Split> = None;
        for k in 1..n {
            let c = order[k - 1].1;
            left[c] += 1;
            right[c] -= 1;
            let (a, b) = (order[k - 1].0, order[k].0);
            if a >= b || k < self.min_leaf || n - k < self.min_leaf {
                continue;
            }
            let delta = parent
                - k as f64 / n as f64 * gini_from_counts(&left)
                - (n - k) as f64 / n as f64 * gini_from_counts(&right);
            let mid = a + (b - a) / 2.0;
            let threshold = if mid < b { mid } else { a };
            let s = Split {
                feature: f,
                threshold,
                delta,
            };
            if best.as_ref().is_none_or(|bst| s.beats(bst)) {
                best = Some(s);
            }
        }
        best
    }
}
