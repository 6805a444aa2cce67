use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};

/// `1 - sum_j p_j^2` over per-class counts. Zero for an empty node.
pub fn gini_from_counts(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn tally<T: Ord>(labels: &[T]) -> BTreeMap<&T, usize> {
    let mut m = BTreeMap::new();
    for l in labels {
        *m.entry(l).or_insert(0) += 1;
    }
    m
}

pub fn gini_impurity<T: Ord>(labels: &[T]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::InvalidInput("gini impurity of an empty label set".into()));
    }
    let counts: Vec<usize> = tally(labels).into_values().collect();
    Ok(gini_from_counts(&counts))
}

/// Impurity decrease `G_parent - rho_r G_r - rho_l G_l` of splitting
/// `parent` into `left` and `right`.
pub fn delta_gini<T: Ord>(parent: &[T], left: &[T], right: &[T]) -> Result<f64> {
    let mut joined = tally(left);
    for (k, v) in tally(right) {
        *joined.entry(k).or_insert(0) += v;
    }
    if parent.is_empty() || joined != tally(parent) {
        return Err(Error::InvalidInput("left and right do not partition the parent".into()));
    }
    let n = parent.len() as f64;
    let side = |s: &[T]| {
        if s.is_empty() {
            0.0
        } else {
            s.len() as f64 / n * gini_impurity(s).unwrap_or(0.0)
        }
    };
    Ok(gini_impurity(parent)? - side(left) - side(right))
}

/// `n` indices drawn uniformly with replacement.
pub fn bootstrap_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}
