//! Random-forest classifier: bootstrap-sampled Gini trees with a random
//! feature subset per split, majority voting, and impurity-decrease
//! importances.

mod gini;
mod tree;

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use gini::{bootstrap_indices, delta_gini, gini_from_counts, gini_impurity};
pub use tree::TreeNode;

use crate::error::{Error, Result};
use crate::features::FeatureTable;
use tree::{argmax, TreeBuilder};

pub const MODEL_FORMAT_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means `ceil(sqrt(m))`.
    pub p_features: Option<usize>,
    /// `None` grows trees until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            p_features: None,
            max_depth: None,
            min_leaf: 1,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn resolved_p(&self, m: usize) -> usize {
        self.p_features
            .unwrap_or_else(|| (m as f64).sqrt().ceil() as usize)
            .max(1)
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        if let Some(p) = self.p_features {
            if p == 0 || p > m {
                return Err(Error::Config(format!("p_features = {p} is outside 1..={m}")));
            }
        }
        Ok(())
    }

    /// Independent stream for tree `t`: the same tree comes out whatever the
    /// total tree count or build order.
    fn tree_rng(&self, t: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(t as u64);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: String,
    pub classes: Vec<String>,
    pub feature_names: Vec<String>,
    pub params: ForestParams,
    /// Mean size-weighted impurity decrease per feature, summing to 1.
    pub importances: Vec<f64>,
    /// Accuracy over rows that were out of bag for at least one tree.
    pub oob_accuracy: Option<f64>,
    pub trees: Vec<TreeNode>,
}

struct Grown {
    root: TreeNode,
    importance: Vec<f64>,
    oob_votes: Vec<(usize, usize)>,
}

fn check_matrix(x: &[Vec<f64>], width: usize) -> Result<()> {
    for (i, row) in x.iter().enumerate() {
        if row.len() != width {
            return Err(Error::InvalidInput(format!(
                "row {i} has {} values, expected {width}",
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("row {i}, column {j} is not finite")));
        }
    }
    Ok(())
}

impl ForestModel {
    /// Fits on rows `x` with string labels; classes are the sorted distinct
    /// labels.
    pub fn fit<S: AsRef<str>>(
        x: &[Vec<f64>],
        labels: &[S],
        feature_names: &[String],
        params: &ForestParams,
    ) -> Result<ForestModel> {
        let mut classes: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        classes.sort();
        classes.dedup();
        let y: Vec<usize> = labels
            .iter()
            .map(|l| classes.binary_search_by(|c| c.as_str().cmp(l.as_ref())).unwrap())
            .collect();
        Self::fit_indexed(x, &y, classes, feature_names, params)
    }

    pub fn fit_table(table: &FeatureTable, params: &ForestParams) -> Result<ForestModel> {
        Self::fit(&table.rows, table.require_labels()?, &table.columns, params)
    }

    /// Fits with labels given as indices into `classes`.
    pub fn fit_indexed(
        x: &[Vec<f64>],
        y: &[usize],
        classes: Vec<String>,
        feature_names: &[String],
        params: &ForestParams,
    ) -> Result<ForestModel> {
        let m = feature_names.len();
        if x.len() < 2 {
            return Err(Error::InvalidInput("need at least two training rows".into()));
        }
        if y.len() != x.len() {
            return Err(Error::InvalidInput("label count differs from row count".into()));
        }
        if m == 0 {
            return Err(Error::InvalidInput("no features to train on".into()));
        }
        check_matrix(x, m)?;
        if let Some(&bad) = y.iter().find(|&&c| c >= classes.len()) {
            return Err(Error::InvalidInput(format!("class index {bad} out of range")));
        }
        params.validate(m)?;
        let distinct = {
            let mut seen = vec![false; classes.len()];
            y.iter().for_each(|&c| seen[c] = true);
            seen.iter().filter(|&&s| s).count()
        };
        if distinct < 2 {
            log::warn!("training data has a single class; trees will be single leaves");
        }

        let p = params.resolved_p(m);
        let n = x.len();
        let grown: Vec<Grown> = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = params.tree_rng(t);
                let sample = bootstrap_indices(n, &mut rng);
                let mut in_bag = vec![false; n];
                sample.iter().for_each(|&i| in_bag[i] = true);
                let mut b = TreeBuilder {
                    x,
                    y,
                    n_classes: classes.len(),
                    p_features: p,
                    max_depth: params.max_depth,
                    min_leaf: params.min_leaf,
                    importance: vec![0.0; m],
                    n_root: n as f64,
                };
                let root = b.build(sample, 0, &mut rng);
                let oob_votes = (0..n)
                    .filter(|&i| !in_bag[i])
                    .map(|i| (i, root.vote(&x[i])))
                    .collect();
                Grown {
                    root,
                    importance: b.importance,
                    oob_votes,
                }
            })
            .collect();

        let mut importances = vec![0.0; m];
        let mut votes = vec![vec![0usize; classes.len()]; n];
        for g in &grown {
            for (acc, v) in importances.iter_mut().zip(&g.importance) {
                *acc += v / params.n_trees as f64;
            }
            for &(i, c) in &g.oob_votes {
                votes[i][c] += 1;
            }
        }
        let total: f64 = importances.iter().sum();
        if total > 0.0 {
            importances.iter_mut().for_each(|v| *v /= total);
        }
        let voted: Vec<usize> = (0..n).filter(|&i| votes[i].iter().any(|&v| v > 0)).collect();
        let oob_accuracy = (!voted.is_empty()).then(|| {
            voted.iter().filter(|&&i| argmax(&votes[i]) == y[i]).count() as f64 / voted.len() as f64
        });

        Ok(ForestModel {
            format_version: MODEL_FORMAT_VERSION.into(),
            classes,
            feature_names: feature_names.to_vec(),
            params: ForestParams {
                p_features: Some(p),
                ..params.clone()
            },
            importances,
            oob_accuracy,
            trees: grown.into_iter().map(|g| g.root).collect(),
        })
    }

    /// Vote fractions per class for rows already in model column order.
    pub fn predict_proba_rows(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        check_matrix(x, self.feature_names.len())?;
        let k = self.classes.len();
        let n_trees = self.trees.len() as f64;
        Ok(x
            .par_iter()
            .map(|row| {
                let mut votes = vec![0usize; k];
                for t in &self.trees {
                    votes[t.vote(row)] += 1;
                }
                votes.into_iter().map(|v| v as f64 / n_trees).collect()
            })
            .collect())
    }

    /// Class indices by majority vote; ties go to the lowest index.
    pub fn predict_rows(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        Ok(self.predict_proba_rows(x)?.iter().map(|p| argmax(p)).collect())
    }

    /// Columns of `table` reordered to the model's features.
    pub fn align(&self, table: &FeatureTable) -> Result<Vec<Vec<f64>>> {
        Ok(table.select(&self.feature_names)?.rows)
    }

    pub fn predict_proba(&self, table: &FeatureTable) -> Result<Vec<Vec<f64>>> {
        self.predict_proba_rows(&self.align(table)?)
    }

    pub fn predict(&self, table: &FeatureTable) -> Result<Vec<String>> {
        Ok(self
            .predict_rows(&self.align(table)?)?
            .into_iter()
            .map(|c| self.classes[c].clone())
            .collect())
    }

    pub fn importance_of(&self, feature: &str) -> Option<f64> {
        self.feature_names
            .iter()
            .position(|f| f == feature)
            .map(|j| self.importances[j])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_json()?.as_bytes())?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<ForestModel> {
        #[derive(Deserialize)]
        struct Header {
            format_version: String,
        }
        let header: Header = deep_parse(text)?;
        let major = header.format_version.split('.').next().unwrap_or("");
        let ours = MODEL_FORMAT_VERSION.split('.').next().unwrap();
        if major != ours {
            return Err(Error::ModelVersion(header.format_version));
        }
        let model: ForestModel = deep_parse(text)?;
        model.check()?;
        Ok(model)
    }

    pub fn load<R: Read>(mut r: R) -> Result<ForestModel> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<()> {
        let m = self.feature_names.len();
        let k = self.classes.len();
        let bad = |what: &str| Err(Error::InvalidInput(format!("model file: {what}")));
        if self.trees.is_empty() {
            return bad("no trees");
        }
        if self.importances.len() != m {
            return bad("importance count differs from feature count");
        }
        if !self.trees.iter().all(|t| t.check(m, k)) {
            return bad("tree refers to an unknown feature or class");
        }
        Ok(())
    }
}

/// Parses JSON without the default nesting limit; unpruned trees can be
/// deeper than it.
fn deep_parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    de.disable_recursion_limit();
    let v = T::deserialize(&mut de)?;
    de.end()?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_data() -> (Vec<Vec<f64>>, Vec<&'static str>) {
        let x: Vec<Vec<f64>> = (-10..10).map(|i| vec![i as f64 + 0.5]).collect();
        let y = x.iter().map(|r| if r[0] < 0.0 { "neg" } else { "pos" }).collect();
        (x, y)
    }

    fn small(n_trees: usize) -> ForestParams {
        ForestParams {
            n_trees,
            seed: 7,
            ..Default::default()
        }
    }

    #[test]
    fn separable_line() {
        let (x, y) = line_data();
        let m = ForestModel::fit(&x, &y, &["x".into()], &small(25)).unwrap();
        let pred = m.predict_rows(&x).unwrap();
        for (p, l) in pred.iter().zip(&y) {
            assert_eq!(m.classes[*p], *l);
        }
        assert!((m.importances[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let (x, y) = line_data();
        let m = ForestModel::fit(&x, &y, &["x".into()], &small(13)).unwrap();
        for p in m.predict_proba_rows(&x).unwrap() {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tree_streams_do_not_depend_on_tree_count() {
        let (x, y) = line_data();
        let a = ForestModel::fit(&x, &y, &["x".into()], &small(5)).unwrap();
        let b = ForestModel::fit(&x, &y, &["x".into()], &small(9)).unwrap();
        assert_eq!(a.trees[..], b.trees[..5]);
    }

    #[test]
    fn single_class_gives_leaves() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let m = ForestModel::fit(&x, &["a", "a", "a"], &["x".into()], &small(3)).unwrap();
        assert!(m.trees.iter().all(|t| matches!(t, TreeNode::Leaf { .. })));
        assert_eq!(m.importances, vec![0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        let names = vec!["x".to_string()];
        assert!(ForestModel::fit(&[vec![1.0]], &["a"], &names, &small(1)).is_err());
        assert!(ForestModel::fit(&[vec![1.0], vec![f64::NAN]], &["a", "b"], &names, &small(1)).is_err());
        let p = ForestParams {
            p_features: Some(3),
            ..small(1)
        };
        assert!(ForestModel::fit(&[vec![1.0], vec![2.0]], &["a", "b"], &names, &p).is_err());
    }

    #[test]
    fn json_roundtrip_and_version_check() {
        let (x, y) = line_data();
        let m = ForestModel::fit(&x, &y, &["x".into()], &small(4)).unwrap();
        let text = m.to_json().unwrap();
        assert_eq!(ForestModel::from_json(&text).unwrap(), m);
        let future = text.replace("\"format_version\": \"1.0\"", "\"format_version\": \"2.0\"");
        assert!(matches!(ForestModel::from_json(&future), Err(Error::ModelVersion(_))));
    }

    #[test]
    fn max_depth_limits_trees() {
        let (x, y) = line_data();
        let p = ForestParams {
            max_depth: Some(0),
            ..small(3)
        };
        let m = ForestModel::fit(&x, &y, &["x".into()], &p).unwrap();
        assert!(m.trees.iter().all(|t| t.depth() == 0));
    }
}
