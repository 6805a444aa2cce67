//! Run configuration read from TOML. Every key is optional; unknown keys
//! are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{SigmaRule, VectorizeConfig};
use crate::forest::ForestParams;
use crate::geo::{CoordMode, LabelMap};
use crate::persistence::{MaxScale, RipsConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features tried per split; default `ceil(sqrt(m))`.
    pub p_features: Option<usize>,
    /// Default unlimited.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        let p = ForestParams::default();
        ForestConfig {
            n_trees: p.n_trees,
            p_features: p.p_features,
            max_depth: p.max_depth,
            min_leaf: p.min_leaf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Points resampled along each outline.
    pub n_points: usize,
    pub curve_bins: usize,
    pub sigma_rule: SigmaRule,
    /// Filtration cap in meters; default is the cloud's largest pairwise
    /// distance.
    pub max_scale: Option<f64>,
    pub max_dim: usize,
    pub engine: String,
    pub correlation_threshold: f64,
    pub selected_k: usize,
    pub seed: u64,
    /// Overrides the inventory's declared coordinates; default geographic.
    pub coords: Option<CoordMode>,
    pub balance_classes: bool,
    pub folds: usize,
    pub repeats: usize,
    pub label_key: String,
    pub forest: ForestConfig,
    /// Extra raw-label to class/sub-type mappings.
    pub labels: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_points: 128,
            curve_bins: 100,
            sigma_rule: SigmaRule::default(),
            max_scale: None,
            max_dim: 1,
            engine: "clearing".into(),
            correlation_threshold: 0.9,
            selected_k: 6,
            seed: 0,
            coords: None,
            balance_classes: true,
            folds: 10,
            repeats: 10,
            label_key: "failure_type".into(),
            forest: ForestConfig::default(),
            labels: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(8..=65_536).contains(&self.n_points) {
            return bad(format!("n_points = {} is outside 8..=65536", self.n_points));
        }
        if !(2..=100_000).contains(&self.curve_bins) {
            return bad(format!("curve_bins = {} is outside 2..=100000", self.curve_bins));
        }
        if let Some(s) = self.max_scale {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("max_scale = {s} must be positive"));
            }
        }
        if !(1..=2).contains(&self.max_dim) {
            return bad(format!("max_dim = {} must be 1 or 2", self.max_dim));
        }
        if !(self.correlation_threshold > 0.0 && self.correlation_threshold <= 1.0) {
            return bad(format!(
                "correlation_threshold = {} is outside (0, 1]",
                self.correlation_threshold
            ));
        }
        if self.selected_k == 0 {
            return bad("selected_k must be at least 1".into());
        }
        if self.folds < 2 {
            return bad(format!("folds = {} must be at least 2", self.folds));
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if self.forest.n_trees == 0 || self.forest.min_leaf == 0 || self.forest.p_features == Some(0) {
            return bad("forest n_trees, min_leaf and p_features must be at least 1".into());
        }
        crate::persistence::EngineRegistry::default().get(&self.engine)?;
        self.label_map()?;
        Ok(())
    }

    pub fn forest_params(&self) -> ForestParams {
        ForestParams {
            n_trees: self.forest.n_trees,
            p_features: self.forest.p_features,
            max_depth: self.forest.max_depth,
            min_leaf: self.forest.min_leaf,
            seed: self.seed,
        }
    }

    pub fn vectorize(&self) -> VectorizeConfig {
        VectorizeConfig {
            curve_bins: self.curve_bins,
            sigma_rule: self.sigma_rule,
            ..Default::default()
        }
    }

    pub fn rips(&self) -> RipsConfig {
        RipsConfig {
            max_dim: self.max_dim,
            max_scale: self.max_scale.map_or(MaxScale::Auto, MaxScale::Fixed),
            oracle: false,
        }
    }

    pub fn label_map(&self) -> Result<LabelMap> {
        LabelMap::default().with_entries(&self.labels)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}
