//! Vectorization of persistence diagrams into named descriptors.
//!
//! Each descriptor family (entropy, average lifetime, Betti curve, ...) is a
//! [`Descriptor`] registered by its short name in a [`DescriptorRegistry`].
//! A family is evaluated once per homology dimension; the column name is
//! `<FAMILY>_C` for connected components (H0) and `<FAMILY>_H` for holes
//! (H1).

mod curves;
mod descriptors;
mod lifetimes;
mod table;

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use curves::{
    betti_at, betti_curve, betti_feature, discrete_l2, heat_feature, heat_surface, heat_value,
    image_feature, image_surface, image_value, landscape_at, landscape_curve, landscape_feature,
    CurveGrid,
};
pub use descriptors::{
    AverageLifetime, BettiNorm, BottleneckAmplitude, HeatKernelNorm, LandscapeNorm, PersistenceCount,
    PersistenceEntropy, PersistenceImageNorm, WassersteinAmplitude,
};
pub use lifetimes::{
    amplitude, lifetime_statistics, lifetime_vector, AmplitudeKind, LifetimeStats, LifetimeVector,
};
pub use table::{FeatureTable, FeatureVector};

use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;

/// Descriptors used by the classifier unless overridden.
pub const CANONICAL_SELECTED: [&str; 6] = ["AL_H", "AL_C", "BC_C", "BC_H", "WA_H", "BA_H"];

/// Homology dimensions that get descriptor columns, with their suffixes.
pub const DIM_SUFFIXES: [(usize, &str); 2] = [(0, "C"), (1, "H")];

/// Kernel bandwidth for the heat and image descriptors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaRule {
    /// `cap / divisor`, evaluated per diagram.
    CapFraction(f64),
    Fixed(f64),
}

impl Default for SigmaRule {
    fn default() -> Self {
        SigmaRule::CapFraction(20.0)
    }
}

impl SigmaRule {
    pub fn sigma(&self, cap: f64) -> f64 {
        match *self {
            SigmaRule::CapFraction(k) => cap / k,
            SigmaRule::Fixed(s) => s,
        }
    }
}

impl std::str::FromStr for SigmaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::Config(format!("sigma rule {s:?}: expected \"cap/<k>\" or meters"));
        let rule = match t.strip_prefix("cap/") {
            Some(k) => SigmaRule::CapFraction(k.trim().parse().map_err(|_| bad())?),
            None => SigmaRule::Fixed(t.parse().map_err(|_| bad())?),
        };
        let v = match rule {
            SigmaRule::CapFraction(k) | SigmaRule::Fixed(k) => k,
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(bad());
        }
        Ok(rule)
    }
}

impl std::fmt::Display for SigmaRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SigmaRule::CapFraction(k) => write!(f, "cap/{k}"),
            SigmaRule::Fixed(s) => write!(f, "{s}"),
        }
    }
}

impl Serialize for SigmaRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SigmaRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Discretization settings shared by all descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorizeConfig {
    /// Bins of the `[0, cap]` grid for curves, and per side for 2D kernels.
    pub curve_bins: usize,
    pub sigma_rule: SigmaRule,
    /// Landscape layer, counted from 1.
    pub landscape_layer: usize,
}

impl Default for VectorizeConfig {
    fn default() -> Self {
        VectorizeConfig {
            curve_bins: 100,
            sigma_rule: SigmaRule::default(),
            landscape_layer: 1,
        }
    }
}

/// One family of diagram descriptors.
pub trait Descriptor: Send + Sync {
    /// Short upper-case family name used in column names.
    fn family(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn evaluate(&self, diagram: &PersistenceDiagram, dim: usize, cfg: &VectorizeConfig) -> f64;
}

/// Descriptor families by name, in column order.
#[derive(Clone)]
pub struct DescriptorRegistry {
    entries: IndexMap<&'static str, Arc<dyn Descriptor>>,
}

impl Default for DescriptorRegistry {
    /// All nine families: PE, AL, NP, BC, LS, WA, BA, HK, PI.
    fn default() -> Self {
        let mut r = DescriptorRegistry::empty();
        r.register(Arc::new(PersistenceEntropy));
        r.register(Arc::new(AverageLifetime));
        r.register(Arc::new(PersistenceCount));
        r.register(Arc::new(BettiNorm));
        r.register(Arc::new(LandscapeNorm));
        r.register(Arc::new(WassersteinAmplitude));
        r.register(Arc::new(BottleneckAmplitude));
        r.register(Arc::new(HeatKernelNorm));
        r.register(Arc::new(PersistenceImageNorm));
        r
    }
}

impl DescriptorRegistry {
    pub fn empty() -> Self {
        DescriptorRegistry {
            entries: IndexMap::new(),
        }
    }

    /// Adds a family; a family with the same name is replaced in place.
    pub fn register(&mut self, d: Arc<dyn Descriptor>) {
        self.entries.insert(d.family(), d);
    }

    pub fn get(&self, family: &str) -> Option<&Arc<dyn Descriptor>> {
        self.entries.get(family)
    }

    pub fn families(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    /// Registry restricted to `families`, keeping the requested order.
    pub fn subset<S: AsRef<str>>(&self, families: &[S]) -> Result<Self> {
        let mut r = DescriptorRegistry::empty();
        for f in families {
            let d = self.get(f.as_ref()).ok_or_else(|| {
                Error::Config(format!(
                    "unknown descriptor family {:?}; available: {}",
                    f.as_ref(),
                    self.families().join(", ")
                ))
            })?;
            r.register(d.clone());
        }
        Ok(r)
    }

    /// Column names, family-major: `PE_C, PE_H, AL_C, ...`.
    pub fn column_names(&self) -> Vec<String> {
        self.entries
            .keys()
            .flat_map(|f| DIM_SUFFIXES.iter().map(move |(_, s)| format!("{f}_{s}")))
            .collect()
    }

    /// Evaluates every family on H0 and H1 of `diagram`.
    pub fn featurize(
        &self,
        id: &str,
        diagram: &PersistenceDiagram,
        cfg: &VectorizeConfig,
    ) -> FeatureVector {
        let mut values = Vec::with_capacity(self.entries.len() * DIM_SUFFIXES.len());
        for d in self.entries.values() {
            for (dim, _) in DIM_SUFFIXES {
                let v = d.evaluate(diagram, dim, cfg);
                values.push(if v.is_finite() { v } else { 0.0 });
            }
        }
        FeatureVector::new(id, self.column_names(), values)
    }
}

/// All eighteen topological descriptors of a diagram with default settings.
pub fn featurize(id: &str, diagram: &PersistenceDiagram, cfg: &VectorizeConfig) -> FeatureVector {
    DescriptorRegistry::default().featurize(id, diagram, cfg)
}
