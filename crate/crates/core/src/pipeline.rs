//! Inventory + DEM to feature table: drape, persistence, descriptors and
//! optional 2D shape features, one record at a time in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::features::{DescriptorRegistry, FeatureTable, FeatureVector, VectorizeConfig};
use crate::geo::{
    build_point_cloud, geometric_features, CoordMode, ElevationGrid, GeoPolygon, GeometricFeatures,
    InventoryRecord, Projection, GEOMETRIC_NAMES,
};
use crate::persistence::{EngineRegistry, MaxScale, PersistenceDiagram, PersistenceEngine, RipsConfig};

/// Which label becomes the table's `label` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelLevel {
    #[default]
    Class,
    /// Sub-type where known, otherwise the class.
    SubType,
}

#[derive(Clone)]
pub struct FeaturizeOptions {
    pub n_points: usize,
    pub coords: CoordMode,
    pub rips: RipsConfig,
    pub vectorize: VectorizeConfig,
    pub engine: String,
    pub descriptors: DescriptorRegistry,
    pub with_geometry: bool,
    pub label_level: LabelLevel,
}

impl Default for FeaturizeOptions {
    fn default() -> Self {
        FeaturizeOptions {
            n_points: 128,
            coords: CoordMode::default(),
            rips: RipsConfig::default(),
            vectorize: VectorizeConfig::default(),
            engine: "clearing".into(),
            descriptors: DescriptorRegistry::default(),
            with_geometry: false,
            label_level: LabelLevel::Class,
        }
    }
}

impl FeaturizeOptions {
    /// Options from a run config; `declared` is the inventory's own
    /// coordinate declaration, used when the config does not set one.
    pub fn from_config(cfg: &RunConfig, declared: Option<CoordMode>) -> Self {
        FeaturizeOptions {
            n_points: cfg.n_points,
            coords: cfg.coords.or(declared).unwrap_or_default(),
            rips: cfg.rips(),
            vectorize: cfg.vectorize(),
            engine: cfg.engine.clone(),
            ..Default::default()
        }
    }

    pub fn columns(&self) -> Vec<String> {
        let mut c = self.descriptors.column_names();
        if self.with_geometry {
            c.extend(GEOMETRIC_NAMES.iter().map(|s| s.to_string()));
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRecord {
    pub id: String,
    pub reason: String,
}

/// Sidecar describing how a feature table was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub n_points: usize,
    pub curve_bins: usize,
    pub sigma_rule: String,
    pub cap_rule: String,
    pub max_dim: usize,
    pub engine: String,
    pub coords: CoordMode,
    pub with_geometry: bool,
    pub columns: Vec<String>,
    pub records: usize,
    pub failed: Vec<FailedRecord>,
}

pub struct Featurized {
    pub table: FeatureTable,
    pub diagrams: Vec<PersistenceDiagram>,
    pub meta: FeatureMeta,
}

/// Shape features in meters; geographic rings are projected first.
pub fn geometry_of(record: &InventoryRecord, coords: CoordMode) -> Result<GeometricFeatures> {
    let projection = Projection::for_ring(record.polygon.vertices(), coords);
    let metric: Vec<[f64; 2]> = record.polygon.vertices().iter().map(|&p| projection.forward(p)).collect();
    geometric_features(&GeoPolygon::new(metric)?.0)
}

fn label_of(record: &InventoryRecord, level: LabelLevel) -> Option<String> {
    match level {
        LabelLevel::Class => record.label.clone(),
        LabelLevel::SubType => record.sublabel.clone().or_else(|| record.label.clone()),
    }
}

/// Descriptor vector (and diagram) of one record.
pub fn featurize_record(
    record: &InventoryRecord,
    grid: &ElevationGrid,
    opts: &FeaturizeOptions,
    engine: &dyn PersistenceEngine,
) -> Result<(FeatureVector, PersistenceDiagram)> {
    let cloud = build_point_cloud(record, grid, opts.n_points, opts.coords)?;
    let diagram = engine.compute(&cloud, &opts.rips)?;
    let mut fv = opts.descriptors.featurize(&record.id, &diagram, &opts.vectorize);
    if opts.with_geometry {
        let g = geometry_of(record, opts.coords)?;
        fv.extend(GEOMETRIC_NAMES, &g.values());
    }
    Ok((fv, diagram))
}

/// Featurizes every record; failures are logged and listed in the metadata
/// rather than aborting the batch.
pub fn featurize_inventory(
    records: &[InventoryRecord],
    grid: &ElevationGrid,
    opts: &FeaturizeOptions,
) -> Result<Featurized> {
    let engine = EngineRegistry::default().get(&opts.engine)?;
    let results: Vec<Result<(FeatureVector, PersistenceDiagram)>> = records
        .par_iter()
        .map(|r| featurize_record(r, grid, opts, engine.as_ref()))
        .collect();

    let mut vectors = Vec::new();
    let mut diagrams = Vec::new();
    let mut labels = Vec::new();
    let mut failed = Vec::new();
    for (r, res) in records.iter().zip(results) {
        match res {
            Ok((fv, d)) => {
                vectors.push(fv);
                diagrams.push(d);
                labels.push(label_of(r, opts.label_level));
            }
            Err(e) => {
                log::warn!("record {}: {e}", r.id);
                failed.push(FailedRecord {
                    id: r.id.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    let labels = if !labels.is_empty() && labels.iter().all(Option::is_some) {
        Some(labels.into_iter().map(Option::unwrap).collect())
    } else {
        if labels.iter().any(Option::is_some) {
            log::warn!("some records are unlabeled; the table has no label column");
        }
        None
    };
    let mut table = FeatureTable::from_vectors(&vectors, labels)?;
    if table.columns.is_empty() {
        table.columns = opts.columns();
    }
    let meta = FeatureMeta {
        n_points: opts.n_points,
        curve_bins: opts.vectorize.curve_bins,
        sigma_rule: opts.vectorize.sigma_rule.to_string(),
        cap_rule: match opts.rips.max_scale {
            MaxScale::Auto => "max_pairwise_distance".into(),
            MaxScale::Fixed(s) => format!("fixed:{s}"),
        },
        max_dim: opts.rips.max_dim,
        engine: opts.engine.clone(),
        coords: opts.coords,
        with_geometry: opts.with_geometry,
        columns: table.columns.clone(),
        records: table.len(),
        failed,
    };
    Ok(Featurized {
        table,
        diagrams,
        meta,
    })
}

/// Checks that a table carries every feature a model needs, naming the
/// first one missing.
pub fn require_columns(table: &FeatureTable, needed: &[String]) -> Result<()> {
    match needed.iter().find(|n| table.column_index(n).is_none()) {
        Some(n) => Err(Error::ModelMismatch(format!("feature {n:?} is missing from the input"))),
        None => Ok(()),
    }
}
