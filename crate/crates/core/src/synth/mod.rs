//! Labeled synthetic inventories: polygons of four failure archetypes, each
//! on a tile of a shared elevation mosaic shaped to match it.

mod shapes;
mod terrain;

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub use shapes::{centerline_sinuosity, gen_polygon, SynthClass, SynthParams, SynthShape, REJECTION_BUDGET};
pub use terrain::{gen_dem, DemKind, Terrain, TerrainParams};

use crate::error::{Error, Result};
use crate::eval::seeded_rng;
use crate::geo::{ElevationGrid, InventoryRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub n_per_class: usize,
    pub seed: u64,
    pub classes: Vec<SynthClass>,
    /// Side of the square tile each record occupies.
    pub tile_size: f64,
    pub cell_size: f64,
    /// Per-class terrain overrides.
    pub dem_kinds: BTreeMap<SynthClass, DemKind>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            n_per_class: 100,
            seed: 0,
            classes: SynthClass::ALL.to_vec(),
            tile_size: 640.0,
            cell_size: 10.0,
            dem_kinds: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub class: SynthClass,
    /// `[column, row]` of the tile, counted from the lower left.
    pub tile: [usize; 2],
    pub seed: u64,
    pub params: SynthParams,
    pub terrain: Terrain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub options: SynthOptions,
    pub grid_cols: usize,
    pub grid_rows: usize,
    pub records: Vec<ManifestEntry>,
}

#[derive(Debug, Clone)]
pub struct SynthInventory {
    pub records: Vec<InventoryRecord>,
    pub grid: ElevationGrid,
    pub manifest: Manifest,
}

/// Parameter draw of one record from its own seed.
pub fn draw_params(class: SynthClass, seed: u64) -> SynthParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = |lo: f64, hi: f64| rng.gen_range(lo..hi);
    let base = SynthParams::archetype(class);
    match class {
        SynthClass::Slide => SynthParams {
            size_scale: u(120.0, 260.0),
            aspect: u(1.3, 1.8),
            slope_deg: u(15.0, 30.0),
            noise: u(0.5, 3.0),
            seed,
            ..base
        },
        SynthClass::Flow => SynthParams {
            size_scale: u(250.0, 450.0),
            aspect: u(7.0, 11.0),
            sinuosity: u(0.06, 0.16),
            waves: u(1.0, 2.0),
            slope_deg: u(20.0, 35.0),
            noise: u(0.5, 2.0),
            seed,
            ..base
        },
        SynthClass::Fall => SynthParams {
            size_scale: u(100.0, 220.0),
            aspect: u(1.7, 2.3),
            slope_deg: u(4.0, 12.0),
            cliff_deg: u(45.0, 60.0),
            noise: u(0.5, 3.0),
            seed,
            ..base
        },
        SynthClass::Complex => SynthParams {
            size_scale: u(320.0, 500.0),
            aspect: u(6.0, 9.0),
            sinuosity: u(0.04, 0.12),
            waves: u(0.5, 1.5),
            slope_deg: u(15.0, 30.0),
            noise: u(0.5, 2.0),
            seed,
            ..base
        },
    }
}

/// Seed of record `index` of `class` under `master`.
pub fn record_seed(master: u64, class: SynthClass, index: usize) -> u64 {
    seeded_rng(master, (class as u64) << 32 | index as u64).next_u64()
}

fn fits(shape: &SynthShape, half: f64) -> bool {
    shape.polygon.vertices().iter().all(|p| p[0].abs() < half && p[1].abs() < half)
}

/// `n_per_class` records per class, class-major, each centred in its own
/// tile of one elevation mosaic in projected meters.
pub fn gen_inventory(opts: &SynthOptions) -> Result<SynthInventory> {
    if opts.n_per_class == 0 {
        return Err(Error::Config("n_per_class must be at least 1".into()));
    }
    if opts.classes.is_empty() {
        return Err(Error::Config("no classes to generate".into()));
    }
    let cells_per_tile = (opts.tile_size / opts.cell_size).round() as usize;
    if !(opts.cell_size > 0.0) || cells_per_tile < 4 {
        return Err(Error::Config("tile must span at least 4 cells".into()));
    }
    let tile = cells_per_tile as f64 * opts.cell_size;
    let jobs: Vec<(SynthClass, usize)> = opts
        .classes
        .iter()
        .flat_map(|&c| (0..opts.n_per_class).map(move |i| (c, i)))
        .collect();
    let n = jobs.len();
    let tiles_x = (n as f64).sqrt().ceil() as usize;
    let tiles_y = n.div_ceil(tiles_x);
    let margin = tile / 2.0 - 2.0 * opts.cell_size;

    let built: Vec<(InventoryRecord, ManifestEntry)> = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(class, i))| {
            let seed = record_seed(opts.seed, class, i);
            let params = draw_params(class, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            let shape = gen_polygon(&params, &mut rng)?;
            let id = format!("{}_{i:04}", class.name());
            if !fits(&shape, margin) {
                return Err(Error::Geometry(format!("{id} does not fit its {tile} m tile")));
            }
            let kind = opts.dem_kinds.get(&class).copied().unwrap_or(class.default_dem());
            let terrain = params.terrain(kind);
            let cell = [k % tiles_x, k / tiles_x];
            let cx = (cell[0] as f64 + 0.5) * tile;
            let cy = (cell[1] as f64 + 0.5) * tile;
            let mut properties = Map::new();
            properties.insert("failure_type".into(), Value::String(class.name().into()));
            properties.insert("dem_kind".into(), serde_json::to_value(kind)?);
            properties.insert(
                "behaviour".into(),
                Value::String(if class == SynthClass::Complex { "slide_flow" } else { class.name() }.into()),
            );
            let record = InventoryRecord {
                id: id.clone(),
                polygon: shape.polygon.translated(cx, cy),
                label: Some(class.name().into()),
                sublabel: None,
                properties,
            };
            let entry = ManifestEntry {
                id,
                class,
                tile: cell,
                seed,
                params,
                terrain,
            };
            Ok((record, entry))
        })
        .collect::<Result<_>>()?;

    let n_cols = tiles_x * cells_per_tile;
    let n_rows = tiles_y * cells_per_tile;
    let terrains: Vec<&Terrain> = built.iter().map(|(_, e)| &e.terrain).collect();
    let values: Vec<f64> = (0..n_rows)
        .into_par_iter()
        .flat_map_iter(|row| {
            let y = (n_rows - row) as f64 * opts.cell_size - opts.cell_size / 2.0;
            let ty = row_tile(n_rows - 1 - row, cells_per_tile);
            let terrains = &terrains;
            (0..n_cols).map(move |col| {
                let x = (col as f64 + 0.5) * opts.cell_size;
                let tx = col / cells_per_tile;
                let k = ty * tiles_x + tx;
                match terrains.get(k) {
                    Some(t) => t.elevation(x - (tx as f64 + 0.5) * tile, y - (ty as f64 + 0.5) * tile),
                    None => 0.0,
                }
            })
        })
        .collect();
    let grid = ElevationGrid::new(n_cols, n_rows, 0.0, 0.0, opts.cell_size, -9999.0, values)?;
    let (records, entries): (Vec<_>, Vec<_>) = built.into_iter().unzip();
    Ok(SynthInventory {
        records,
        grid,
        manifest: Manifest {
            options: opts.clone(),
            grid_cols: n_cols,
            grid_rows: n_rows,
            records: entries,
        },
    })
}

fn row_tile(row_from_bottom: usize, cells_per_tile: usize) -> usize {
    row_from_bottom / cells_per_tile
}
