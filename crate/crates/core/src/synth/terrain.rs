use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::ElevationGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemKind {
    UniformSlope,
    Channelized,
    CliffTalus,
}

impl std::str::FromStr for DemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_slope" => Ok(DemKind::UniformSlope),
            "channelized" => Ok(DemKind::Channelized),
            "cliff_talus" => Ok(DemKind::CliffTalus),
            other => Err(Error::Config(format!(
                "unknown DEM kind {other:?} (expected uniform_slope|channelized|cliff_talus)"
            ))),
        }
    }
}

/// Surface parameters in a frame centred on the tile, `v` pointing upslope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainParams {
    pub slope_deg: f64,
    /// Slope above the break for `cliff_talus`.
    pub cliff_deg: f64,
    /// `v` of the cliff foot.
    pub break_v: f64,
    /// Channel centre is `amplitude * sin(2 pi (v0 - v) / wavelength)`.
    pub channel_amplitude: f64,
    pub channel_wavelength: f64,
    pub channel_v0: f64,
    pub channel_depth: f64,
    pub channel_halfwidth: f64,
    pub base: f64,
}

impl Default for TerrainParams {
    fn default() -> Self {
        TerrainParams {
            slope_deg: 20.0,
            cliff_deg: 60.0,
            break_v: 0.0,
            channel_amplitude: 0.0,
            channel_wavelength: 200.0,
            channel_v0: 0.0,
            channel_depth: 10.0,
            channel_halfwidth: 20.0,
            base: 1000.0,
        }
    }
}

impl TerrainParams {
    pub fn channel_centre(&self, v: f64) -> f64 {
        if self.channel_wavelength <= 0.0 {
            return 0.0;
        }
        self.channel_amplitude
            * (std::f64::consts::TAU * (self.channel_v0 - v) / self.channel_wavelength).sin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terrain {
    pub kind: DemKind,
    pub params: TerrainParams,
}

impl Terrain {
    /// Elevation at tile-centred `(u, v)`.
    pub fn elevation(&self, u: f64, v: f64) -> f64 {
        let p = &self.params;
        let t = p.slope_deg.to_radians().tan();
        match self.kind {
            DemKind::UniformSlope => p.base + t * v,
            DemKind::Channelized => {
                let d = (u - p.channel_centre(v)) / p.channel_halfwidth.max(1e-9);
                p.base + t * v - p.channel_depth * (-d * d).exp()
            }
            DemKind::CliffTalus => {
                let c = p.cliff_deg.to_radians().tan();
                p.base + t * v.min(p.break_v) + c * (v - p.break_v).max(0.0)
            }
        }
    }
}

/// Grid of `n_cols x n_rows` cells centred on the origin.
pub fn gen_dem(
    kind: DemKind,
    n_cols: usize,
    n_rows: usize,
    cell_size: f64,
    params: &TerrainParams,
) -> Result<ElevationGrid> {
    let terrain = Terrain {
        kind,
        params: params.clone(),
    };
    let ox = -(n_cols as f64) * cell_size / 2.0;
    let oy = -(n_rows as f64) * cell_size / 2.0;
    let mut values = Vec::with_capacity(n_cols * n_rows);
    for row in 0..n_rows {
        let y = oy + (n_rows - row) as f64 * cell_size - cell_size / 2.0;
        for col in 0..n_cols {
            let x = ox + (col as f64 + 0.5) * cell_size;
            values.push(terrain.elevation(x, y));
        }
    }
    ElevationGrid::new(n_cols, n_rows, ox, oy, cell_size, -9999.0, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_and_unit_slope() {
        let flat = TerrainParams {
            slope_deg: 0.0,
            ..Default::default()
        };
        let g = gen_dem(DemKind::UniformSlope, 10, 10, 1.0, &flat).unwrap();
        assert!(g.values.iter().all(|&v| v == g.values[0]));
        let steep = TerrainParams {
            slope_deg: 45.0,
            ..Default::default()
        };
        let g = gen_dem(DemKind::UniformSlope, 10, 10, 1.0, &steep).unwrap();
        for row in 1..10 {
            assert!((g.at(3, row - 1) - g.at(3, row) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cliff_is_steeper_above_the_break() {
        let p = TerrainParams {
            slope_deg: 8.0,
            cliff_deg: 60.0,
            ..Default::default()
        };
        let g = gen_dem(DemKind::CliffTalus, 40, 40, 5.0, &p).unwrap();
        let max_grad = |rows: std::ops::Range<usize>| {
            rows.map(|r| (g.at(0, r) - g.at(0, r + 1)).abs() / 5.0).fold(0.0, f64::max)
        };
        // rows are stored top first: the upper half is rows 0..20
        assert!(max_grad(0..19) > 3.0 * max_grad(20..39));
    }

    #[test]
    fn channel_is_incised() {
        let p = TerrainParams {
            slope_deg: 0.0,
            channel_depth: 5.0,
            ..Default::default()
        };
        let t = Terrain {
            kind: DemKind::Channelized,
            params: p,
        };
        assert!((t.elevation(0.0, 0.0) - 995.0).abs() < 1e-9);
        assert!(t.elevation(100.0, 0.0) > 999.9);
    }
}
