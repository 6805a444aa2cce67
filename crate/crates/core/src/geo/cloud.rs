use super::{CoordMode, ElevationGrid, InventoryRecord};
use crate::error::{Error, Result};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Ordered 3D outline points in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud3D {
    pub points: Vec<[f64; 3]>,
    pub source_id: String,
}

impl PointCloud3D {
    pub fn new(source_id: impl Into<String>, points: Vec<[f64; 3]>) -> Self {
        PointCloud3D {
            points,
            source_id: source_id.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Local equirectangular projection around a reference point, or identity
/// for already-metric coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Identity,
    Equirectangular { lon0: f64, lat0: f64 },
}

impl Projection {
    pub fn for_ring(ring: &[[f64; 2]], coords: CoordMode) -> Self {
        match coords {
            CoordMode::Projected => Projection::Identity,
            CoordMode::Geographic => {
                let n = ring.len() as f64;
                let (sx, sy) = ring.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
                Projection::Equirectangular {
                    lon0: sx / n,
                    lat0: sy / n,
                }
            }
        }
    }

    pub fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        match *self {
            Projection::Identity => p,
            Projection::Equirectangular { lon0, lat0 } => [
                EARTH_RADIUS_M * (p[0] - lon0).to_radians() * lat0.to_radians().cos(),
                EARTH_RADIUS_M * (p[1] - lat0).to_radians(),
            ],
        }
    }

    pub fn inverse(&self, p: [f64; 2]) -> [f64; 2] {
        match *self {
            Projection::Identity => p,
            Projection::Equirectangular { lon0, lat0 } => [
                lon0 + (p[0] / (EARTH_RADIUS_M * lat0.to_radians().cos())).to_degrees(),
                lat0 + (p[1] / EARTH_RADIUS_M).to_degrees(),
            ],
        }
    }
}

/// Resamples a closed ring (first vertex repeated at the end) to `n`
/// points spaced uniformly by arc length, starting at the first vertex.
pub fn resample_ring(closed: &[[f64; 2]], n: usize) -> Result<Vec<[f64; 2]>> {
    let seg_len: Vec<f64> = closed
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
        .collect();
    let total: f64 = seg_len.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Geometry("ring has zero perimeter".into()));
    }
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    let mut seg_start = 0.0;
    for k in 0..n {
        let target = total * k as f64 / n as f64;
        while seg + 1 < seg_len.len() && seg_start + seg_len[seg] <= target {
            seg_start += seg_len[seg];
            seg += 1;
        }
        let t = if seg_len[seg] > 0.0 {
            ((target - seg_start) / seg_len[seg]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let a = closed[seg];
        let b = closed[seg + 1];
        out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
    }
    Ok(out)
}

/// Drapes a polygon outline on the grid: project to local meters, resample
/// to `n_points` by arc length, sample elevation, then translate so every
/// axis minimum is zero. No scaling is applied.
pub fn build_point_cloud(
    record: &InventoryRecord,
    grid: &ElevationGrid,
    n_points: usize,
    coords: CoordMode,
) -> Result<PointCloud3D> {
    if n_points < 8 {
        return Err(Error::InvalidInput(format!(
            "n_points must be at least 8, got {n_points}"
        )));
    }
    let ring = record.polygon.ring();
    let projection = Projection::for_ring(record.polygon.vertices(), coords);
    let metric: Vec<[f64; 2]> = ring.iter().map(|&p| projection.forward(p)).collect();
    let resampled = resample_ring(&metric, n_points)?;

    let mut points = Vec::with_capacity(n_points);
    for p in resampled {
        let g = projection.inverse(p);
        let z = grid.sample(g[0], g[1]).map_err(|e| match e {
            Error::OutsideGrid { .. } => Error::Geometry(format!(
                "polygon {} is not covered by the elevation grid",
                record.id
            )),
            other => other,
        })?;
        points.push([p[0], p[1], z]);
    }
    let mut min = [f64::INFINITY; 3];
    for p in &points {
        for axis in 0..3 {
            min[axis] = min[axis].min(p[axis]);
        }
    }
    for p in &mut points {
        for axis in 0..3 {
            p[axis] -= min[axis];
        }
    }
    Ok(PointCloud3D::new(record.id.clone(), points))
}
