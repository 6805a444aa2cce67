//! Inventory polygons, elevation rasters and draping of outlines into 3D.

mod cloud;
mod grid;
mod inventory;
mod shape;

pub use cloud::{build_point_cloud, resample_ring, PointCloud3D, Projection, EARTH_RADIUS_M};
pub use grid::{load_grid, ElevationGrid};
pub use inventory::{
    parse_inventory, write_inventory, InventoryRecord, LabelMap, ParsedInventory, Rejection,
    CANONICAL_CLASSES, SUB_TYPES,
};
pub use shape::{
    convex_hull, geometric_features, min_area_rect, perimeter, shoelace_area, GeometricFeatures,
    GEOMETRIC_NAMES,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How polygon coordinates should be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CoordMode {
    /// Longitude/latitude in degrees, projected locally to meters.
    #[default]
    Geographic,
    /// Already metric; used as-is.
    Projected,
}

impl std::str::FromStr for CoordMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "geographic" => Ok(CoordMode::Geographic),
            "projected" => Ok(CoordMode::Projected),
            other => Err(Error::Config(format!(
                "unknown coords mode {other:?} (expected projected|geographic)"
            ))),
        }
    }
}

/// A closed, simple polygon ring. The stored ring repeats the first vertex
/// at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoPolygon {
    ring: Vec<[f64; 2]>,
}

impl GeoPolygon {
    /// Validates and normalizes a ring. Returns the polygon and whether the
    /// ring had to be closed.
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<(Self, bool)> {
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Geometry("ring has non-finite coordinates".into()));
        }
        let mut open: Vec<[f64; 2]> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if open.last() != Some(&v) {
                open.push(v);
            }
        }
        let mut closed_input = false;
        if open.len() > 1 && open.first() == open.last() {
            open.pop();
            closed_input = true;
        }
        let mut distinct = open.clone();
        distinct.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        distinct.dedup();
        if distinct.len() < 3 {
            return Err(Error::Geometry(format!(
                "ring has {} distinct vertices, need at least 3",
                distinct.len()
            )));
        }
        if let Some((a, b)) = first_self_intersection(&open) {
            return Err(Error::Geometry(format!(
                "ring is self-intersecting (edges {a} and {b})"
            )));
        }
        let mut ring = open;
        ring.push(ring[0]);
        Ok((GeoPolygon { ring }, !closed_input))
    }

    /// Closed ring, first vertex repeated at the end.
    pub fn ring(&self) -> &[[f64; 2]] {
        &self.ring
    }

    /// Ring without the closing duplicate.
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.ring[..self.ring.len() - 1]
    }

    /// Mean of the distinct vertices.
    pub fn vertex_centroid(&self) -> [f64; 2] {
        let v = self.vertices();
        let n = v.len() as f64;
        let (sx, sy) = v.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
        [sx / n, sy / n]
    }

    pub fn translated(&self, dx: f64, dy: f64) -> GeoPolygon {
        GeoPolygon {
            ring: self.ring.iter().map(|p| [p[0] + dx, p[1] + dy]).collect(),
        }
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

pub(crate) fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// Edge `i` joins `open[i]` and `open[i + 1]` (wrapping). Returns the first
/// pair of non-adjacent edges that touch, or an adjacent pair that folds
/// back onto itself.
pub(crate) fn first_self_intersection(open: &[[f64; 2]]) -> Option<(usize, usize)> {
    let n = open.len();
    let edge = |i: usize| (open[i], open[(i + 1) % n]);
    for i in 0..n {
        let (a1, a2) = edge(i);
        // adjacent edge sharing a2: only a problem if it doubles back
        let (_, b2) = edge((i + 1) % n);
        if orient(a1, a2, b2) == 0.0 {
            let back = (a2[0] - a1[0]) * (b2[0] - a2[0]) + (a2[1] - a1[1]) * (b2[1] - a2[1]);
            if back < 0.0 && n > 3 {
                return Some((i, (i + 1) % n));
            }
        }
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (b1, b2) = edge(j);
            if segments_intersect(a1, a2, b1, b2) {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_ring_is_closed() {
        let (p, closed) = GeoPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!(closed);
        assert_eq!(p.ring().len(), 4);
        assert_eq!(p.ring()[0], p.ring()[3]);
    }

    #[test]
    fn closed_ring_is_kept() {
        let (p, closed) =
            GeoPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 0.0]]).unwrap();
        assert!(!closed);
        assert_eq!(p.vertices().len(), 3);
    }

    #[test]
    fn too_few_distinct_vertices() {
        let err = GeoPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]);
        assert!(err.is_err());
    }

    #[test]
    fn bowtie_is_rejected() {
        let err = GeoPolygon::new(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(err, Err(Error::Geometry(_))));
    }

    #[test]
    fn nan_is_rejected() {
        assert!(GeoPolygon::new(vec![[0.0, 0.0], [f64::NAN, 0.0], [1.0, 1.0]]).is_err());
    }

    #[test]
    fn concave_simple_ring_is_accepted() {
        let l = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 0.5],
            [0.5, 0.5],
            [0.5, 1.0],
            [0.0, 1.0],
        ];
        assert!(GeoPolygon::new(l).is_ok());
    }
}
