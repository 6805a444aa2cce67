use super::GeoPolygon;
use crate::error::{Error, Result};

/// Column names of the geometric baseline, in output order.
pub const GEOMETRIC_NAMES: [&str; 8] = [
    "A",
    "P",
    "A_over_P",
    "convexity",
    "ellipticity",
    "semi_major",
    "minor",
    "bbox_width",
];

/// 2D shape descriptors of a polygon in metric coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricFeatures {
    pub area: f64,
    pub perimeter: f64,
    pub area_over_perimeter: f64,
    pub convexity: f64,
    pub ellipticity: f64,
    pub semi_major: f64,
    pub minor: f64,
    pub bbox_width: f64,
}

impl GeometricFeatures {
    /// Values in [`GEOMETRIC_NAMES`] order.
    pub fn values(&self) -> [f64; 8] {
        [
            self.area,
            self.perimeter,
            self.area_over_perimeter,
            self.convexity,
            self.ellipticity,
            self.semi_major,
            self.minor,
            self.bbox_width,
        ]
    }
}

/// Unsigned shoelace area of an open or closed ring.
pub fn shoelace_area(ring: &[[f64; 2]]) -> f64 {
    let n = ring.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        s += a[0] * b[1] - b[0] * a[1];
    }
    (s / 2.0).abs()
}

/// Perimeter of a closed ring (first vertex repeated at the end).
pub fn perimeter(closed: &[[f64; 2]]) -> f64 {
    closed
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
        .sum()
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull by monotone chain, counter-clockwise, collinear points removed.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let chain = |iter: &mut dyn Iterator<Item = &[f64; 2]>| {
        let mut out: Vec<[f64; 2]> = Vec::new();
        for &p in iter {
            while out.len() >= 2 && cross(out[out.len() - 2], out[out.len() - 1], p) <= 0.0 {
                out.pop();
            }
            out.push(p);
        }
        out.pop();
        out
    };
    let mut hull = chain(&mut pts.iter());
    hull.extend(chain(&mut pts.iter().rev()));
    hull
}

/// Minimum-area enclosing rectangle of a point set: `(long side, short side)`.
/// One side of the optimal rectangle is collinear with a hull edge.
pub fn min_area_rect(points: &[[f64; 2]]) -> (f64, f64) {
    let hull = convex_hull(points);
    let n = hull.len();
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        if len == 0.0 {
            continue;
        }
        let u = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        let v = [-u[1], u[0]];
        let (mut umin, mut umax, mut vmin, mut vmax) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &hull {
            let pu = p[0] * u[0] + p[1] * u[1];
            let pv = p[0] * v[0] + p[1] * v[1];
            umin = umin.min(pu);
            umax = umax.max(pu);
            vmin = vmin.min(pv);
            vmax = vmax.max(pv);
        }
        let (w, h) = (umax - umin, vmax - vmin);
        let area = w * h;
        if best.is_none_or(|(ba, _, _)| area < ba) {
            best = Some((area, w.max(h), w.min(h)));
        }
    }
    best.map(|(_, l, s)| (l, s)).unwrap_or((0.0, 0.0))
}

/// Area, perimeter, compactness and bounding-rectangle descriptors of a
/// polygon already in metric coordinates.
pub fn geometric_features(polygon: &GeoPolygon) -> Result<GeometricFeatures> {
    let area = shoelace_area(polygon.vertices());
    if !(area > 0.0) {
        return Err(Error::Geometry("polygon has zero area".into()));
    }
    let perimeter = perimeter(polygon.ring());
    let hull_area = shoelace_area(&convex_hull(polygon.vertices()));
    let (long, short) = min_area_rect(polygon.vertices());
    let semi_major = long / 2.0;
    let minor = short / 2.0;
    Ok(GeometricFeatures {
        area,
        perimeter,
        area_over_perimeter: area / perimeter,
        convexity: (area / hull_area).min(1.0),
        ellipticity: minor / semi_major,
        semi_major,
        minor,
        bbox_width: short,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(v: Vec<[f64; 2]>) -> GeoPolygon {
        GeoPolygon::new(v).unwrap().0
    }

    #[test]
    fn unit_square() {
        let g = geometric_features(&poly(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
            .unwrap();
        assert!((g.area - 1.0).abs() < 1e-12);
        assert!((g.perimeter - 4.0).abs() < 1e-12);
        assert!((g.area_over_perimeter - 0.25).abs() < 1e-12);
        assert_eq!(g.convexity, 1.0);
        assert!((g.bbox_width - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rectangle_axes() {
        let g = geometric_features(&poly(vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]]))
            .unwrap();
        assert!((g.semi_major - 1.0).abs() < 1e-12);
        assert!((g.minor - 0.5).abs() < 1e-12);
        assert!((g.bbox_width - 1.0).abs() < 1e-12);
        assert!((g.ellipticity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn l_shape_convexity() {
        let l = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 0.5],
            [0.5, 0.5],
            [0.5, 1.0],
            [0.0, 1.0],
        ];
        let g = geometric_features(&poly(l)).unwrap();
        // area 3/4; hull cuts the missing corner diagonally: 1 - 1/8 = 7/8
        assert!((g.area - 0.75).abs() < 1e-12);
        assert!((g.convexity - 0.75 / 0.875).abs() < 1e-12);
    }

    #[test]
    fn rotated_rectangle_is_found() {
        let t: f64 = 0.4;
        let (c, s) = (t.cos(), t.sin());
        let rect: Vec<[f64; 2]> = [[0.0, 0.0], [4.0, 0.0], [4.0, 1.0], [0.0, 1.0]]
            .iter()
            .map(|p| [c * p[0] - s * p[1] + 10.0, s * p[0] + c * p[1] - 3.0])
            .collect();
        let g = geometric_features(&poly(rect)).unwrap();
        assert!((g.semi_major - 2.0).abs() < 1e-9);
        assert!((g.bbox_width - 1.0).abs() < 1e-9);
        assert!((g.convexity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hull_drops_collinear_and_interior() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 2.0], [1.0, 1.0], [0.0, 2.0]];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!((shoelace_area(&h) - 4.0).abs() < 1e-12);
    }
}
