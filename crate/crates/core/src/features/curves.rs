//! One-dimensional curves over the filtration axis (Betti curve, persistence
//! landscape) and two-dimensional kernels (heat kernel, persistence image),
//! each reduced to a scalar by a discrete 2-norm.

use std::f64::consts::PI;

use crate::persistence::{PersistenceDiagram, PersistencePair};

/// Uniform sampling of `[lo, hi]` at bin centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveGrid {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl CurveGrid {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        CurveGrid { lo, hi, bins }
    }

    /// `[0, cap]` with `bins` bins.
    pub fn for_diagram(diagram: &PersistenceDiagram, bins: usize) -> Self {
        CurveGrid::new(0.0, diagram.cap, bins)
    }

    /// Degenerate grids (`lo >= hi` or fewer than two bins) carry no area.
    pub fn is_degenerate(&self) -> bool {
        !(self.hi > self.lo) || self.bins < 2
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        let w = self.width();
        (0..self.bins).map(move |j| self.lo + (j as f64 + 0.5) * w)
    }
}

/// Number of pairs with `birth < eps < death`.
pub fn betti_at(pairs: &[PersistencePair], eps: f64) -> usize {
    pairs.iter().filter(|p| p.birth < eps && eps < p.death).count()
}

fn tent(p: &PersistencePair, eps: f64) -> f64 {
    (eps - p.birth).min(p.death - eps).max(0.0)
}

/// `k`-th largest tent value at `eps` (`k` counts from 1).
pub fn landscape_at(pairs: &[PersistencePair], k: usize, eps: f64) -> f64 {
    if k == 0 || k > pairs.len() {
        return 0.0;
    }
    let mut values: Vec<f64> = pairs.iter().map(|p| tent(p, eps)).collect();
    values.sort_unstable_by(|a, b| b.total_cmp(a));
    values[k - 1]
}

fn pairs_of(diagram: &PersistenceDiagram, dim: usize) -> Vec<PersistencePair> {
    diagram.dim(dim).copied().collect()
}

pub fn betti_curve(diagram: &PersistenceDiagram, dim: usize, grid: &CurveGrid) -> Vec<f64> {
    let pairs = pairs_of(diagram, dim);
    grid.centers().map(|e| betti_at(&pairs, e) as f64).collect()
}

pub fn landscape_curve(
    diagram: &PersistenceDiagram,
    dim: usize,
    k: usize,
    grid: &CurveGrid,
) -> Vec<f64> {
    let pairs = pairs_of(diagram, dim);
    grid.centers().map(|e| landscape_at(&pairs, k, e)).collect()
}

/// `sqrt(sum_j v_j^2 * cell)`.
pub fn discrete_l2(values: &[f64], cell: f64) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() * cell).sqrt()
}

pub fn betti_feature(diagram: &PersistenceDiagram, dim: usize, grid: &CurveGrid) -> f64 {
    if grid.is_degenerate() {
        return 0.0;
    }
    discrete_l2(&betti_curve(diagram, dim, grid), grid.width())
}

pub fn landscape_feature(
    diagram: &PersistenceDiagram,
    dim: usize,
    k: usize,
    grid: &CurveGrid,
) -> f64 {
    if grid.is_degenerate() {
        return 0.0;
    }
    discrete_l2(&landscape_curve(diagram, dim, k, grid), grid.width())
}

fn gaussian(dx: f64, dy: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    (-(dx * dx + dy * dy) / (2.0 * s2)).exp() / (2.0 * PI * s2)
}

/// Heat-kernel function at `(x, y)`: a Gaussian at each `(birth, death)`
/// minus one at its mirror `(death, birth)`.
pub fn heat_value(pairs: &[PersistencePair], sigma: f64, x: f64, y: f64) -> f64 {
    pairs
        .iter()
        .map(|p| gaussian(x - p.birth, y - p.death, sigma) - gaussian(x - p.death, y - p.birth, sigma))
        .sum()
}

/// Persistence-image density at `(birth, persistence) = (x, y)`, each
/// Gaussian weighted by its lifetime over the largest lifetime.
pub fn image_value(pairs: &[PersistencePair], sigma: f64, x: f64, y: f64) -> f64 {
    let max_l = pairs.iter().map(|p| p.lifetime()).fold(0.0, f64::max);
    if max_l <= 0.0 {
        return 0.0;
    }
    pairs
        .iter()
        .map(|p| {
            let l = p.lifetime();
            (l / max_l) * gaussian(x - p.birth, y - l, sigma)
        })
        .sum()
}

/// Samples `f` at the cell centres of a `res x res` grid on `[0, side]^2`,
/// row-major with `y` as the slow axis.
fn sample_square(side: f64, res: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let h = side / res as f64;
    let mut out = Vec::with_capacity(res * res);
    for iy in 0..res {
        let y = (iy as f64 + 0.5) * h;
        for ix in 0..res {
            let x = (ix as f64 + 0.5) * h;
            out.push(f(x, y));
        }
    }
    out
}

pub fn heat_surface(diagram: &PersistenceDiagram, dim: usize, sigma: f64, res: usize) -> Vec<f64> {
    let pairs = pairs_of(diagram, dim);
    sample_square(diagram.cap, res, |x, y| heat_value(&pairs, sigma, x, y))
}

pub fn image_surface(diagram: &PersistenceDiagram, dim: usize, sigma: f64, res: usize) -> Vec<f64> {
    let pairs = pairs_of(diagram, dim);
    sample_square(diagram.cap, res, |x, y| image_value(&pairs, sigma, x, y))
}

fn surface_norm(diagram: &PersistenceDiagram, res: usize, surface: Vec<f64>) -> f64 {
    let h = diagram.cap / res as f64;
    discrete_l2(&surface, h * h)
}

pub fn heat_feature(diagram: &PersistenceDiagram, dim: usize, sigma: f64, res: usize) -> f64 {
    if !(sigma > 0.0) || !(diagram.cap > 0.0) || res == 0 || diagram.count(dim) == 0 {
        return 0.0;
    }
    let s = heat_surface(diagram, dim, sigma, res);
    surface_norm(diagram, res, s)
}

pub fn image_feature(diagram: &PersistenceDiagram, dim: usize, sigma: f64, res: usize) -> f64 {
    if !(sigma > 0.0) || !(diagram.cap > 0.0) || res == 0 || diagram.count(dim) == 0 {
        return 0.0;
    }
    let s = image_surface(diagram, dim, sigma, res);
    surface_norm(diagram, res, s)
}
