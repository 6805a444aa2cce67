//! Optimized Rips persistence.
//!
//! H0 comes from Kruskal-style union-find over edges in filtration order.
//! Higher dimensions are computed by reducing the coboundary matrix, the
//! anti-transpose of the boundary matrix, which yields the same pairs. The
//! columns of dimension `d` are the `d`-simplices in reverse filtration
//! order; a column is skipped outright ("cleared") when its simplex was the
//! pivot of a reduced column one dimension lower, because such a column is
//! known to reduce to zero. For `d = 1` the cleared edges are exactly the
//! component-merging edges found by union-find.

use std::collections::{HashMap, HashSet};

use super::simplex::{decode, diameter, distance_matrix, encode, for_each_subset, Simplex};
use super::union_find::DisjointSet;
use super::{DiagramBuilder, PersistenceDiagram, PersistenceEngine, RipsConfig};
use crate::error::Result;
use crate::geo::PointCloud3D;

#[derive(Debug, Default, Clone, Copy)]
pub struct ClearingCohomology;

impl PersistenceEngine for ClearingCohomology {
    fn name(&self) -> &'static str {
        "clearing"
    }

    fn compute(&self, cloud: &PointCloud3D, cfg: &RipsConfig) -> Result<PersistenceDiagram> {
        cfg.validate(cloud)?;
        let dist = distance_matrix(cloud);
        let n = dist.len();
        let cap = cfg.cap(&dist);
        let mut out = DiagramBuilder::new(cap, cfg.max_dim);

        let mut edges: Vec<Simplex> = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                let value = dist.get(i, j);
                if value <= cap {
                    edges.push(Simplex {
                        value,
                        id: encode(&[i, j]),
                    });
                }
            }
        }
        edges.sort_unstable();

        let mut components = DisjointSet::new(n);
        let mut cleared: HashSet<u64> = HashSet::new();
        let mut buf = [0usize; 4];
        for e in &edges {
            let v = decode(e.id, 1, &mut buf);
            if components.union(v[0], v[1]) {
                out.push(0, 0.0, e.value);
                cleared.insert(e.id);
            }
        }
        for _ in 0..components.component_count() {
            out.push_essential_component();
        }

        for dim in 1..=cfg.max_dim {
            let mut columns: Vec<Simplex> = if dim == 1 {
                edges.iter().copied().filter(|e| !cleared.contains(&e.id)).collect()
            } else {
                let mut s = Vec::new();
                for_each_subset(n, dim + 1, |verts| {
                    let id = encode(verts);
                    if cleared.contains(&id) {
                        return;
                    }
                    let value = diameter(&dist, verts);
                    if value <= cap {
                        s.push(Simplex { value, id });
                    }
                });
                s.sort_unstable();
                s
            };
            columns.reverse();
            cleared = reduce_dimension(&dist, dim, cap, &columns, &mut out);
        }
        Ok(out.finish())
    }
}

/// Sorted cofaces of `simplex` within the cap.
fn coboundary(dist: &super::DistanceMatrix, dim: usize, simplex: Simplex, cap: f64) -> Vec<Simplex> {
    let n = dist.len();
    let mut buf = [0usize; 4];
    let verts: Vec<usize> = decode(simplex.id, dim, &mut buf).to_vec();
    let mut out = Vec::with_capacity(n - verts.len());
    let mut merged = Vec::with_capacity(verts.len() + 1);
    for w in 0..n {
        if verts.contains(&w) {
            continue;
        }
        let mut value = simplex.value;
        for &v in &verts {
            value = value.max(dist.get(v, w));
        }
        if value > cap {
            continue;
        }
        merged.clear();
        merged.extend_from_slice(&verts);
        let pos = merged.partition_point(|&v| v < w);
        merged.insert(pos, w);
        out.push(Simplex {
            value,
            id: encode(&merged),
        });
    }
    out.sort_unstable();
    out
}

/// `a ^= b` over the two-element field for sorted columns.
fn add_column(a: &[Simplex], b: &[Simplex]) -> Vec<Simplex> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Reduces the coboundary columns of one dimension (already in reverse
/// filtration order). Returns the pivots, which are the columns to clear in
/// the next dimension.
fn reduce_dimension(
    dist: &super::DistanceMatrix,
    dim: usize,
    cap: f64,
    columns: &[Simplex],
    out: &mut DiagramBuilder,
) -> HashSet<u64> {
    let mut reduced: Vec<Vec<Simplex>> = Vec::new();
    let mut pivot_of: HashMap<u64, usize> = HashMap::new();
    for &sigma in columns {
        let mut col = coboundary(dist, dim, sigma, cap);
        while let Some(pivot) = col.first() {
            match pivot_of.get(&pivot.id) {
                Some(&k) => col = add_column(&col, &reduced[k]),
                None => break,
            }
        }
        match col.first() {
            Some(&pivot) => {
                out.push(dim, sigma.value, pivot.value);
                pivot_of.insert(pivot.id, reduced.len());
                reduced.push(col);
            }
            None => out.push(dim, sigma.value, cap),
        }
    }
    pivot_of.into_keys().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_column_is_symmetric_difference() {
        let s = |v: f64, id: u64| Simplex { value: v, id };
        let a = vec![s(1.0, 1), s(2.0, 2), s(3.0, 3)];
        let b = vec![s(2.0, 2), s(4.0, 4)];
        assert_eq!(add_column(&a, &b), vec![s(1.0, 1), s(3.0, 3), s(4.0, 4)]);
        assert!(add_column(&a, &a).is_empty());
    }
}
