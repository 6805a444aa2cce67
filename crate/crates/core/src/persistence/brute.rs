//! Reference persistence: every simplex up to `max_dim + 1`, one boundary
//! matrix, plain left-to-right column reduction. Slow, small inputs only.

use std::collections::HashMap;

use super::simplex::{diameter, distance_matrix, encode, for_each_subset};
use super::{DiagramBuilder, PersistenceDiagram, PersistenceEngine, RipsConfig};
use crate::error::{Error, Result};
use crate::geo::PointCloud3D;

/// Largest cloud the reference reduction accepts.
pub const BRUTE_FORCE_MAX_POINTS: usize = 40;

#[derive(Debug, Default, Clone, Copy)]
pub struct BruteForce;

struct Cell {
    value: f64,
    dim: usize,
    verts: Vec<usize>,
}

impl PersistenceEngine for BruteForce {
    fn name(&self) -> &'static str {
        "brute_force"
    }

    fn compute(&self, cloud: &PointCloud3D, cfg: &RipsConfig) -> Result<PersistenceDiagram> {
        cfg.validate(cloud)?;
        if cloud.len() > BRUTE_FORCE_MAX_POINTS {
            return Err(Error::Persistence(format!(
                "brute-force reduction is limited to {BRUTE_FORCE_MAX_POINTS} points, got {}",
                cloud.len()
            )));
        }
        let dist = distance_matrix(cloud);
        let n = dist.len();
        let cap = cfg.cap(&dist);

        let mut cells: Vec<Cell> = Vec::new();
        for dim in 0..=(cfg.max_dim + 1) {
            for_each_subset(n, dim + 1, |verts| {
                let value = diameter(&dist, verts);
                if value <= cap {
                    cells.push(Cell {
                        value,
                        dim,
                        verts: verts.to_vec(),
                    });
                }
            });
        }
        cells.sort_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then(a.dim.cmp(&b.dim))
                .then_with(|| a.verts.cmp(&b.verts))
        });

        let index: HashMap<u64, usize> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| (encode(&c.verts), i))
            .collect();

        // boundary columns as sorted row indices
        let mut columns: Vec<Vec<usize>> = cells
            .iter()
            .map(|c| {
                if c.dim == 0 {
                    return Vec::new();
                }
                let mut rows: Vec<usize> = (0..c.verts.len())
                    .map(|skip| {
                        let face: Vec<usize> = c
                            .verts
                            .iter()
                            .enumerate()
                            .filter(|&(k, _)| k != skip)
                            .map(|(_, &v)| v)
                            .collect();
                        index[&encode(&face)]
                    })
                    .collect();
                rows.sort_unstable();
                rows
            })
            .collect();

        let mut low_owner: HashMap<usize, usize> = HashMap::new();
        let mut paired = vec![false; cells.len()];
        for j in 0..columns.len() {
            while let Some(&low) = columns[j].last() {
                match low_owner.get(&low) {
                    Some(&k) => {
                        let other = columns[k].clone();
                        columns[j] = xor_sorted(&columns[j], &other);
                    }
                    None => break,
                }
            }
            if let Some(&low) = columns[j].last() {
                low_owner.insert(low, j);
                paired[low] = true;
                paired[j] = true;
            }
        }

        let mut out = DiagramBuilder::new(cap, cfg.max_dim);
        for (&low, &j) in &low_owner {
            let birth = &cells[low];
            if birth.dim <= cfg.max_dim {
                out.push(birth.dim, birth.value, cells[j].value);
            }
        }
        for (i, c) in cells.iter().enumerate() {
            if paired[i] || c.dim > cfg.max_dim {
                continue;
            }
            if c.dim == 0 {
                out.push_essential_component();
            } else {
                out.push(c.dim, c.value, cap);
            }
        }
        Ok(out.finish())
    }
}

fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else if a[i] > b[j] {
            out.push(b[j]);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
