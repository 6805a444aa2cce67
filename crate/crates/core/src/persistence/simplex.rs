use std::cmp::Ordering;

use crate::geo::PointCloud3D;

/// Symmetric matrix of Euclidean distances, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Off-diagonal entries of the upper triangle, row by row.
    pub fn upper(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| self.get(i, j)))
    }
}

pub fn distance_matrix(cloud: &PointCloud3D) -> DistanceMatrix {
    let n = cloud.points.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let p = cloud.points[i];
        for j in (i + 1)..n {
            let q = cloud.points[j];
            let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    DistanceMatrix { n, data }
}

/// Largest vertex count a simplex id can encode.
pub(crate) const MAX_VERTICES: usize = 1 << 16;
const SLOT_BITS: u32 = 16;

/// A simplex of fixed dimension, identified by its sorted vertex tuple packed
/// into 16-bit slots (most significant first). For a fixed dimension the id
/// order is the lexicographic order on vertex tuples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Simplex {
    pub value: f64,
    pub id: u64,
}

impl Eq for Simplex {}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn encode(vertices: &[usize]) -> u64 {
    debug_assert!(vertices.len() <= 4);
    debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
    vertices
        .iter()
        .enumerate()
        .fold(0u64, |acc, (k, &v)| acc | (v as u64) << (48 - SLOT_BITS * k as u32))
}

pub(crate) fn decode(id: u64, dim: usize, out: &mut [usize; 4]) -> &[usize] {
    for (k, slot) in out.iter_mut().enumerate().take(dim + 1) {
        *slot = ((id >> (48 - SLOT_BITS * k as u32)) & 0xFFFF) as usize;
    }
    &out[..=dim]
}

/// Filtration value of a vertex set: its largest pairwise distance.
pub(crate) fn diameter(dist: &DistanceMatrix, vertices: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (a, &u) in vertices.iter().enumerate() {
        for &v in &vertices[a + 1..] {
            d = d.max(dist.get(u, v));
        }
    }
    d
}

/// Calls `f` on every sorted `size`-subset of `0..n`.
pub(crate) fn for_each_subset(n: usize, size: usize, mut f: impl FnMut(&[usize])) {
    if size == 0 || size > n {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        f(&idx);
        let mut k = size;
        while k > 0 {
            k -= 1;
            if idx[k] < n - size + k {
                idx[k] += 1;
                for m in (k + 1)..size {
                    idx[m] = idx[m - 1] + 1;
                }
                break;
            }
            if k == 0 {
                return;
            }
        }
    }
}
