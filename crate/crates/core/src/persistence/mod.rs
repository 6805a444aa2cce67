//! Vietoris-Rips persistence diagrams (H0, H1, optionally H2) of 3D point
//! clouds.
//!
//! Two engines compute the same diagrams: [`ClearingCohomology`] is the one
//! used by the pipeline, [`BruteForce`] is an unoptimized reference kept
//! for verification. Engines are looked up by name in an
//! [`EngineRegistry`].

mod brute;
mod cohomology;
mod simplex;
mod union_find;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

pub use brute::{BruteForce, BRUTE_FORCE_MAX_POINTS};
pub use cohomology::ClearingCohomology;
pub use simplex::{distance_matrix, DistanceMatrix};

use crate::error::{Error, Result};
use crate::geo::PointCloud3D;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn lifetime(&self) -> f64 {
        self.death - self.birth
    }
}

/// Birth/death pairs sorted by `(dim, birth, death)`. Infinite deaths are
/// replaced by `cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
    pub cap: f64,
    pub homology_dims: Vec<usize>,
}

impl PersistenceDiagram {
    pub fn new(mut pairs: Vec<PersistencePair>, cap: f64, homology_dims: Vec<usize>) -> Self {
        sort_pairs(&mut pairs);
        PersistenceDiagram {
            pairs,
            cap,
            homology_dims,
        }
    }

    pub fn dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> + '_ {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    pub fn count(&self, dim: usize) -> usize {
        self.dim(dim).count()
    }

    /// Text dump: a `# cap=<value>` header, then `dim birth death` lines.
    pub fn to_text(&self) -> String {
        let mut s = format!("# cap={}\n", self.cap);
        for p in &self.pairs {
            let _ = writeln!(s, "{} {} {}", p.dim, p.birth, p.death);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cap = None;
        let mut pairs = Vec::new();
        let bad = |line: &str| Error::Persistence(format!("malformed diagram line {line:?}"));
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("cap=") {
                    cap = Some(v.trim().parse::<f64>().map_err(|_| bad(line))?);
                }
                continue;
            }
            let mut it = line.split_whitespace();
            let dim = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(line))?;
            let birth = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(line))?;
            let death = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(line))?;
            pairs.push(PersistencePair { dim, birth, death });
        }
        let cap = cap.ok_or_else(|| Error::Persistence("diagram has no cap header".into()))?;
        let max_dim = pairs.iter().map(|p| p.dim).max().unwrap_or(0).max(1);
        Ok(PersistenceDiagram::new(pairs, cap, (0..=max_dim).collect()))
    }
}

fn sort_pairs(pairs: &mut [PersistencePair]) {
    pairs.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.total_cmp(&b.death))
    });
}

/// Collects pairs, dropping zero-persistence ones.
pub(crate) struct DiagramBuilder {
    pairs: Vec<PersistencePair>,
    cap: f64,
    max_dim: usize,
}

impl DiagramBuilder {
    pub(crate) fn new(cap: f64, max_dim: usize) -> Self {
        DiagramBuilder {
            pairs: Vec::new(),
            cap,
            max_dim,
        }
    }

    pub(crate) fn push(&mut self, dim: usize, birth: f64, death: f64) {
        if death > birth {
            self.pairs.push(PersistencePair { dim, birth, death });
        }
    }

    /// Essential H0 bars are infinite before capping, so they are kept even
    /// when the cap is zero (single point or coincident points).
    pub(crate) fn push_essential_component(&mut self) {
        self.pairs.push(PersistencePair {
            dim: 0,
            birth: 0.0,
            death: self.cap,
        });
    }

    pub(crate) fn finish(self) -> PersistenceDiagram {
        PersistenceDiagram::new(self.pairs, self.cap, (0..=self.max_dim).collect())
    }
}

/// Filtration upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MaxScale {
    /// Largest pairwise distance: the full complex.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RipsConfig {
    pub max_dim: usize,
    pub max_scale: MaxScale,
    /// Cross-check the optimized engine against the reference reduction.
    pub oracle: bool,
}

impl Default for RipsConfig {
    fn default() -> Self {
        RipsConfig {
            max_dim: 1,
            max_scale: MaxScale::Auto,
            oracle: false,
        }
    }
}

impl RipsConfig {
    pub(crate) fn validate(&self, cloud: &PointCloud3D) -> Result<()> {
        if cloud.is_empty() {
            return Err(Error::Persistence("point cloud is empty".into()));
        }
        if cloud.len() > simplex::MAX_VERTICES {
            return Err(Error::Persistence(format!(
                "point cloud has {} points, at most {} supported",
                cloud.len(),
                simplex::MAX_VERTICES
            )));
        }
        if self.max_dim > 2 {
            return Err(Error::Persistence(format!(
                "max_dim {} not supported (0, 1 or 2)",
                self.max_dim
            )));
        }
        if let MaxScale::Fixed(s) = self.max_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Persistence(format!("max_scale must be positive, got {s}")));
            }
        }
        if cloud.points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Persistence("point cloud has non-finite coordinates".into()));
        }
        Ok(())
    }

    pub(crate) fn cap(&self, dist: &DistanceMatrix) -> f64 {
        match self.max_scale {
            MaxScale::Auto => dist.max(),
            MaxScale::Fixed(s) => s,
        }
    }
}

/// A way of computing Rips persistence diagrams.
pub trait PersistenceEngine: Send + Sync {
    fn name(&self) -> &'static str;
    fn compute(&self, cloud: &PointCloud3D, cfg: &RipsConfig) -> Result<PersistenceDiagram>;
}

/// Persistence engines by name.
#[derive(Clone)]
pub struct EngineRegistry {
    engines: BTreeMap<&'static str, Arc<dyn PersistenceEngine>>,
}

impl Default for EngineRegistry {
    fn default() -> Self {
        let mut r = EngineRegistry {
            engines: BTreeMap::new(),
        };
        r.register(Arc::new(ClearingCohomology));
        r.register(Arc::new(BruteForce));
        r
    }
}

impl EngineRegistry {
    pub fn register(&mut self, engine: Arc<dyn PersistenceEngine>) {
        self.engines.insert(engine.name(), engine);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn PersistenceEngine>> {
        self.engines.get(name).cloned().ok_or_else(|| {
            Error::Config(format!(
                "unknown persistence engine {name:?}; available: {}",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.engines.keys().copied().collect()
    }
}

/// Optimized Rips persistence. With `cfg.oracle` set, the result is also
/// checked against [`brute_force_persistence`] (clouds of at most
/// [`BRUTE_FORCE_MAX_POINTS`] points).
pub fn rips_persistence(cloud: &PointCloud3D, cfg: &RipsConfig) -> Result<PersistenceDiagram> {
    let diagram = ClearingCohomology.compute(cloud, cfg)?;
    if cfg.oracle {
        let reference = BruteForce.compute(cloud, cfg)?;
        if reference != diagram {
            return Err(Error::Persistence(format!(
                "optimized and reference diagrams differ for {}",
                cloud.source_id
            )));
        }
    }
    Ok(diagram)
}

pub fn brute_force_persistence(cloud: &PointCloud3D, cfg: &RipsConfig) -> Result<PersistenceDiagram> {
    BruteForce.compute(cloud, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[[f64; 3]]) -> PointCloud3D {
        PointCloud3D::new("t", points.to_vec())
    }

    fn both(c: &PointCloud3D) -> PersistenceDiagram {
        let cfg = RipsConfig::default();
        let fast = rips_persistence(c, &cfg).unwrap();
        assert_eq!(fast, brute_force_persistence(c, &cfg).unwrap());
        fast
    }

    #[test]
    fn single_point() {
        let d = both(&cloud(&[[1.0, 2.0, 3.0]]));
        assert_eq!(d.cap, 0.0);
        assert_eq!(
            d.pairs,
            vec![PersistencePair {
                dim: 0,
                birth: 0.0,
                death: 0.0
            }]
        );
    }

    #[test]
    fn single_point_with_fixed_scale() {
        let cfg = RipsConfig {
            max_scale: MaxScale::Fixed(2.0),
            ..Default::default()
        };
        let c = cloud(&[[0.0, 0.0, 0.0]]);
        let d = rips_persistence(&c, &cfg).unwrap();
        assert_eq!(d, brute_force_persistence(&c, &cfg).unwrap());
        assert_eq!(
            d.pairs,
            vec![PersistencePair {
                dim: 0,
                birth: 0.0,
                death: 2.0
            }]
        );
    }

    #[test]
    fn unit_square() {
        let d = both(&cloud(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ]));
        let r2 = 2f64.sqrt();
        assert_eq!(d.cap, r2);
        let h0: Vec<f64> = d.dim(0).map(|p| p.death).collect();
        assert_eq!(h0, vec![1.0, 1.0, 1.0, r2]);
        let h1: Vec<_> = d.dim(1).copied().collect();
        assert_eq!(h1.len(), 1);
        assert_eq!((h1[0].birth, h1[0].death), (1.0, r2));
    }

    #[test]
    fn equilateral_triangle() {
        let h = 3f64.sqrt() / 2.0;
        let d = both(&cloud(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]]));
        assert_eq!(d.count(1), 0);
        assert_eq!(d.count(0), 3);
        assert_eq!(d.dim(0).filter(|p| p.death == d.cap).count(), 1);
    }

    #[test]
    fn collinear() {
        let d = both(&cloud(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]));
        let h0: Vec<f64> = d.dim(0).map(|p| p.death).collect();
        assert_eq!(h0, vec![1.0, 1.0, 2.0]);
        assert_eq!(d.count(1), 0);
    }

    #[test]
    fn empty_cloud_is_an_error() {
        assert!(rips_persistence(&cloud(&[]), &RipsConfig::default()).is_err());
        assert!(brute_force_persistence(&cloud(&[]), &RipsConfig::default()).is_err());
    }

    #[test]
    fn brute_force_cost_guard() {
        let pts: Vec<[f64; 3]> = (0..41).map(|i| [i as f64, 0.0, 0.0]).collect();
        assert!(brute_force_persistence(&cloud(&pts), &RipsConfig::default()).is_err());
    }

    #[test]
    fn fixed_scale_leaves_essential_loop() {
        // square of side 1 capped below the diagonal: the loop never fills
        let cfg = RipsConfig {
            max_scale: MaxScale::Fixed(1.2),
            ..Default::default()
        };
        let c = cloud(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
        ]);
        let d = rips_persistence(&c, &cfg).unwrap();
        assert_eq!(d, brute_force_persistence(&c, &cfg).unwrap());
        let h1: Vec<_> = d.dim(1).map(|p| (p.birth, p.death)).collect();
        assert_eq!(h1, vec![(1.0, 1.2)]);
    }

    #[test]
    fn octahedron_void_in_h2() {
        let cfg = RipsConfig {
            max_dim: 2,
            ..Default::default()
        };
        let c = cloud(&[
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ]);
        let d = rips_persistence(&c, &cfg).unwrap();
        assert_eq!(d, brute_force_persistence(&c, &cfg).unwrap());
        let h2: Vec<_> = d.dim(2).map(|p| (p.birth, p.death)).collect();
        assert_eq!(h2, vec![(2f64.sqrt(), 2.0)]);
    }

    #[test]
    fn text_dump_roundtrip() {
        let d = both(&cloud(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.3],
            [0.0, 1.0, 0.0],
        ]));
        let text = d.to_text();
        assert!(text.starts_with("# cap="));
        assert_eq!(PersistenceDiagram::from_text(&text).unwrap(), d);
        assert!(PersistenceDiagram::from_text("0 0 1\n").is_err());
    }

    #[test]
    fn registry_lookup() {
        let r = EngineRegistry::default();
        assert_eq!(r.names(), vec!["brute_force", "clearing"]);
        assert_eq!(r.get("clearing").unwrap().name(), "clearing");
        assert!(r.get("ripser").is_err());
    }
}
