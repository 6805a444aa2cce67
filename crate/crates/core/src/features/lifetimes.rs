use crate::persistence::PersistenceDiagram;

/// Lifetimes `death - birth` of one homology dimension, capped deaths
/// included.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LifetimeVector {
    pub dim: usize,
    pub lifetimes: Vec<f64>,
}

pub fn lifetime_vector(diagram: &PersistenceDiagram, dim: usize) -> LifetimeVector {
    LifetimeVector {
        dim,
        lifetimes: diagram.dim(dim).map(|p| p.lifetime()).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeStats {
    pub count: usize,
    pub average: f64,
    pub entropy: f64,
}

/// Count, mean and Shannon entropy (natural log) of the normalized
/// lifetimes. Empty vectors give zeros; a vector with zero total mass has
/// entropy 0.
pub fn lifetime_statistics(l: &LifetimeVector) -> LifetimeStats {
    let count = l.lifetimes.len();
    if count == 0 {
        return LifetimeStats {
            count,
            average: 0.0,
            entropy: 0.0,
        };
    }
    let total: f64 = l.lifetimes.iter().sum();
    let entropy = if total > 0.0 {
        -l.lifetimes
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| {
                let p = x / total;
                p * p.ln()
            })
            .sum::<f64>()
    } else {
        0.0
    };
    LifetimeStats {
        count,
        average: total / count as f64,
        entropy: entropy.max(0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeKind {
    /// Euclidean norm of the lifetimes.
    Wasserstein,
    /// Largest lifetime.
    Bottleneck,
}

pub fn amplitude(l: &LifetimeVector, kind: AmplitudeKind) -> f64 {
    match kind {
        AmplitudeKind::Wasserstein => l.lifetimes.iter().map(|x| x * x).sum::<f64>().sqrt(),
        AmplitudeKind::Bottleneck => l.lifetimes.iter().copied().fold(0.0, f64::max),
    }
}
