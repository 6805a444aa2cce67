use super::curves::{betti_feature, heat_feature, image_feature, landscape_feature, CurveGrid};
use super::lifetimes::{amplitude, lifetime_statistics, lifetime_vector, AmplitudeKind};
use super::{Descriptor, VectorizeConfig};
use crate::persistence::PersistenceDiagram;

macro_rules! descriptor {
    ($ty:ident, $family:literal, $doc:literal, |$d:ident, $dim:ident, $cfg:ident| $body:expr) => {
        #[doc = $doc]
        #[derive(Debug, Default, Clone, Copy)]
        pub struct $ty;

        impl Descriptor for $ty {
            fn family(&self) -> &'static str {
                $family
            }

            fn describe(&self) -> &'static str {
                $doc
            }

            fn evaluate(&self, $d: &PersistenceDiagram, $dim: usize, $cfg: &VectorizeConfig) -> f64 {
                $body
            }
        }
    };
}

descriptor!(PersistenceEntropy, "PE", "Shannon entropy of the normalized lifetimes.", |d, dim, _cfg| {
    lifetime_statistics(&lifetime_vector(d, dim)).entropy
});

descriptor!(AverageLifetime, "AL", "Mean lifetime.", |d, dim, _cfg| {
    lifetime_statistics(&lifetime_vector(d, dim)).average
});

descriptor!(PersistenceCount, "NP", "Number of pairs.", |d, dim, _cfg| {
    d.count(dim) as f64
});

descriptor!(BettiNorm, "BC", "2-norm of the Betti curve on [0, cap].", |d, dim, cfg| {
    betti_feature(d, dim, &CurveGrid::for_diagram(d, cfg.curve_bins))
});

descriptor!(LandscapeNorm, "LS", "2-norm of the k-th persistence landscape on [0, cap].", |d, dim, cfg| {
    landscape_feature(d, dim, cfg.landscape_layer, &CurveGrid::for_diagram(d, cfg.curve_bins))
});

descriptor!(WassersteinAmplitude, "WA", "Euclidean norm of the lifetimes.", |d, dim, _cfg| {
    amplitude(&lifetime_vector(d, dim), AmplitudeKind::Wasserstein)
});

descriptor!(BottleneckAmplitude, "BA", "Largest lifetime.", |d, dim, _cfg| {
    amplitude(&lifetime_vector(d, dim), AmplitudeKind::Bottleneck)
});

descriptor!(HeatKernelNorm, "HK", "2-norm of the heat-kernel surface on [0, cap]^2.", |d, dim, cfg| {
    heat_feature(d, dim, cfg.sigma_rule.sigma(d.cap), cfg.curve_bins)
});

descriptor!(PersistenceImageNorm, "PI", "2-norm of the persistence image on [0, cap]^2.", |d, dim, cfg| {
    image_feature(d, dim, cfg.sigma_rule.sigma(d.cap), cfg.curve_bins)
});
