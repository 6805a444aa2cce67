use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::terrain::{DemKind, Terrain, TerrainParams};
use crate::error::{Error, Result};
use crate::geo::GeoPolygon;

pub const REJECTION_BUDGET: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthClass {
    Slide,
    Flow,
    Fall,
    Complex,
}

impl SynthClass {
    pub const ALL: [SynthClass; 4] = [SynthClass::Slide, SynthClass::Flow, SynthClass::Fall, SynthClass::Complex];

    pub fn name(self) -> &'static str {
        match self {
            SynthClass::Slide => "slide",
            SynthClass::Flow => "flow",
            SynthClass::Fall => "fall",
            SynthClass::Complex => "complex",
        }
    }

    pub fn default_dem(self) -> DemKind {
        match self {
            SynthClass::Slide => DemKind::UniformSlope,
            SynthClass::Flow | SynthClass::Complex => DemKind::Channelized,
            SynthClass::Fall => DemKind::CliffTalus,
        }
    }
}

impl std::str::FromStr for SynthClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SynthClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown synthetic class {s:?}")))
    }
}

/// Shape and terrain draw for one synthetic landslide. Lengths in meters,
/// `v` (upslope) is the long axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub class: SynthClass,
    /// Total length along the slope.
    pub size_scale: f64,
    /// Length over width (for complex: of the flow tail).
    pub aspect: f64,
    /// Centerline sine amplitude as a fraction of the sinuous length.
    pub sinuosity: f64,
    /// Full sine periods along the sinuous length.
    pub waves: f64,
    pub slope_deg: f64,
    /// Cliff slope for falls.
    pub cliff_deg: f64,
    /// Uniform vertex jitter half-width.
    pub noise: f64,
    pub seed: u64,
}

impl SynthParams {
    /// Mid-range archetype of `class`.
    pub fn archetype(class: SynthClass) -> Self {
        let base = SynthParams {
            class,
            size_scale: 200.0,
            aspect: 1.5,
            sinuosity: 0.0,
            waves: 1.0,
            slope_deg: 25.0,
            cliff_deg: 60.0,
            noise: 2.0,
            seed: 0,
        };
        match class {
            SynthClass::Slide => base,
            SynthClass::Flow => SynthParams {
                size_scale: 360.0,
                aspect: 8.0,
                sinuosity: 0.12,
                waves: 1.5,
                ..base
            },
            SynthClass::Fall => SynthParams {
                size_scale: 160.0,
                aspect: 2.0,
                slope_deg: 8.0,
                ..base
            },
            SynthClass::Complex => SynthParams {
                size_scale: 400.0,
                aspect: 7.0,
                sinuosity: 0.1,
                waves: 1.0,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.size_scale > 0.0
            && self.aspect > 0.0
            && self.sinuosity >= 0.0
            && self.waves >= 0.0
            && (0.0..90.0).contains(&self.slope_deg)
            && (0.0..90.0).contains(&self.cliff_deg)
            && self.noise >= 0.0
            && [self.size_scale, self.aspect, self.sinuosity, self.waves, self.noise]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid synthetic parameters {self:?}")))
        }
    }

    /// Head and tail lengths of a complex landslide.
    fn complex_split(&self) -> (f64, f64) {
        (0.35 * self.size_scale, 0.65 * self.size_scale)
    }

    /// Sinuous section as `(v_top, length)`, if the class has one.
    fn sinuous_section(&self) -> Option<(f64, f64)> {
        let l = self.size_scale;
        match self.class {
            SynthClass::Flow => Some((l / 2.0, l)),
            SynthClass::Complex => {
                let (head, tail) = self.complex_split();
                Some((l / 2.0 - head, tail))
            }
            _ => None,
        }
    }

    /// Terrain that matches the shape: a channel following the sinuous
    /// centerline, or a cliff whose foot crosses a fall's fan.
    pub fn terrain(&self, kind: DemKind) -> Terrain {
        let mut p = TerrainParams {
            slope_deg: self.slope_deg,
            cliff_deg: self.cliff_deg,
            ..Default::default()
        };
        let width = self.size_scale / self.aspect;
        match self.sinuous_section() {
            Some((v0, len)) => {
                p.channel_amplitude = self.sinuosity * len;
                p.channel_wavelength = if self.waves > 0.0 { len / self.waves } else { 0.0 };
                p.channel_v0 = v0;
                p.channel_halfwidth = 0.8 * width;
                p.channel_depth = 0.4 * width;
            }
            None => {
                p.channel_halfwidth = 0.5 * width;
                p.channel_depth = 0.3 * width;
            }
        }
        if self.class == SynthClass::Fall {
            p.break_v = 0.25 * self.size_scale;
        }
        Terrain { kind, params: p }
    }

    fn sine(&self, v0: f64, len: f64) -> impl Fn(f64) -> f64 {
        let amp = self.sinuosity * len;
        let k = if len > 0.0 { TAU * self.waves / len } else { 0.0 };
        move |v: f64| amp * (k * (v0 - v)).sin()
    }
}

/// Polygon with the centerline it was built around, both in a frame
/// centred on the shape.
#[derive(Debug, Clone)]
pub struct SynthShape {
    pub polygon: GeoPolygon,
    pub centerline: Vec<[f64; 2]>,
}

fn polyline_length(p: &[[f64; 2]]) -> f64 {
    p.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum()
}

/// Centerline length over the distance between its ends.
pub fn centerline_sinuosity(centerline: &[[f64; 2]]) -> f64 {
    let (a, b) = (centerline[0], centerline[centerline.len() - 1]);
    polyline_length(centerline) / (b[0] - a[0]).hypot(b[1] - a[1])
}

fn ellipse_arc(cv: f64, a: f64, b: f64, from: f64, to: f64, n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|i| {
            let t = from + (to - from) * i as f64 / (n - 1) as f64;
            [b * t.cos(), cv + a * t.sin()]
        })
        .collect()
}

/// Noise-free outline and centerline.
fn outline(p: &SynthParams) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let l = p.size_scale;
    let w = l / p.aspect;
    match p.class {
        SynthClass::Slide => {
            let mut ring = ellipse_arc(0.0, l / 2.0, w / 2.0, 0.0, TAU, 65);
            ring.pop();
            (ring, vec![[0.0, l / 2.0], [0.0, -l / 2.0]])
        }
        SynthClass::Flow => {
            let s = p.sine(l / 2.0, l);
            let n = 60;
            let vs: Vec<f64> = (0..=n).map(|i| l / 2.0 - l * i as f64 / n as f64).collect();
            let centre: Vec<[f64; 2]> = vs.iter().map(|&v| [s(v), v]).collect();
            let mut ring: Vec<[f64; 2]> = centre.iter().map(|c| [c[0] + w / 2.0, c[1]]).collect();
            ring.extend(centre.iter().rev().map(|c| [c[0] - w / 2.0, c[1]]));
            (ring, centre)
        }
        SynthClass::Fall => {
            let apex = 0.4 * l;
            let base = apex - l;
            let mut ring = vec![[0.0, apex]];
            let n = 24;
            for i in 0..=n {
                let t = -1.0 + 2.0 * i as f64 / n as f64;
                ring.push([t * w / 2.0, base - 0.1 * l * (1.0 - t * t)]);
            }
            (ring, vec![[0.0, apex], [0.0, base - 0.1 * l]])
        }
        SynthClass::Complex => {
            let (head, tail) = p.complex_split();
            let a = head / 2.0;
            let b = (head / 1.2 / 2.0).max(w);
            let half_tail = (w / 2.0).min(0.8 * b);
            let delta = (half_tail / b).asin();
            let vc = l / 2.0 - a;
            let vj = vc - a * delta.cos();
            let s = p.sine(vj, tail);
            // head arc from the right junction point over the top to the left
            let mut ring = ellipse_arc(vc, a, b, -PI / 2.0 + delta, 1.5 * PI - delta, 48);
            let n = 50;
            let vs: Vec<f64> = (1..=n).map(|i| vj - tail * i as f64 / n as f64).collect();
            ring.extend(vs.iter().map(|&v| [s(v) - half_tail, v]));
            ring.extend(vs.iter().rev().map(|&v| [s(v) + half_tail, v]));
            let mut centre = vec![[0.0, l / 2.0], [0.0, vj]];
            centre.extend(vs.iter().map(|&v| [s(v), v]));
            (ring, centre)
        }
    }
}

/// Outline with vertex jitter, re-drawn until the ring is simple.
pub fn gen_polygon<R: Rng + ?Sized>(params: &SynthParams, rng: &mut R) -> Result<SynthShape> {
    params.validate()?;
    let (ring, centerline) = outline(params);
    for _ in 0..REJECTION_BUDGET {
        let jittered: Vec<[f64; 2]> = ring
            .iter()
            .map(|q| {
                if params.noise > 0.0 {
                    [
                        q[0] + rng.gen_range(-params.noise..=params.noise),
                        q[1] + rng.gen_range(-params.noise..=params.noise),
                    ]
                } else {
                    *q
                }
            })
            .collect();
        if let Ok((polygon, _)) = GeoPolygon::new(jittered) {
            return Ok(SynthShape {
                polygon,
                centerline,
            });
        }
    }
    Err(Error::Geometry(format!(
        "no simple {} polygon within {REJECTION_BUDGET} attempts",
        params.class.name()
    )))
}
