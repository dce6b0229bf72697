//! Semantic-preserving image transforms: 19 corruptions at 5 severities and
//! 5 augmentations, all deterministic in an explicit seed.
//!
//! Randomness comes from a counter-based generator ([`rng::Key`]) addressed
//! by pixel or step index, so results do not depend on evaluation order.

mod augment;
mod blur;
mod digital;
mod kinds;
mod noise;
mod params;
pub mod rng;
mod weather;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{ImageF, ImagingError};

pub use augment::{
    color_jitter, color_jitter_with, crop_resize, crop_window, hflip, jitter_factors, rot270,
    rot90, CropWindow, JitterFactors, CROP_AREA_MAX, CROP_AREA_MIN, JITTER_STRENGTH,
};
pub use kinds::{AugmentationKind, CorruptionKind, Severity};
pub use params::{
    controlling_param, param_names, severity_params, Direction, SeverityParams, SeverityTable,
    TableError,
};
pub use weather::plasma_fractal;

/// Smallest side length accepted by [`corrupt`].
pub const MIN_SIDE: usize = 8;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("invalid severity {0}, expected 1..=5")]
    InvalidSeverity(i64),
    #[error("image {width}x{height} is too small, corruptions need both sides >= {min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("unknown transform kind `{0}`")]
    UnknownKind(String),
    #[error("invalid transform spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}

pub type Result<T, E = TransformError> = std::result::Result<T, E>;

/// Applies corruption `kind` at `severity` using the built-in ladder.
/// The output has the input's size and every channel in `[0, 1]`.
pub fn corrupt(img: &ImageF, kind: CorruptionKind, severity: u8, seed: u64) -> Result<ImageF> {
    let params = severity_params(kind, severity)?;
    corrupt_with(img, params, seed)
}

/// Applies a corruption with explicit parameters.
pub fn corrupt_with(img: &ImageF, params: SeverityParams, seed: u64) -> Result<ImageF> {
    let (width, height) = img.dims();
    if width.min(height) < MIN_SIDE {
        return Err(TransformError::ImageTooSmall {
            width,
            height,
            min: MIN_SIDE,
        });
    }
    let key = rng::Key::new(seed).derive(kind_of(&params).index() as u64);
    use SeverityParams as P;
    let out = match params {
        P::GaussianNoise { sigma } => noise::gaussian(img, sigma, key),
        P::ShotNoise { photons } => noise::shot(img, photons, key),
        P::ImpulseNoise { amount } => noise::impulse(img, amount, key),
        P::SpeckleNoise { sigma } => noise::speckle(img, sigma, key),
        P::GaussianBlur { sigma } => blur::gaussian(img, sigma)?,
        P::GlassBlur {
            sigma,
            max_delta,
            iterations,
        } => blur::glass(img, sigma, max_delta, iterations, key)?,
        P::DefocusBlur {
            radius,
            alias_sigma,
        } => blur::defocus(img, radius, alias_sigma)?,
        P::MotionBlur { radius, sigma } => blur::motion(img, radius, sigma, key)?,
        P::ZoomBlur { max_zoom, step } => blur::zoom(img, max_zoom, step),
        P::Snow {
            loc,
            scale,
            zoom,
            threshold,
            blur_radius,
            blur_sigma,
            blend,
        } => {
            let p = weather::SnowParams {
                loc,
                scale,
                zoom,
                threshold,
                blur_radius,
                blur_sigma,
                blend,
            };
            weather::snow(img, &p, key)?
        }
        P::Frost {
            image_weight,
            frost_weight,
        } => weather::frost(img, image_weight, frost_weight, key),
        P::Fog { magnitude, decay } => weather::fog(img, magnitude, decay, key),
        P::Brightness { delta } => digital::brightness(img, delta),
        P::Contrast { factor } => digital::contrast(img, factor),
        P::Elastic {
            magnitude,
            smoothing,
        } => digital::elastic(img, magnitude, smoothing, key)?,
        P::Pixelate { scale } => digital::pixelate(img, scale)?,
        P::Jpeg { quality } => digital::jpeg(img, quality)?,
        P::Spatter {
            loc,
            scale,
            sigma,
            threshold,
            intensity,
            mud,
        } => {
            let p = weather::SpatterParams {
                loc,
                scale,
                sigma,
                threshold,
                intensity,
                mud,
            };
            weather::spatter(img, &p, key)?
        }
        P::Saturate { factor, offset } => digital::saturate(img, factor, offset),
    };
    Ok(out.clamped())
}

fn kind_of(params: &SeverityParams) -> CorruptionKind {
    use CorruptionKind as K;
    use SeverityParams as P;
    match params {
        P::GaussianNoise { .. } => K::GaussianNoise,
        P::ShotNoise { .. } => K::ShotNoise,
        P::ImpulseNoise { .. } => K::ImpulseNoise,
        P::SpeckleNoise { .. } => K::SpeckleNoise,
        P::GaussianBlur { .. } => K::GaussianBlur,
        P::GlassBlur { .. } => K::GlassBlur,
        P::DefocusBlur { .. } => K::DefocusBlur,
        P::MotionBlur { .. } => K::MotionBlur,
        P::ZoomBlur { .. } => K::ZoomBlur,
        P::Snow { .. } => K::Snow,
        P::Frost { .. } => K::Frost,
        P::Fog { .. } => K::Fog,
        P::Brightness { .. } => K::Brightness,
        P::Contrast { .. } => K::Contrast,
        P::Elastic { .. } => K::Elastic,
        P::Pixelate { .. } => K::Pixelate,
        P::Jpeg { .. } => K::Jpeg,
        P::Spatter { .. } => K::Spatter,
        P::Saturate { .. } => K::Saturate,
    }
}

/// Applies augmentation `kind`. Geometric kinds ignore `seed`.
pub fn augment(img: &ImageF, kind: AugmentationKind, seed: u64) -> ImageF {
    use AugmentationKind as A;
    match kind {
        A::Rot90 => rot90(img),
        A::Rot270 => rot270(img),
        A::HFlip => hflip(img),
        A::CropResize => crop_resize(img, seed),
        A::ColorJitter => color_jitter(img, seed),
    }
    .clamped()
}

/// One element of the transform set: identity, a corruption at a severity,
/// or an augmentation. Seeds are kept only for stochastic kinds and are
/// zero otherwise, so equal transforms compare equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpecWire", into = "SpecWire")]
pub enum TransformSpec {
    Identity,
    Corruption {
        kind: CorruptionKind,
        severity: Severity,
        seed: u64,
    },
    Augmentation {
        kind: AugmentationKind,
        seed: u64,
    },
}

impl TransformSpec {
    pub fn corruption(kind: CorruptionKind, severity: Severity, seed: u64) -> Self {
        let seed = if kind.is_stochastic() { seed } else { 0 };
        TransformSpec::Corruption {
            kind,
            severity,
            seed,
        }
    }

    pub fn augmentation(kind: AugmentationKind, seed: u64) -> Self {
        let seed = if kind.is_stochastic() { seed } else { 0 };
        TransformSpec::Augmentation { kind, seed }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, TransformSpec::Identity)
    }

    /// Kind name: `identity`, a corruption name or an augmentation name.
    pub fn kind_name(&self) -> &'static str {
        match self {
            TransformSpec::Identity => "identity",
            TransformSpec::Corruption { kind, .. } => kind.name(),
            TransformSpec::Augmentation { kind, .. } => kind.name(),
        }
    }

    pub fn severity(&self) -> Option<Severity> {
        match self {
            TransformSpec::Corruption { severity, .. } => Some(*severity),
            _ => None,
        }
    }

    /// Short label, unique per (kind, severity): `identity`, `rot90`,
    /// `gaussian_noise_s3`.
    pub fn tag(&self) -> String {
        match self.severity() {
            Some(s) => format!("{}_s{}", self.kind_name(), s),
            None => self.kind_name().to_string(),
        }
    }

    pub fn apply(&self, img: &ImageF) -> Result<ImageF> {
        apply(img, self)
    }
}

/// Dispatches `spec`. The identity returns the input unchanged.
pub fn apply(img: &ImageF, spec: &TransformSpec) -> Result<ImageF> {
    match *spec {
        TransformSpec::Identity => Ok(img.clone()),
        TransformSpec::Corruption {
            kind,
            severity,
            seed,
        } => corrupt(img, kind, severity.get(), seed),
        TransformSpec::Augmentation { kind, seed } => Ok(augment(img, kind, seed)),
    }
}

/// Serialized shape: `{"kind": ..., "severity"?: 1..5, "seed"?: u64}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecWire {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    severity: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl From<TransformSpec> for SpecWire {
    fn from(spec: TransformSpec) -> Self {
        let (severity, seed) = match spec {
            TransformSpec::Identity => (None, None),
            TransformSpec::Corruption {
                kind,
                severity,
                seed,
            } => (
                Some(severity.get() as i64),
                kind.is_stochastic().then_some(seed),
            ),
            TransformSpec::Augmentation { kind, seed } => {
                (None, kind.is_stochastic().then_some(seed))
            }
        };
        SpecWire {
            kind: spec.kind_name().to_string(),
            severity,
            seed,
        }
    }
}

impl TryFrom<SpecWire> for TransformSpec {
    type Error = TransformError;

    fn try_from(w: SpecWire) -> Result<Self> {
        if w.kind == "identity" {
            if w.severity.is_some() || w.seed.is_some() {
                return Err(TransformError::InvalidSpec(
                    "identity takes no severity or seed".into(),
                ));
            }
            return Ok(TransformSpec::Identity);
        }
        if let Ok(kind) = w.kind.parse::<CorruptionKind>() {
            let level = w.severity.ok_or_else(|| {
                TransformError::InvalidSpec(format!("corruption `{kind}` needs a severity"))
            })?;
            let severity = u8::try_from(level)
                .map_err(|_| TransformError::InvalidSeverity(level))
                .and_then(Severity::new)?;
            return Ok(TransformSpec::corruption(
                kind,
                severity,
                w.seed.unwrap_or(0),
            ));
        }
        let kind: AugmentationKind = w.kind.parse()?;
        if w.severity.is_some() {
            return Err(TransformError::InvalidSpec(format!(
                "augmentation `{kind}` takes no severity"
            )));
        }
        Ok(TransformSpec::augmentation(kind, w.seed.unwrap_or(0)))
    }
}

/// Deterministic synthetic photo stand-in: a tilted two-color gradient,
/// a few soft-edged colored discs and a faint stripe texture, all inside
/// `[0.05, 0.95]`. Distinct seeds give distinct scenes.
pub fn synthetic_scene(width: usize, height: usize, seed: u64) -> Result<ImageF> {
    let key = rng::Key::new(seed).derive(0x5CE4E);
    let u = |i: u64| key.uniform(i) as f32;
    let angle = u(0) * std::f32::consts::TAU;
    let (ca, sa) = (angle.cos(), angle.sin());
    let c0 = [u(1), u(2), u(3)];
    let c1 = [u(4), u(5), u(6)];
    let discs: Vec<([f32; 2], f32, [f32; 3])> = (0..3)
        .map(|d| {
            let b = 10 + d * 6;
            (
                [u(b), u(b + 1)],
                0.1 + 0.2 * u(b + 2),
                [u(b + 3), u(b + 4), u(b + 5)],
            )
        })
        .collect();
    let freq = 2.0 + 6.0 * u(40);
    let img = ImageF::from_fn(width, height, |x, y| {
        let px = (x as f32 + 0.5) / width as f32;
        let py = (y as f32 + 0.5) / height as f32;
        let t = ((px - 0.5) * ca + (py - 0.5) * sa + 0.5).clamp(0.0, 1.0);
        let mut rgb = [0f32; 3];
        for c in 0..3 {
            rgb[c] = c0[c] * (1.0 - t) + c1[c] * t;
        }
        for (center, radius, color) in &discs {
            let d = ((px - center[0]).powi(2) + (py - center[1]).powi(2)).sqrt();
            let alpha = ((radius - d) * 20.0).clamp(0.0, 1.0);
            for c in 0..3 {
                rgb[c] = rgb[c] * (1.0 - alpha) + color[c] * alpha;
            }
        }
        let stripe = 0.05 * (std::f32::consts::TAU * freq * (px * sa - py * ca)).sin();
        rgb.map(|v| (0.05 + 0.9 * v + stripe).clamp(0.05, 0.95))
    })?;
    Ok(img)
}

impl std::fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.tag())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::test_pattern;

    #[test]
    fn identity_is_bit_exact() {
        let img = test_pattern(16, 16).unwrap();
        assert_eq!(apply(&img, &TransformSpec::Identity).unwrap(), img);
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let img = test_pattern(16, 16).unwrap();
        let spec =
            TransformSpec::corruption(CorruptionKind::GaussianBlur, Severity::new(3).unwrap(), 7);
        assert_eq!(
            apply(&img, &spec).unwrap(),
            corrupt(&img, CorruptionKind::GaussianBlur, 3, 7).unwrap()
        );
        let spec = TransformSpec::augmentation(AugmentationKind::Rot90, 99);
        assert_eq!(
            apply(&img, &spec).unwrap(),
            augment(&img, AugmentationKind::Rot90, 12345)
        );
    }

    #[test]
    fn too_small_and_bad_severity() {
        let img = test_pattern(7, 32).unwrap();
        assert!(matches!(
            corrupt(&img, CorruptionKind::Fog, 1, 0),
            Err(TransformError::ImageTooSmall { width: 7, .. })
        ));
        let img = test_pattern(8, 8).unwrap();
        assert!(matches!(
            corrupt(&img, CorruptionKind::GaussianNoise, 6, 0),
            Err(TransformError::InvalidSeverity(6))
        ));
    }

    #[test]
    fn wire_format() {
        let sev = Severity::new(2).unwrap();
        let cases = [
            (TransformSpec::Identity, r#"{"kind":"identity"}"#),
            (
                TransformSpec::corruption(CorruptionKind::Fog, sev, 9),
                r#"{"kind":"fog","severity":2,"seed":9}"#,
            ),
            (
                TransformSpec::corruption(CorruptionKind::Jpeg, sev, 9),
                r#"{"kind":"jpeg","severity":2}"#,
            ),
            (
                TransformSpec::augmentation(AugmentationKind::HFlip, 9),
                r#"{"kind":"hflip"}"#,
            ),
            (
                TransformSpec::augmentation(AugmentationKind::CropResize, 9),
                r#"{"kind":"crop_resize","seed":9}"#,
            ),
        ];
        for (spec, text) in cases {
            assert_eq!(serde_json::to_string(&spec).unwrap(), text);
            assert_eq!(serde_json::from_str::<TransformSpec>(text).unwrap(), spec);
        }
        for bad in [
            r#"{"kind":"fog"}"#,
            r#"{"kind":"fog","severity":0}"#,
            r#"{"kind":"fog","severity":300}"#,
            r#"{"kind":"rot90","severity":1}"#,
            r#"{"kind":"identity","seed":1}"#,
            r#"{"kind":"swirl"}"#,
        ] {
            assert!(serde_json::from_str::<TransformSpec>(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn tags_are_unique() {
        let mut tags = std::collections::HashSet::new();
        tags.insert(TransformSpec::Identity.tag());
        for &k in AugmentationKind::ALL {
            assert!(tags.insert(TransformSpec::augmentation(k, 0).tag()));
        }
        for &k in CorruptionKind::ALL {
            for s in Severity::all() {
                assert!(tags.insert(TransformSpec::corruption(k, s, 0).tag()));
            }
        }
        assert_eq!(tags.len(), 101);
    }
}
