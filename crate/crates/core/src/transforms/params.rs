//! The per-(kind, severity) parameter ladder.
//!
//! The ladder ships as `data/severity_v1.toml` and is parsed once on first
//! use. Each kind has one controlling parameter that must be strictly
//! monotone in severity; the loader rejects tables that violate this.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use thiserror::Error;

use super::{CorruptionKind, Severity, TransformError};

const BUILTIN_TABLE: &str = include_str!("../../data/severity_v1.toml");

pub const TABLE_VERSION: i64 = 1;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("malformed severity table: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("severity table version {found}, expected {expected}")]
    Version { found: i64, expected: i64 },
    #[error("severity table is missing kind `{0}`")]
    MissingKind(&'static str),
    #[error("severity table has unknown entry `{0}`")]
    UnknownEntry(String),
    #[error("`{kind}.{param}`: {reason}")]
    BadParam {
        kind: &'static str,
        param: String,
        reason: String,
    },
    #[error("`{kind}.{param}` is not strictly {direction} in severity")]
    NotMonotone {
        kind: &'static str,
        param: &'static str,
        direction: &'static str,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    fn name(self) -> &'static str {
        match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
        }
    }
}

/// Parameter names per kind, controlling parameter first.
pub fn param_names(kind: CorruptionKind) -> &'static [&'static str] {
    use CorruptionKind::*;
    match kind {
        GaussianNoise | SpeckleNoise | GaussianBlur => &["sigma"],
        ShotNoise => &["photons"],
        ImpulseNoise => &["amount"],
        GlassBlur => &["sigma", "max_delta", "iterations"],
        DefocusBlur => &["radius", "alias_sigma"],
        MotionBlur => &["sigma", "radius"],
        ZoomBlur => &["max_zoom", "step"],
        Snow => &[
            "loc",
            "scale",
            "zoom",
            "threshold",
            "blur_radius",
            "blur_sigma",
            "blend",
        ],
        Frost => &["frost_weight", "image_weight"],
        Fog => &["magnitude", "decay"],
        Brightness => &["delta"],
        Contrast => &["factor"],
        Elastic => &["magnitude", "smoothing"],
        Pixelate => &["scale"],
        Jpeg => &["quality"],
        Spatter => &["threshold", "loc", "scale", "sigma", "intensity", "mud"],
        Saturate => &["factor", "offset"],
    }
}

/// The parameter that governs distortion strength and its direction.
pub fn controlling_param(kind: CorruptionKind) -> (&'static str, Direction) {
    use CorruptionKind::*;
    let dir = match kind {
        ShotNoise | Contrast | Pixelate | Jpeg | Spatter => Direction::Decreasing,
        _ => Direction::Increasing,
    };
    (param_names(kind)[0], dir)
}

/// Parameters of one (kind, severity) row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeverityParams {
    GaussianNoise {
        sigma: f32,
    },
    ShotNoise {
        photons: f32,
    },
    ImpulseNoise {
        amount: f32,
    },
    SpeckleNoise {
        sigma: f32,
    },
    GaussianBlur {
        sigma: f32,
    },
    GlassBlur {
        sigma: f32,
        max_delta: usize,
        iterations: usize,
    },
    DefocusBlur {
        radius: f32,
        alias_sigma: f32,
    },
    MotionBlur {
        radius: usize,
        sigma: f32,
    },
    ZoomBlur {
        max_zoom: f32,
        step: f32,
    },
    Snow {
        loc: f32,
        scale: f32,
        zoom: f32,
        threshold: f32,
        blur_radius: usize,
        blur_sigma: f32,
        blend: f32,
    },
    Frost {
        image_weight: f32,
        frost_weight: f32,
    },
    Fog {
        magnitude: f32,
        decay: f32,
    },
    Brightness {
        delta: f32,
    },
    Contrast {
        factor: f32,
    },
    /// Both fields are fractions of the shorter image side.
    Elastic {
        magnitude: f32,
        smoothing: f32,
    },
    Pixelate {
        scale: f32,
    },
    Jpeg {
        quality: u8,
    },
    Spatter {
        loc: f32,
        scale: f32,
        sigma: f32,
        threshold: f32,
        intensity: f32,
        mud: bool,
    },
    Saturate {
        factor: f32,
        offset: f32,
    },
}

impl SeverityParams {
    /// Value of the controlling parameter (see [`controlling_param`]).
    pub fn controlling_value(&self) -> f64 {
        use SeverityParams::*;
        (match *self {
            GaussianNoise { sigma } | SpeckleNoise { sigma } | GaussianBlur { sigma } => sigma,
            ShotNoise { photons } => photons,
            ImpulseNoise { amount } => amount,
            GlassBlur { sigma, .. } => sigma,
            DefocusBlur { radius, .. } => radius,
            MotionBlur { sigma, .. } => sigma,
            ZoomBlur { max_zoom, .. } => max_zoom,
            Snow { loc, .. } => loc,
            Frost { frost_weight, .. } => frost_weight,
            Fog { magnitude, .. } => magnitude,
            Brightness { delta } => delta,
            Contrast { factor } => factor,
            Elastic { magnitude, .. } => magnitude,
            Pixelate { scale } => scale,
            Jpeg { quality } => quality as f32,
            Spatter { threshold, .. } => threshold,
            Saturate { factor, .. } => factor,
        }) as f64
    }
}

type Ladder = [f64; 5];

/// Parsed and validated severity table.
#[derive(Clone, Debug)]
pub struct SeverityTable {
    ladders: Vec<BTreeMap<&'static str, Ladder>>,
}

impl SeverityTable {
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut root: toml::Table = text.parse()?;
        let version = root
            .remove("version")
            .and_then(|v| v.as_integer())
            .unwrap_or(-1);
        if version != TABLE_VERSION {
            return Err(TableError::Version {
                found: version,
                expected: TABLE_VERSION,
            });
        }
        let mut ladders = Vec::with_capacity(CorruptionKind::ALL.len());
        for &kind in CorruptionKind::ALL {
            let Some(toml::Value::Table(mut entry)) = root.remove(kind.name()) else {
                return Err(TableError::MissingKind(kind.name()));
            };
            let mut ladder = BTreeMap::new();
            for &param in param_names(kind) {
                let bad = |reason: &str| TableError::BadParam {
                    kind: kind.name(),
                    param: param.to_string(),
                    reason: reason.to_string(),
                };
                let values = entry.remove(param).ok_or_else(|| bad("missing"))?;
                let values = values.as_array().ok_or_else(|| bad("not an array"))?;
                if values.len() != 5 {
                    return Err(bad("expected five entries"));
                }
                let mut row = [0.0; 5];
                for (slot, v) in row.iter_mut().zip(values) {
                    *slot = v
                        .as_float()
                        .or_else(|| v.as_integer().map(|i| i as f64))
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| bad("non-numeric entry"))?;
                }
                ladder.insert(param, row);
            }
            if let Some(extra) = entry.keys().next() {
                return Err(TableError::UnknownEntry(format!("{}.{extra}", kind.name())));
            }
            let (param, dir) = controlling_param(kind);
            let row = ladder[param];
            let ok = row.windows(2).all(|w| match dir {
                Direction::Increasing => w[1] > w[0],
                Direction::Decreasing => w[1] < w[0],
            });
            if !ok {
                return Err(TableError::NotMonotone {
                    kind: kind.name(),
                    param,
                    direction: dir.name(),
                });
            }
            ladders.push(ladder);
        }
        if let Some(extra) = root.keys().next() {
            return Err(TableError::UnknownEntry(extra.clone()));
        }
        Ok(Self { ladders })
    }

    /// The table compiled into the crate.
    pub fn builtin() -> &'static SeverityTable {
        static TABLE: LazyLock<SeverityTable> = LazyLock::new(|| {
            SeverityTable::parse(BUILTIN_TABLE).expect("built-in severity table is valid")
        });
        &TABLE
    }

    /// Raw `(name, value)` pairs of one row, in declaration order.
    pub fn raw_row(&self, kind: CorruptionKind, severity: Severity) -> Vec<(&'static str, f64)> {
        let ladder = &self.ladders[kind.index()];
        param_names(kind)
            .iter()
            .map(|&p| (p, ladder[p][severity.row()]))
            .collect()
    }

    pub fn params(&self, kind: CorruptionKind, severity: Severity) -> SeverityParams {
        let ladder = &self.ladders[kind.index()];
        let i = severity.row();
        let f = |p: &str| ladder[p][i] as f32;
        let n = |p: &str| ladder[p][i].max(0.0).round() as usize;
        use CorruptionKind as K;
        use SeverityParams as P;
        match kind {
            K::GaussianNoise => P::GaussianNoise { sigma: f("sigma") },
            K::ShotNoise => P::ShotNoise {
                photons: f("photons"),
            },
            K::ImpulseNoise => P::ImpulseNoise {
                amount: f("amount"),
            },
            K::SpeckleNoise => P::SpeckleNoise { sigma: f("sigma") },
            K::GaussianBlur => P::GaussianBlur { sigma: f("sigma") },
            K::GlassBlur => P::GlassBlur {
                sigma: f("sigma"),
                max_delta: n("max_delta").max(1),
                iterations: n("iterations"),
            },
            K::DefocusBlur => P::DefocusBlur {
                radius: f("radius"),
                alias_sigma: f("alias_sigma"),
            },
            K::MotionBlur => P::MotionBlur {
                radius: n("radius"),
                sigma: f("sigma"),
            },
            K::ZoomBlur => P::ZoomBlur {
                max_zoom: f("max_zoom"),
                step: f("step"),
            },
            K::Snow => P::Snow {
                loc: f("loc"),
                scale: f("scale"),
                zoom: f("zoom"),
                threshold: f("threshold"),
                blur_radius: n("blur_radius"),
                blur_sigma: f("blur_sigma"),
                blend: f("blend"),
            },
            K::Frost => P::Frost {
                image_weight: f("image_weight"),
                frost_weight: f("frost_weight"),
            },
            K::Fog => P::Fog {
                magnitude: f("magnitude"),
                decay: f("decay"),
            },
            K::Brightness => P::Brightness { delta: f("delta") },
            K::Contrast => P::Contrast {
                factor: f("factor"),
            },
            K::Elastic => P::Elastic {
                magnitude: f("magnitude"),
                smoothing: f("smoothing"),
            },
            K::Pixelate => P::Pixelate { scale: f("scale") },
            K::Jpeg => P::Jpeg {
                quality: n("quality").clamp(1, 100) as u8,
            },
            K::Spatter => P::Spatter {
                loc: f("loc"),
                scale: f("scale"),
                sigma: f("sigma"),
                threshold: f("threshold"),
                intensity: f("intensity"),
                mud: ladder["mud"][i] != 0.0,
            },
            K::Saturate => P::Saturate {
                factor: f("factor"),
                offset: f("offset"),
            },
        }
    }
}

/// Looks up the built-in ladder row for `(kind, severity)`.
pub fn severity_params(
    kind: CorruptionKind,
    severity: u8,
) -> Result<SeverityParams, TransformError> {
    let severity = Severity::new(severity)?;
    Ok(SeverityTable::builtin().params(kind, severity))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_parses_with_95_rows() {
        let table = SeverityTable::builtin();
        let rows: usize = CorruptionKind::ALL
            .iter()
            .map(|&k| {
                Severity::all()
                    .filter(|&s| !table.raw_row(k, s).is_empty())
                    .count()
            })
            .sum();
        assert_eq!(rows, 95);
    }

    #[test]
    fn ladder_spot_checks() {
        assert_eq!(
            severity_params(CorruptionKind::GaussianNoise, 1).unwrap(),
            SeverityParams::GaussianNoise { sigma: 0.04 }
        );
        // lowest quality of the ladder
        assert_eq!(
            severity_params(CorruptionKind::Jpeg, 5).unwrap(),
            SeverityParams::Jpeg { quality: 40 }
        );
        let qualities: Vec<f64> = Severity::all()
            .map(|s| {
                SeverityTable::builtin()
                    .params(CorruptionKind::Jpeg, s)
                    .controlling_value()
            })
            .collect();
        assert_eq!(qualities.iter().cloned().fold(f64::MAX, f64::min), 40.0);
    }

    #[test]
    fn out_of_range_severity() {
        assert!(matches!(
            severity_params(CorruptionKind::GaussianNoise, 6),
            Err(TransformError::InvalidSeverity(6))
        ));
        assert!(severity_params(CorruptionKind::Fog, 0).is_err());
    }

    #[test]
    fn controlling_parameter_is_strictly_monotone() {
        let table = SeverityTable::builtin();
        for &kind in CorruptionKind::ALL {
            let (_, dir) = controlling_param(kind);
            let vals: Vec<f64> = Severity::all()
                .map(|s| table.params(kind, s).controlling_value())
                .collect();
            for w in vals.windows(2) {
                match dir {
                    Direction::Increasing => assert!(w[1] > w[0], "{kind}: {vals:?}"),
                    Direction::Decreasing => assert!(w[1] < w[0], "{kind}: {vals:?}"),
                }
            }
        }
    }

    #[test]
    fn loader_rejects_bad_tables() {
        assert!(matches!(
            SeverityTable::parse("version = 2"),
            Err(TableError::Version { found: 2, .. })
        ));
        assert!(matches!(
            SeverityTable::parse("version = 1"),
            Err(TableError::MissingKind("gaussian_noise"))
        ));
        let non_monotone = BUILTIN_TABLE.replace(
            "sigma = [0.04, 0.06, 0.08, 0.09, 0.10]",
            "sigma = [0.04, 0.06, 0.06, 0.09, 0.10]",
        );
        assert!(matches!(
            SeverityTable::parse(&non_monotone),
            Err(TableError::NotMonotone {
                kind: "gaussian_noise",
                ..
            })
        ));
        let short = BUILTIN_TABLE.replace("delta = [0.05, 0.1, 0.15, 0.2, 0.3]", "delta = [0.05]");
        assert!(matches!(
            SeverityTable::parse(&short),
            Err(TableError::BadParam {
                kind: "brightness",
                ..
            })
        ));
        let extra = format!("{BUILTIN_TABLE}\n[vignette]\nstrength = [1, 2, 3, 4, 5]\n");
        assert!(matches!(
            SeverityTable::parse(&extra),
            Err(TableError::UnknownEntry(_))
        ));
    }
}
