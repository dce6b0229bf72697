use std::fmt;
use std::str::FromStr;

use super::TransformError;

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            /// Position in [`Self::ALL`].
            pub fn index(self) -> usize {
                self as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = TransformError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(TransformError::UnknownKind(s.to_string())),
                }
            }
        }
    };
}

named_enum! {
    /// The common-corruption set.
    CorruptionKind {
        GaussianNoise => "gaussian_noise",
        ShotNoise => "shot_noise",
        ImpulseNoise => "impulse_noise",
        DefocusBlur => "defocus_blur",
        GlassBlur => "glass_blur",
        MotionBlur => "motion_blur",
        ZoomBlur => "zoom_blur",
        Snow => "snow",
        Frost => "frost",
        Fog => "fog",
        Brightness => "brightness",
        Contrast => "contrast",
        Elastic => "elastic",
        Pixelate => "pixelate",
        Jpeg => "jpeg",
        SpeckleNoise => "speckle_noise",
        GaussianBlur => "gaussian_blur",
        Spatter => "spatter",
        Saturate => "saturate",
    }
}

named_enum! {
    /// The semantic-preserving augmentation set.
    AugmentationKind {
        Rot90 => "rot90",
        Rot270 => "rot270",
        HFlip => "hflip",
        CropResize => "crop_resize",
        ColorJitter => "color_jitter",
    }
}

impl CorruptionKind {
    /// Whether the output depends on the seed.
    pub fn is_stochastic(self) -> bool {
        use CorruptionKind::*;
        !matches!(
            self,
            DefocusBlur
                | ZoomBlur
                | Brightness
                | Contrast
                | Pixelate
                | Jpeg
                | GaussianBlur
                | Saturate
        )
    }
}

impl AugmentationKind {
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            AugmentationKind::CropResize | AugmentationKind::ColorJitter
        )
    }
}

/// Corruption strength, 1 (mildest) to 5.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Severity(u8);

impl Severity {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 5;

    pub fn new(level: u8) -> Result<Self, TransformError> {
        if (Self::MIN..=Self::MAX).contains(&level) {
            Ok(Severity(level))
        } else {
            Err(TransformError::InvalidSeverity(level as i64))
        }
    }

    pub fn all() -> impl Iterator<Item = Severity> {
        (Self::MIN..=Self::MAX).map(Severity)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based row index into a severity ladder.
    pub fn row(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinalities() {
        assert_eq!(CorruptionKind::ALL.len(), 19);
        assert_eq!(AugmentationKind::ALL.len(), 5);
    }

    #[test]
    fn names_roundtrip() {
        for &k in CorruptionKind::ALL {
            assert_eq!(k.name().parse::<CorruptionKind>().unwrap(), k);
            assert_eq!(CorruptionKind::ALL[k.index()], k);
        }
        for &k in AugmentationKind::ALL {
            assert_eq!(k.name().parse::<AugmentationKind>().unwrap(), k);
        }
        assert!("fisheye".parse::<CorruptionKind>().is_err());
    }

    #[test]
    fn severity_domain() {
        assert!(Severity::new(0).is_err());
        assert!(Severity::new(6).is_err());
        assert_eq!(Severity::all().count(), 5);
        assert_eq!(Severity::new(3).unwrap().row(), 2);
    }
}
