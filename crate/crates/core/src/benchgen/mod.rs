//! Benchmark manifests: the original test set plus transformed copies of the
//! inlier-class test images, one manifest per inlier class.
//!
//! A manifest is declarative. Pixels are produced on demand by
//! [`materialize`], which reapplies the entry's transform to the source
//! image, so a manifest and the source images fully determine the dataset.

mod source;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::hash::Hasher;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fnv::FnvHasher;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{clamp_quantize, load_image, save_png, to_unit_float, ImageF, ImagingError};
use crate::transforms::rng::mix64;
use crate::transforms::{
    apply, AugmentationKind, CorruptionKind, Severity, TransformError, TransformSpec,
};

pub use source::{one_vs_rest_split, OneVsRest, SourceImage, SourceManifest, Split};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("invalid manifest: {0}")]
    Invalid(String),
    #[error("invalid setup `{0}`, expected U, A or C with an optional `:kind,kind` filter")]
    InvalidSetup(String),
    #[error("entry `{entry}`: cannot read {}: {source}", path.display())]
    Load {
        entry: String,
        path: PathBuf,
        source: ImagingError,
    },
    #[error("entry `{entry}`: {source}")]
    Transform {
        entry: String,
        source: TransformError,
    },
    #[error("entry `{entry}`: cannot write {}: {source}", path.display())]
    Write {
        entry: String,
        path: PathBuf,
        source: ImagingError,
    },
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetupKind {
    /// No transforms: the test set equals the original one.
    U,
    /// The five augmentations.
    A,
    /// The 19 corruptions at 5 severities.
    C,
}

/// Setup plus an optional subset of transform kind names. Written as `A`,
/// `C` or `A:rot90,hflip`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Setup {
    pub kind: SetupKind,
    pub filter: Option<BTreeSet<String>>,
}

impl Setup {
    pub const U: Setup = Setup {
        kind: SetupKind::U,
        filter: None,
    };
    pub const A: Setup = Setup {
        kind: SetupKind::A,
        filter: None,
    };
    pub const C: Setup = Setup {
        kind: SetupKind::C,
        filter: None,
    };

    pub fn with_filter<I, S>(kind: SetupKind, names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let filter: BTreeSet<String> = names.into_iter().map(Into::into).collect();
        let setup = Setup {
            kind,
            filter: Some(filter),
        };
        setup.check()?;
        Ok(setup)
    }

    fn check(&self) -> Result<()> {
        let Some(filter) = &self.filter else {
            return Ok(());
        };
        let bad = || BenchError::InvalidSetup(self.to_string());
        if filter.is_empty() || self.kind == SetupKind::U {
            return Err(bad());
        }
        for name in filter {
            let known = match self.kind {
                SetupKind::A => name.parse::<AugmentationKind>().is_ok(),
                SetupKind::C => name.parse::<CorruptionKind>().is_ok(),
                SetupKind::U => false,
            };
            if !known {
                return Err(bad());
            }
        }
        Ok(())
    }

    fn allows(&self, name: &str) -> bool {
        self.filter.as_ref().is_none_or(|f| f.contains(name))
    }

    /// Transforms applied to each inlier test image, paired with their
    /// stable transform index (see [`entry_seed`]), with seeds unset.
    ///
    /// Indices: augmentations `0..5` in [`AugmentationKind::ALL`] order;
    /// corruptions `5 + 5 * kind + (severity - 1)`.
    pub fn transforms(&self) -> Vec<(u64, TransformSpec)> {
        match self.kind {
            SetupKind::U => Vec::new(),
            SetupKind::A => AugmentationKind::ALL
                .iter()
                .enumerate()
                .filter(|(_, k)| self.allows(k.name()))
                .map(|(i, &k)| (i as u64, TransformSpec::augmentation(k, 0)))
                .collect(),
            SetupKind::C => CorruptionKind::ALL
                .iter()
                .filter(|k| self.allows(k.name()))
                .flat_map(|&k| {
                    Severity::all().map(move |s| {
                        let index = 5 + 5 * k.index() as u64 + s.row() as u64;
                        (index, TransformSpec::corruption(k, s, 0))
                    })
                })
                .collect(),
        }
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some(filter) = &self.filter {
            let names: Vec<&str> = filter.iter().map(String::as_str).collect();
            write!(f, ":{}", names.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for Setup {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        let kind = match head {
            "U" | "u" => SetupKind::U,
            "A" | "a" => SetupKind::A,
            "C" | "c" => SetupKind::C,
            _ => return Err(BenchError::InvalidSetup(s.to_string())),
        };
        match tail {
            None => Ok(Setup { kind, filter: None }),
            Some(t) => Setup::with_filter(kind, t.split(',').map(str::trim)),
        }
    }
}

impl TryFrom<String> for Setup {
    type Error = BenchError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Setup> for String {
    fn from(s: Setup) -> Self {
        s.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    Inlier,
    Outlier,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchEntry {
    pub id: String,
    pub source: String,
    /// Class of the source image.
    pub class: String,
    pub split: Split,
    /// Source image path relative to the manifest's `source_root`.
    pub path: String,
    pub transform: TransformSpec,
    pub truth: Truth,
}

/// Test set for one inlier class under one setup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchManifest {
    pub version: u32,
    pub dataset_name: String,
    pub inlier_class: String,
    pub setup: Setup,
    pub master_seed: u64,
    pub source_root: String,
    /// Train image ids of the inlier class.
    pub train: Vec<String>,
    pub entries: Vec<BenchEntry>,
}

/// FNV-1a 64 of the UTF-8 bytes.
fn fnv1a64(s: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(s.as_bytes());
    h.finish()
}

/// Seed of one transformed entry:
/// `mix64(mix64(master_seed ^ fnv1a64(source_id)) ^ transform_index)`,
/// where `mix64` is the SplitMix64 finalizer.
pub fn entry_seed(master_seed: u64, source_id: &str, transform_index: u64) -> u64 {
    mix64(mix64(master_seed ^ fnv1a64(source_id)) ^ transform_index)
}

fn with_seed(spec: TransformSpec, seed: u64) -> TransformSpec {
    match spec {
        TransformSpec::Identity => spec,
        TransformSpec::Corruption { kind, severity, .. } => {
            TransformSpec::corruption(kind, severity, seed)
        }
        TransformSpec::Augmentation { kind, .. } => TransformSpec::augmentation(kind, seed),
    }
}

/// Builds the manifest for inlier class `class`: every test image with the
/// identity transform, followed by each inlier test image under each
/// transform of `setup`.
pub fn build_manifest(
    src: &SourceManifest,
    class: &str,
    setup: &Setup,
    master_seed: u64,
) -> Result<BenchManifest> {
    let split = one_vs_rest_split(src, class)?;
    setup.check()?;
    let original = |img: &SourceImage| BenchEntry {
        id: img.id.clone(),
        source: img.id.clone(),
        class: img.class.clone(),
        split: img.split,
        path: img.path.clone(),
        transform: TransformSpec::Identity,
        truth: if img.class == class {
            Truth::Inlier
        } else {
            Truth::Outlier
        },
    };
    let mut entries: Vec<BenchEntry> = src.test_images().map(original).collect();
    let plan = setup.transforms();
    for img in src.test_images().filter(|i| i.class == class) {
        for &(index, spec) in &plan {
            let spec = with_seed(spec, entry_seed(master_seed, &img.id, index));
            entries.push(BenchEntry {
                id: format!("{}__{}", img.id, spec.tag()),
                transform: spec,
                ..original(img)
            });
        }
    }
    let manifest = BenchManifest {
        version: MANIFEST_VERSION,
        dataset_name: src.dataset_name.clone(),
        inlier_class: class.to_string(),
        setup: setup.clone(),
        master_seed,
        source_root: src.root.clone(),
        train: split.train,
        entries,
    };
    manifest.validate()?;
    Ok(manifest)
}

/// One manifest per class, in class order.
pub fn build_all(
    src: &SourceManifest,
    setup: &Setup,
    master_seed: u64,
) -> Result<Vec<BenchManifest>> {
    src.classes
        .iter()
        .map(|c| build_manifest(src, c, setup, master_seed))
        .collect()
}

impl BenchManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| BenchError::File {
            path: path.to_path_buf(),
            source,
        })?;
        let manifest: BenchManifest = serde_json::from_str(&text)?;
        manifest.validate()?;
        Ok(manifest)
    }

    /// Pretty JSON with a trailing newline; byte-stable for equal manifests.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| BenchError::File {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(BenchError::Invalid(format!(
                "unsupported manifest version {}",
                self.version
            )));
        }
        let mut ids = HashSet::new();
        for e in &self.entries {
            if !ids.insert(e.id.as_str()) {
                return Err(BenchError::DuplicateId(e.id.clone()));
            }
            let inlier = e.class == self.inlier_class;
            let expected = if inlier {
                Truth::Inlier
            } else {
                Truth::Outlier
            };
            if e.truth != expected {
                return Err(BenchError::Invalid(format!(
                    "entry `{}` has the wrong truth label",
                    e.id
                )));
            }
            if !e.transform.is_identity() && (!inlier || e.split != Split::Test) {
                return Err(BenchError::Invalid(format!(
                    "entry `{}` transforms an image outside the inlier test set",
                    e.id
                )));
            }
        }
        Ok(())
    }

    pub fn originals(&self) -> impl Iterator<Item = &BenchEntry> {
        self.entries.iter().filter(|e| e.transform.is_identity())
    }

    pub fn transformed(&self) -> impl Iterator<Item = &BenchEntry> {
        self.entries.iter().filter(|e| !e.transform.is_identity())
    }

    /// Where [`export`] writes an entry: `<class>/<entry id>.png`.
    pub fn export_path(entry: &BenchEntry) -> PathBuf {
        Path::new(&entry.class).join(format!("{}.png", entry.id))
    }
}

/// Decodes the entry's source image under `src_root` and applies its
/// transform.
pub fn materialize(entry: &BenchEntry, src_root: impl AsRef<Path>) -> Result<ImageF> {
    let path = src_root.as_ref().join(&entry.path);
    let img = load_image(&path).map_err(|source| BenchError::Load {
        entry: entry.id.clone(),
        path: path.clone(),
        source,
    })?;
    apply(&to_unit_float(&img), &entry.transform).map_err(|source| BenchError::Transform {
        entry: entry.id.clone(),
        source,
    })
}

/// Writes every entry as `out_dir/<class>/<entry id>.png`, in parallel on
/// the current rayon pool. Returns the number of files written.
pub fn export(
    manifest: &BenchManifest,
    src_root: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
) -> Result<usize> {
    let (src_root, out_dir) = (src_root.as_ref(), out_dir.as_ref());
    let classes: BTreeSet<&str> = manifest.entries.iter().map(|e| e.class.as_str()).collect();
    for class in classes {
        let dir = out_dir.join(class);
        fs::create_dir_all(&dir).map_err(|source| BenchError::File { path: dir, source })?;
    }
    manifest.entries.par_iter().try_for_each(|entry| {
        let img = materialize(entry, src_root)?;
        let path = out_dir.join(BenchManifest::export_path(entry));
        clamp_quantize(&img)
            .and_then(|q| save_png(&q, &path))
            .map_err(|source| BenchError::Write {
                entry: entry.id.clone(),
                path,
                source,
            })
    })?;
    Ok(manifest.entries.len())
}
