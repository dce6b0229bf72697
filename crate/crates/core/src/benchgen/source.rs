use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceImage {
    pub id: String,
    pub class: String,
    pub split: Split,
    /// Relative to the manifest's `root`.
    pub path: String,
}

/// A class-labeled image dataset with a train/test split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceManifest {
    pub dataset_name: String,
    pub classes: Vec<String>,
    /// Image root. A relative root is resolved against the manifest file's
    /// directory by [`SourceManifest::load`].
    #[serde(default = "default_root")]
    pub root: String,
    pub images: Vec<SourceImage>,
}

fn default_root() -> String {
    ".".to_string()
}

impl SourceManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| BenchError::File {
            path: path.to_path_buf(),
            source,
        })?;
        let mut src: SourceManifest = serde_json::from_str(&text)?;
        if Path::new(&src.root).is_relative() {
            let base = path.parent().unwrap_or(Path::new(""));
            src.root = base.join(&src.root).to_string_lossy().into_owned();
        }
        src.validate()?;
        Ok(src)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn root_path(&self) -> PathBuf {
        PathBuf::from(&self.root)
    }

    /// Checks id uniqueness, class membership, relative paths and that every
    /// class has at least one train and one test image.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(BenchError::Invalid(msg));
        let mut classes = HashSet::new();
        for c in &self.classes {
            if !classes.insert(c.as_str()) {
                return invalid(format!("class `{c}` listed twice"));
            }
        }
        let mut ids = HashSet::new();
        let mut seen: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for img in &self.images {
            // ids become file names on export
            if img.id.is_empty() || img.id.starts_with('.') || img.id.contains(['/', '\\']) {
                return invalid(format!("id `{}` is not a valid file stem", img.id));
            }
            if !ids.insert(img.id.as_str()) {
                return Err(BenchError::DuplicateId(img.id.clone()));
            }
            if !classes.contains(img.class.as_str()) {
                return Err(BenchError::UnknownClass(img.class.clone()));
            }
            let p = Path::new(&img.path);
            if !p
                .components()
                .all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
            {
                return invalid(format!(
                    "path `{}` of `{}` escapes the root",
                    img.path, img.id
                ));
            }
            let counts = seen.entry(img.class.as_str()).or_default();
            match img.split {
                Split::Train => counts.0 += 1,
                Split::Test => counts.1 += 1,
            }
        }
        for c in &self.classes {
            match seen.get(c.as_str()) {
                Some(&(train, test)) if train > 0 && test > 0 => {}
                _ => {
                    return invalid(format!(
                        "class `{c}` needs at least one train and one test image"
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.classes.iter().any(|c| c == class)
    }

    pub fn test_images(&self) -> impl Iterator<Item = &SourceImage> {
        self.images.iter().filter(|i| i.split == Split::Test)
    }
}

/// Ids of the one-vs-rest protocol for one inlier class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneVsRest {
    pub train: Vec<String>,
    pub test_inliers: Vec<String>,
    pub test_outliers: Vec<String>,
}

/// Train images of `class`; its test images are inliers and every other
/// class's test images are outliers.
pub fn one_vs_rest_split(src: &SourceManifest, class: &str) -> Result<OneVsRest> {
    if !src.has_class(class) {
        return Err(BenchError::UnknownClass(class.to_string()));
    }
    let mut split = OneVsRest {
        train: Vec::new(),
        test_inliers: Vec::new(),
        test_outliers: Vec::new(),
    };
    for img in &src.images {
        let bucket = match (img.split, img.class == class) {
            (Split::Train, true) => &mut split.train,
            (Split::Train, false) => continue,
            (Split::Test, true) => &mut split.test_inliers,
            (Split::Test, false) => &mut split.test_outliers,
        };
        bucket.push(img.id.clone());
    }
    Ok(split)
}
