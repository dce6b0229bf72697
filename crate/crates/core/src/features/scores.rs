use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{knn_score, FeatureError, FeatureStore, Result};
use crate::benchgen::{BenchManifest, Truth};

/// One scored manifest entry. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub entry_id: String,
    /// Inlier class of the manifest the entry came from.
    pub inlier_class: String,
    pub source: String,
    pub truth: Truth,
    /// Transform tag, e.g. `identity`, `rot90`, `fog_s3`.
    pub transform: String,
    /// Transform kind without severity.
    pub kind: String,
    pub severity: Option<u8>,
    pub setup: String,
    pub adapted: bool,
    pub score: f64,
}

impl ScoreRow {
    pub fn is_original(&self) -> bool {
        self.kind == "identity"
    }
}

/// OOD scores for one or more manifests, in manifest order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn new(rows: Vec<ScoreRow>) -> Result<Self> {
        let table = ScoreTable { rows };
        table.validate()?;
        Ok(table)
    }

    /// Scores must be finite and non-negative, and each entry id may appear
    /// once per inlier class.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.rows {
            if !(r.score.is_finite() && r.score >= 0.0) {
                return Err(FeatureError::InvalidStore(format!(
                    "score {} of `{}` is not a finite non-negative number",
                    r.score, r.entry_id
                )));
            }
            if !seen.insert((r.inlier_class.as_str(), r.entry_id.as_str())) {
                return Err(FeatureError::InvalidStore(format!(
                    "entry `{}` scored twice for class `{}`",
                    r.entry_id, r.inlier_class
                )));
            }
        }
        Ok(())
    }

    pub fn extend(&mut self, other: ScoreTable) -> Result<()> {
        self.rows.extend(other.rows);
        self.validate()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        if self.rows.is_empty() {
            w.write_record(HEADER)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<ScoreRow>, _>>()?;
        ScoreTable::new(rows)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| FeatureError::io(path, e))?;
        Self::from_csv(&text)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()?).map_err(|e| FeatureError::io(path, e))
    }
}

const HEADER: [&str; 10] = [
    "entry_id",
    "inlier_class",
    "source",
    "truth",
    "transform",
    "kind",
    "severity",
    "setup",
    "adapted",
    "score",
];

/// Scores every manifest entry against the manifest's train rows.
///
/// `train` must contain the manifest's train ids and `test` its entry ids.
/// Entries are scored in parallel on the current rayon pool; row order is
/// manifest order.
pub fn score_manifest(
    train: &FeatureStore,
    test: &FeatureStore,
    manifest: &BenchManifest,
    k: usize,
) -> Result<ScoreTable> {
    if train.adapted() != test.adapted() {
        return Err(FeatureError::AdaptationMismatch {
            train: train.adapted(),
            test: test.adapted(),
        });
    }
    if train.dim() != test.dim() {
        return Err(FeatureError::DimMismatch {
            expected: train.dim(),
            actual: test.dim(),
        });
    }
    let reference = train.select(&manifest.train)?;
    if k == 0 || k > reference.rows() {
        return Err(FeatureError::InvalidK {
            k,
            rows: reference.rows(),
        });
    }
    let setup = manifest.setup.to_string();
    let rows = manifest
        .entries
        .par_iter()
        .map(|e| {
            let q = test
                .get(&e.id)
                .ok_or_else(|| FeatureError::MissingFeature { id: e.id.clone() })?;
            Ok(ScoreRow {
                entry_id: e.id.clone(),
                inlier_class: manifest.inlier_class.clone(),
                source: e.source.clone(),
                truth: e.truth,
                transform: e.transform.tag(),
                kind: e.transform.kind_name().to_string(),
                severity: e.transform.severity().map(|s| s.get()),
                setup: setup.clone(),
                adapted: test.adapted(),
                score: knn_score(&reference, q, k)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ScoreTable::new(rows)
}
