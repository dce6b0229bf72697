//! Feature stores, L2 adaptation and exact nearest-neighbour OOD scores.

mod format;
mod scores;

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use format::{
    decode, encode, read_store, write_store, FormatError, HEADER_LEN, MAGIC, VERSION,
};
pub use scores::{score_manifest, ScoreRow, ScoreTable};

/// Rows with a Euclidean norm at or below this cannot be adapted.
pub const MIN_NORM: f64 = 1e-12;
/// Allowed deviation from unit norm for rows of an adapted store.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("invalid feature store: {0}")]
    InvalidStore(String),
    #[error("feature `{id}` has zero norm and cannot be adapted")]
    DegenerateFeature { id: String },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },
    #[error("InvalidK: k = {k} but the train store has {rows} rows (need 1 <= k <= rows)")]
    InvalidK { k: usize, rows: usize },
    #[error("no feature for id `{id}`")]
    MissingFeature { id: String },
    #[error("train store is {} but test store is {}", adapted_word(*.train), adapted_word(*.test))]
    AdaptationMismatch { train: bool, test: bool },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn adapted_word(adapted: bool) -> &'static str {
    if adapted {
        "adapted"
    } else {
        "unadapted"
    }
}

impl FeatureError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        FeatureError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = FeatureError> = std::result::Result<T, E>;

/// Immutable row-major matrix of feature vectors keyed by entry id.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStore {
    dim: usize,
    matrix: Vec<f32>,
    ids: Vec<String>,
    adapted: bool,
    index: HashMap<String, usize>,
}

impl FeatureStore {
    /// Validates shape, id uniqueness, finiteness and, for adapted stores,
    /// unit row norms.
    pub fn new(dim: usize, matrix: Vec<f32>, ids: Vec<String>, adapted: bool) -> Result<Self> {
        let invalid = |m: String| Err(FeatureError::InvalidStore(m));
        if dim == 0 || dim > u32::MAX as usize {
            return invalid(format!("dim {dim} out of range"));
        }
        if matrix.len() != ids.len() * dim {
            return invalid(format!(
                "{} values do not form {} rows of dim {dim}",
                matrix.len(),
                ids.len()
            ));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (row, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), row).is_some() {
                return invalid(format!("duplicate id `{id}`"));
            }
            let v = &matrix[row * dim..(row + 1) * dim];
            if v.iter().any(|x| !x.is_finite()) {
                return invalid(format!("row `{id}` has a non-finite value"));
            }
            if adapted && (norm(v) - 1.0).abs() > UNIT_NORM_TOLERANCE {
                return invalid(format!("row `{id}` of an adapted store is not unit-norm"));
            }
        }
        Ok(FeatureStore {
            dim,
            matrix,
            ids,
            adapted,
            index,
        })
    }

    pub fn from_rows(rows: Vec<(String, Vec<f32>)>, dim: usize, adapted: bool) -> Result<Self> {
        let mut matrix = Vec::with_capacity(rows.len() * dim);
        let mut ids = Vec::with_capacity(rows.len());
        for (id, v) in rows {
            if v.len() != dim {
                return Err(FeatureError::DimMismatch {
                    expected: dim,
                    actual: v.len(),
                });
            }
            matrix.extend_from_slice(&v);
            ids.push(id);
        }
        Self::new(dim, matrix, ids, adapted)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn adapted(&self) -> bool {
        self.adapted
    }

    pub fn matrix(&self) -> &[f32] {
        &self.matrix
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.matrix[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, id: &str) -> Option<&[f32]> {
        self.index.get(id).map(|&i| self.row(i))
    }

    /// New store with the rows for `ids`, in that order.
    pub fn select<S: AsRef<str>>(&self, ids: &[S]) -> Result<FeatureStore> {
        let mut matrix = Vec::with_capacity(ids.len() * self.dim);
        for id in ids {
            let v = self
                .get(id.as_ref())
                .ok_or_else(|| FeatureError::MissingFeature {
                    id: id.as_ref().to_string(),
                })?;
            matrix.extend_from_slice(v);
        }
        let ids = ids.iter().map(|s| s.as_ref().to_string()).collect();
        FeatureStore::new(self.dim, matrix, ids, self.adapted)
    }

    /// Multiplies every value by `c`. The result is unadapted.
    pub fn scaled(&self, c: f32) -> Result<FeatureStore> {
        let matrix = self.matrix.iter().map(|v| v * c).collect();
        FeatureStore::new(self.dim, matrix, self.ids.clone(), false)
    }
}

fn norm(v: &[f32]) -> f64 {
    v.iter()
        .map(|&x| (x as f64) * (x as f64))
        .sum::<f64>()
        .sqrt()
}

/// Scales every row to unit Euclidean norm.
pub fn l2_adapt(store: &FeatureStore) -> Result<FeatureStore> {
    let mut matrix = Vec::with_capacity(store.matrix.len());
    for (i, id) in store.ids.iter().enumerate() {
        let v = store.row(i);
        let n = norm(v);
        if n <= MIN_NORM {
            return Err(FeatureError::DegenerateFeature { id: id.clone() });
        }
        matrix.extend(v.iter().map(|&x| (x as f64 / n) as f32));
    }
    FeatureStore::new(store.dim, matrix, store.ids.clone(), true)
}

/// L2-normalizes a single vector, as [`l2_adapt`] does per row.
pub fn l2_normalize(v: &[f32]) -> Option<Vec<f32>> {
    let n = norm(v);
    (n > MIN_NORM).then(|| v.iter().map(|&x| (x as f64 / n) as f32).collect())
}

fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

/// Mean Euclidean distance from `query` to its `k` nearest train rows,
/// by exhaustive search.
pub fn knn_score(train: &FeatureStore, query: &[f32], k: usize) -> Result<f64> {
    if query.len() != train.dim {
        return Err(FeatureError::DimMismatch {
            expected: train.dim,
            actual: query.len(),
        });
    }
    if k == 0 || k > train.rows() {
        return Err(FeatureError::InvalidK {
            k,
            rows: train.rows(),
        });
    }
    // k smallest squared distances, ascending
    let mut best: Vec<f64> = Vec::with_capacity(k + 1);
    for row in train.matrix.chunks_exact(train.dim) {
        let d = squared_distance(query, row);
        if best.len() < k || d < best[k - 1] {
            let pos = best.partition_point(|&b| b <= d);
            best.insert(pos, d);
            best.truncate(k);
        }
    }
    Ok(best.iter().map(|d| d.sqrt()).sum::<f64>() / k as f64)
}

#[cfg(test)]
mod tests;
