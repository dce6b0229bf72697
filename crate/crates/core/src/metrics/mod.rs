//! AUROC, the generalizability score and evaluation reports.

mod report;

use thiserror::Error;

pub use report::{
    evaluate, scatter_pairs, Aggregation, EvalOptions, EvalReport, ScatterPair, TableRow,
};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("class `{class}` has no {side} scores")]
    EmptyClass { class: String, side: &'static str },
    #[error("non-finite score {0}")]
    NonFinite(f64),
    #[error("class `{0}` is missing from the original-set scores")]
    MissingClass(String),
    #[error("inconsistent score tables: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = MetricsError> = std::result::Result<T, E>;

/// Area under the ROC curve with higher scores meaning more anomalous:
/// `P(outlier > inlier) + P(tie) / 2`, from midranks of the pooled scores.
pub fn auroc(inliers: &[f64], outliers: &[f64]) -> Result<f64> {
    let empty = |side| MetricsError::EmptyClass {
        class: String::new(),
        side,
    };
    if inliers.is_empty() {
        return Err(empty("inlier"));
    }
    if outliers.is_empty() {
        return Err(empty("outlier"));
    }
    if let Some(&bad) = inliers.iter().chain(outliers).find(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite(bad));
    }
    let mut pooled: Vec<(f64, bool)> = inliers
        .iter()
        .map(|&s| (s, false))
        .chain(outliers.iter().map(|&s| (s, true)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    // sum of outlier midranks, in half-units to stay in integers
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // ranks i+1..=j share the midrank (i + 1 + j) / 2
        let twice_mid = (i + 1 + j) as u128;
        let n_out = pooled[i..j].iter().filter(|p| p.1).count() as u128;
        twice_rank_sum += twice_mid * n_out;
        i = j;
    }
    let (n_in, n_out) = (inliers.len() as u128, outliers.len() as u128);
    let twice_u = twice_rank_sum - n_out * (n_out + 1);
    Ok(twice_u as f64 / (2 * n_in * n_out) as f64)
}

/// AUROC on the transformed test set minus AUROC on the original one.
/// Zero means no degradation; negative values mean the detector lost
/// ground on the transformed inliers.
pub fn gs(auroc_on_yprime: f64, auroc_on_s: f64) -> f64 {
    auroc_on_yprime - auroc_on_s
}

#[cfg(test)]
mod tests;
