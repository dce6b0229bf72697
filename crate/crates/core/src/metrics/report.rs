use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{auroc, gs, MetricsError, Result};
use crate::benchgen::Truth;
use crate::features::{ScoreRow, ScoreTable};

/// How a corruption setup's per-class AUROC is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// One AUROC over the originals plus every transformed entry.
    #[default]
    Pooled,
    /// Mean over severities of the AUROC on the originals plus that
    /// severity's entries. Same as pooled when no entry has a severity.
    SeverityMean,
}

#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    pub model_tag: String,
    pub aggregation: Aggregation,
}

/// AUROC values are fractions in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_tag: String,
    pub setup: String,
    pub adapted: bool,
    pub aggregation: Aggregation,
    pub classes: Vec<String>,
    /// Per class, on the transformed test set.
    pub per_class_auroc: BTreeMap<String, f64>,
    /// Per class, on the original test set.
    pub per_class_auroc_s: BTreeMap<String, f64>,
    /// class -> transform kind -> AUROC on the originals plus that kind's
    /// entries.
    pub per_transform_auroc: BTreeMap<String, BTreeMap<String, f64>>,
    /// class -> transform tag (`fog_s3`) -> AUROC, for kinds with severities.
    pub per_variant_auroc: BTreeMap<String, BTreeMap<String, f64>>,
    pub mean_auroc: f64,
    pub mean_auroc_s: f64,
    pub gs: f64,
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn class_auroc<'a>(class: &str, rows: impl Iterator<Item = &'a ScoreRow>) -> Result<f64> {
    let (mut inl, mut out) = (Vec::new(), Vec::new());
    for r in rows {
        match r.truth {
            Truth::Inlier => inl.push(r.score),
            Truth::Outlier => out.push(r.score),
        }
    }
    auroc(&inl, &out).map_err(|e| match e {
        MetricsError::EmptyClass { side, .. } => MetricsError::EmptyClass {
            class: class.to_string(),
            side,
        },
        other => other,
    })
}

fn group_by_class(table: &ScoreTable) -> BTreeMap<&str, Vec<&ScoreRow>> {
    let mut by: BTreeMap<&str, Vec<&ScoreRow>> = BTreeMap::new();
    for r in &table.rows {
        by.entry(r.inlier_class.as_str()).or_default().push(r);
    }
    by
}

fn uniform<'a>(
    table: &'a ScoreTable,
    what: &str,
    field: impl Fn(&'a ScoreRow) -> String,
) -> Result<Option<String>> {
    let values: BTreeSet<String> = table.rows.iter().map(field).collect();
    match values.len() {
        0 => Ok(None),
        1 => Ok(values.into_iter().next()),
        _ => Err(MetricsError::Inconsistent(format!(
            "mixed {what} values {values:?}"
        ))),
    }
}

/// Per-class one-vs-rest AUROC on the original (`scores_s`) and transformed
/// (`scores_yprime`) test sets, per-transform breakdowns, class means and
/// the generalizability score.
///
/// `scores_s` must contain only original entries. Classes are taken from
/// `scores_yprime` and must all appear in `scores_s`.
pub fn evaluate(
    scores_s: &ScoreTable,
    scores_yprime: &ScoreTable,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    if let Some(r) = scores_s.rows.iter().find(|r| !r.is_original()) {
        return Err(MetricsError::Inconsistent(format!(
            "original-set scores contain transformed entry `{}`",
            r.entry_id
        )));
    }
    let adapted_s = uniform(scores_s, "adapted", |r| r.adapted.to_string())?;
    let adapted_y = uniform(scores_yprime, "adapted", |r| r.adapted.to_string())?;
    if adapted_s.is_some() && adapted_y.is_some() && adapted_s != adapted_y {
        return Err(MetricsError::Inconsistent(
            "one table is adapted and the other is not".into(),
        ));
    }
    let setup = uniform(scores_yprime, "setup", |r| r.setup.clone())?.unwrap_or_else(|| "U".into());
    let s_by = group_by_class(scores_s);
    let y_by = group_by_class(scores_yprime);
    if y_by.is_empty() {
        return Err(MetricsError::Inconsistent(
            "no transformed-set scores".into(),
        ));
    }

    let mut report = EvalReport {
        model_tag: opts.model_tag.clone(),
        setup,
        adapted: adapted_y.as_deref() == Some("true"),
        aggregation: opts.aggregation,
        classes: y_by.keys().map(|c| c.to_string()).collect(),
        per_class_auroc: BTreeMap::new(),
        per_class_auroc_s: BTreeMap::new(),
        per_transform_auroc: BTreeMap::new(),
        per_variant_auroc: BTreeMap::new(),
        mean_auroc: 0.0,
        mean_auroc_s: 0.0,
        gs: 0.0,
    };
    for (&class, rows) in &y_by {
        let s_rows = s_by
            .get(class)
            .ok_or_else(|| MetricsError::MissingClass(class.to_string()))?;
        let auroc_s = class_auroc(class, s_rows.iter().copied())?;

        let mut kinds: BTreeMap<&str, Vec<&ScoreRow>> = BTreeMap::new();
        let mut variants: BTreeMap<&str, Vec<&ScoreRow>> = BTreeMap::new();
        let mut severities: BTreeMap<u8, Vec<&ScoreRow>> = BTreeMap::new();
        for &r in rows.iter().filter(|r| !r.is_original()) {
            kinds.entry(r.kind.as_str()).or_default().push(r);
            if let Some(s) = r.severity {
                variants.entry(r.transform.as_str()).or_default().push(r);
                severities.entry(s).or_default().push(r);
            }
        }
        let with_originals = |extra: &[&ScoreRow]| {
            let originals = rows.iter().filter(|r| r.is_original());
            class_auroc(class, originals.chain(extra).copied())
        };

        let auroc_y = match opts.aggregation {
            Aggregation::SeverityMean if !severities.is_empty() => {
                let per = severities
                    .values()
                    .map(|rows| with_originals(rows))
                    .collect::<Result<Vec<_>>>()?;
                mean(per)
            }
            _ => class_auroc(class, rows.iter().copied())?,
        };
        let per_kind = kinds
            .iter()
            .map(|(k, rows)| Ok((k.to_string(), with_originals(rows)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let per_variant = variants
            .iter()
            .map(|(t, rows)| Ok((t.to_string(), with_originals(rows)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;

        report.per_class_auroc.insert(class.to_string(), auroc_y);
        report.per_class_auroc_s.insert(class.to_string(), auroc_s);
        report
            .per_transform_auroc
            .insert(class.to_string(), per_kind);
        if !per_variant.is_empty() {
            report
                .per_variant_auroc
                .insert(class.to_string(), per_variant);
        }
    }
    report.mean_auroc = mean(report.per_class_auroc.values().copied());
    report.mean_auroc_s = mean(report.per_class_auroc_s.values().copied());
    report.gs = gs(report.mean_auroc, report.mean_auroc_s);
    Ok(report)
}

impl EvalReport {
    /// Mean over classes of each transform's AUROC.
    pub fn per_transform_mean(&self) -> BTreeMap<String, f64> {
        let mut acc: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for per in self.per_transform_auroc.values() {
            for (k, &v) in per {
                acc.entry(k.clone()).or_default().push(v);
            }
        }
        acc.into_iter().map(|(k, v)| (k, mean(v))).collect()
    }

    /// `class,transform,auroc` rows in percent, per kind and per variant,
    /// followed by class means under the class name `mean`.
    pub fn breakdown_csv(&self) -> String {
        let mut out = String::from("class,transform,auroc\n");
        let mut means: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for (class, per) in self
            .per_transform_auroc
            .iter()
            .chain(&self.per_variant_auroc)
        {
            for (t, &v) in per {
                writeln!(out, "{class},{t},{:.2}", v * 100.0).unwrap();
                means.entry(t.as_str()).or_default().push(v);
            }
        }
        for (t, v) in means {
            writeln!(out, "mean,{t},{:.2}", mean(v) * 100.0).unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// One line of the results table. Values are fractions.
#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub setup: String,
    pub model: String,
    pub per_class: Vec<f64>,
    pub mean: f64,
    pub mean_adapted: Option<f64>,
    /// `None` for the original-set row.
    pub gs: Option<f64>,
    pub gs_adapted: Option<f64>,
}

impl TableRow {
    /// The original-set row and the transformed-set row for one model,
    /// optionally with the adapted-feature columns filled in.
    pub fn pair(report: &EvalReport, adapted: Option<&EvalReport>) -> [TableRow; 2] {
        let original = TableRow {
            setup: "U".into(),
            model: report.model_tag.clone(),
            per_class: report.per_class_auroc_s.values().copied().collect(),
            mean: report.mean_auroc_s,
            mean_adapted: adapted.map(|a| a.mean_auroc_s),
            gs: None,
            gs_adapted: None,
        };
        let transformed = TableRow {
            setup: report.setup.clone(),
            model: report.model_tag.clone(),
            per_class: report.per_class_auroc.values().copied().collect(),
            mean: report.mean_auroc,
            mean_adapted: adapted.map(|a| a.mean_auroc),
            gs: Some(report.gs),
            gs_adapted: adapted.map(|a| a.gs),
        };
        [original, transformed]
    }

    fn cells(&self) -> Vec<String> {
        let pct = |v: f64| format!("{:.2}", v * 100.0);
        let opt = |v: Option<f64>| v.map(pct).unwrap_or_else(|| "N/A".into());
        let mut cells = vec![self.setup.clone(), self.model.clone()];
        cells.extend(self.per_class.iter().map(|&v| pct(v)));
        cells.extend([
            pct(self.mean),
            opt(self.mean_adapted),
            opt(self.gs),
            opt(self.gs_adapted),
        ]);
        cells
    }

    fn header(classes: &[String]) -> Vec<String> {
        let mut h = vec!["Setup".to_string(), "Model".to_string()];
        h.extend(classes.iter().cloned());
        h.extend(["Mean", "Mean(adapt.)", "GS", "GS(adapt.)"].map(String::from));
        h
    }

    /// Comma-separated table in percent with two decimals.
    pub fn to_csv(classes: &[String], rows: &[TableRow]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::header(classes)).unwrap();
        for r in rows {
            w.write_record(r.cells()).unwrap();
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("UTF-8")
    }

    /// Column-aligned plain-text table.
    pub fn to_text(classes: &[String], rows: &[TableRow]) -> String {
        let mut grid = vec![Self::header(classes)];
        grid.extend(rows.iter().map(TableRow::cells));
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|c| grid.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, row) in grid.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (cell, &w))| {
                    if c < 2 {
                        format!("{cell:<w$}")
                    } else {
                        format!("{cell:>w$}")
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
            if i == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                out.push_str(&"-".repeat(total));
                out.push('\n');
            }
        }
        out
    }
}

/// Score of a transformed inlier next to the score of its original.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScatterPair {
    pub inlier_class: String,
    pub entry_id: String,
    pub transform: String,
    pub score_original: f64,
    pub score_transformed: f64,
    /// Min-max normalized over all scores of the table.
    pub norm_original: f64,
    pub norm_transformed: f64,
}

/// Pairs each transformed entry with the original entry of the same source
/// and class.
pub fn scatter_pairs(table: &ScoreTable) -> Vec<ScatterPair> {
    let lo = table
        .rows
        .iter()
        .map(|r| r.score)
        .fold(f64::INFINITY, f64::min);
    let hi = table
        .rows
        .iter()
        .map(|r| r.score)
        .fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let norm = |v: f64| (v - lo) / span;
    let originals: HashMap<(&str, &str), f64> = table
        .rows
        .iter()
        .filter(|r| r.is_original())
        .map(|r| ((r.inlier_class.as_str(), r.source.as_str()), r.score))
        .collect();
    table
        .rows
        .iter()
        .filter(|r| !r.is_original())
        .filter_map(|r| {
            let orig = *originals.get(&(r.inlier_class.as_str(), r.source.as_str()))?;
            Some(ScatterPair {
                inlier_class: r.inlier_class.clone(),
                entry_id: r.entry_id.clone(),
                transform: r.transform.clone(),
                score_original: orig,
                score_transformed: r.score,
                norm_original: norm(orig),
                norm_transformed: norm(r.score),
            })
        })
        .collect()
}

impl ScatterPair {
    pub fn to_csv(pairs: &[ScatterPair]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for p in pairs {
            w.serialize(p).unwrap();
        }
        if pairs.is_empty() {
            w.write_record([
                "inlier_class",
                "entry_id",
                "transform",
                "score_original",
                "score_transformed",
                "norm_original",
                "norm_transformed",
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("UTF-8")
    }
}
