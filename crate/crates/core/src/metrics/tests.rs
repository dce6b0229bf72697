use proptest::prelude::*;

use super::*;
use crate::benchgen::Truth;
use crate::features::{ScoreRow, ScoreTable};

/// `(#{o > i} + #{o == i} / 2) / (n_i * n_o)` over all pairs.
fn pair_count(inliers: &[f64], outliers: &[f64]) -> f64 {
    let mut twice = 0u64;
    for &o in outliers {
        for &i in inliers {
            twice += if o > i {
                2
            } else if o == i {
                1
            } else {
                0
            };
        }
    }
    twice as f64 / (2 * inliers.len() * outliers.len()) as f64
}

#[test]
fn auroc_examples() {
    assert_eq!(auroc(&[0.1, 0.2], &[0.8, 0.9]).unwrap(), 1.0);
    assert_eq!(auroc(&[0.8, 0.9], &[0.1, 0.2]).unwrap(), 0.0);
    assert_eq!(auroc(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.5);
    assert_eq!(auroc(&[1.0, 3.0], &[2.0]).unwrap(), 0.5);
    assert!(matches!(
        auroc(&[], &[1.0]),
        Err(MetricsError::EmptyClass { side: "inlier", .. })
    ));
    assert!(matches!(
        auroc(&[1.0], &[]),
        Err(MetricsError::EmptyClass {
            side: "outlier",
            ..
        })
    ));
    assert!(matches!(
        auroc(&[f64::NAN], &[1.0]),
        Err(MetricsError::NonFinite(_))
    ));
}

#[test]
fn fifty_random_scores_match_pair_counting() {
    let key = crate::transforms::rng::Key::new(50);
    let inl: Vec<f64> = (0..50).map(|i| key.uniform(i)).collect();
    let out: Vec<f64> = (0..50).map(|i| key.uniform(1000 + i) + 0.2).collect();
    assert!((auroc(&inl, &out).unwrap() - pair_count(&inl, &out)).abs() <= 1e-12);
}

// Reference report rows: (transformed-set mean, original-set mean, GS),
// unadapted then adapted columns, in percent.
const REFERENCE_GS: [(f64, f64, f64); 12] = [
    (83.62, 90.19, -6.57),
    (68.40, 89.46, -21.06),
    (80.19, 94.91, -14.72),
    (93.88, 99.31, -5.43),
    (82.48, 90.19, -7.71),
    (70.50, 89.46, -18.96),
    (84.64, 94.91, -10.27),
    (92.61, 99.31, -6.70),
    (88.37, 95.00, -6.63),
    (90.86, 97.75, -6.89),
    (92.98, 98.81, -5.83),
    (94.18, 99.37, -5.19),
];

#[test]
fn gs_matches_reference_rows() {
    assert!((gs(0.8362, 0.9019) - -0.0657).abs() <= 5e-5);
    assert!((gs(0.9388, 0.9931) - -0.0543).abs() <= 5e-5);
    for (y, s, expected) in REFERENCE_GS {
        assert!(
            (gs(y / 100.0, s / 100.0) - expected / 100.0).abs() <= 5e-5,
            "{y} - {s}"
        );
    }
    assert_eq!(gs(0.7, 0.7), 0.0);
}

#[test]
fn reference_class_mean() {
    // setup U, per-class AUROC of one backbone
    let per_class = [
        88.60, 94.53, 85.95, 77.84, 91.87, 88.00, 94.47, 90.02, 94.05, 96.53,
    ];
    let mean = per_class.iter().sum::<f64>() / per_class.len() as f64;
    assert!((mean - 90.19).abs() < 0.005);
}

fn scores(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    // few distinct values force ties
    prop::collection::vec(
        prop_oneof![(0u8..6).prop_map(|v| v as f64), -10.0f64..10.0],
        len,
    )
}

proptest! {
    #[test]
    fn matches_pair_counting(inl in scores(1usize..200), out in scores(1usize..200)) {
        prop_assert!((auroc(&inl, &out).unwrap() - pair_count(&inl, &out)).abs() <= 1e-12);
    }

    #[test]
    fn invariant_under_increasing_maps(inl in scores(1usize..60), out in scores(1usize..60)) {
        let f = |v: &f64| (v * 0.5).exp() + 3.0;
        let a = auroc(&inl, &out).unwrap();
        let b = auroc(&inl.iter().map(f).collect::<Vec<_>>(), &out.iter().map(f).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn complement_symmetry(inl in prop::collection::hash_set(0u32..10_000, 1..50), out in prop::collection::hash_set(10_000u32..20_000, 1..50), shift in 0u32..20_000) {
        // distinct values, no ties
        let inl: Vec<f64> = inl.into_iter().map(|v| ((v + shift) % 20_000) as f64).collect();
        let out: Vec<f64> = out.into_iter().map(|v| ((v + shift) % 20_000) as f64).collect();
        prop_assert_eq!(auroc(&inl, &out).unwrap() + auroc(&out, &inl).unwrap(), 1.0);
    }

    #[test]
    fn gs_antisymmetry(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        prop_assert_eq!(gs(x, y), -gs(y, x));
    }
}

fn row(class: &str, id: &str, truth: Truth, transform: &str, score: f64) -> ScoreRow {
    let (kind, severity) = match transform.rsplit_once("_s") {
        Some((k, s)) if s.parse::<u8>().is_ok() => (k.to_string(), s.parse().ok()),
        _ => (transform.to_string(), None),
    };
    let source = id.split("__").next().unwrap().to_string();
    ScoreRow {
        entry_id: id.into(),
        inlier_class: class.into(),
        source,
        truth,
        transform: transform.into(),
        kind,
        severity,
        setup: "A".into(),
        adapted: false,
        score,
    }
}

fn originals(class: &str) -> Vec<ScoreRow> {
    vec![
        row(class, "i1", Truth::Inlier, "identity", 0.1),
        row(class, "i2", Truth::Inlier, "identity", 0.4),
        row(class, "o1", Truth::Outlier, "identity", 0.3),
        row(class, "o2", Truth::Outlier, "identity", 0.9),
    ]
}

#[test]
fn empty_alpha_gives_zero_gs() {
    let s = ScoreTable::new([originals("a"), originals("b")].concat()).unwrap();
    let r = evaluate(&s, &s, &EvalOptions::default()).unwrap();
    assert_eq!(r.gs, 0.0);
    assert_eq!(r.per_class_auroc, r.per_class_auroc_s);
    assert_eq!(r.mean_auroc, 0.75);
}

#[test]
fn per_transform_breakdown_for_setup_a() {
    let s = ScoreTable::new(originals("a")).unwrap();
    let mut y = originals("a");
    for (t, score) in [
        ("rot90", 0.95),
        ("rot270", 0.2),
        ("hflip", 0.05),
        ("crop_resize", 0.5),
        ("color_jitter", 0.35),
    ] {
        y.push(row("a", &format!("i1__{t}"), Truth::Inlier, t, score));
    }
    let y = ScoreTable::new(y).unwrap();
    let r = evaluate(&s, &y, &EvalOptions::default()).unwrap();
    let per = &r.per_transform_auroc["a"];
    assert_eq!(per.len(), 5);
    // originals alone: 3 of 4 pairs correct
    assert_eq!(per["hflip"], pair_count(&[0.1, 0.4, 0.05], &[0.3, 0.9]));
    assert_eq!(per["rot90"], pair_count(&[0.1, 0.4, 0.95], &[0.3, 0.9]));
    let all_inl = [0.1, 0.4, 0.95, 0.2, 0.05, 0.5, 0.35];
    assert_eq!(r.per_class_auroc["a"], pair_count(&all_inl, &[0.3, 0.9]));
    assert_eq!(r.gs, r.mean_auroc - r.mean_auroc_s);
    assert!(r.per_variant_auroc.is_empty());
}

#[test]
fn severity_aggregation() {
    let s = ScoreTable::new(originals("a")).unwrap();
    let mut y = originals("a");
    y.push(row("a", "i1__fog_s1", Truth::Inlier, "fog_s1", 0.2));
    y.push(row("a", "i1__fog_s5", Truth::Inlier, "fog_s5", 0.95));
    let y = ScoreTable::new(y).unwrap();
    let pooled = evaluate(&s, &y, &EvalOptions::default()).unwrap();
    let sev = evaluate(
        &s,
        &y,
        &EvalOptions {
            aggregation: Aggregation::SeverityMean,
            ..Default::default()
        },
    )
    .unwrap();
    let s1 = pair_count(&[0.1, 0.4, 0.2], &[0.3, 0.9]);
    let s5 = pair_count(&[0.1, 0.4, 0.95], &[0.3, 0.9]);
    assert_eq!(sev.per_class_auroc["a"], (s1 + s5) / 2.0);
    assert_eq!(
        pooled.per_class_auroc["a"],
        pair_count(&[0.1, 0.4, 0.2, 0.95], &[0.3, 0.9])
    );
    assert_eq!(pooled.per_variant_auroc["a"].len(), 2);
    assert_eq!(pooled.per_transform_auroc["a"].len(), 1);
}

#[test]
fn evaluate_errors() {
    let s = ScoreTable::new(originals("a")).unwrap();
    let y = ScoreTable::new(originals("b")).unwrap();
    assert!(matches!(
        evaluate(&s, &y, &EvalOptions::default()),
        Err(MetricsError::MissingClass(c)) if c == "b"
    ));
    let only_in = ScoreTable::new(vec![row("a", "i1", Truth::Inlier, "identity", 0.1)]).unwrap();
    assert!(matches!(
        evaluate(&only_in, &only_in, &EvalOptions::default()),
        Err(MetricsError::EmptyClass {
            side: "outlier",
            ..
        })
    ));
    let mut y = originals("a");
    y.push(row("a", "i1__rot90", Truth::Inlier, "rot90", 0.2));
    let y = ScoreTable::new(y).unwrap();
    assert!(matches!(
        evaluate(&y, &y, &EvalOptions::default()),
        Err(MetricsError::Inconsistent(_))
    ));
}

#[test]
fn table_rendering() {
    let s = ScoreTable::new(originals("a")).unwrap();
    let mut y = originals("a");
    y.push(row("a", "i1__rot90", Truth::Inlier, "rot90", 0.95));
    let y = ScoreTable::new(y).unwrap();
    let r = evaluate(
        &s,
        &y,
        &EvalOptions {
            model_tag: "toy".into(),
            ..Default::default()
        },
    )
    .unwrap();
    let rows = TableRow::pair(&r, None);
    let csv = TableRow::to_csv(&r.classes, &rows);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "Setup,Model,a,Mean,Mean(adapt.),GS,GS(adapt.)");
    assert_eq!(lines[1], "U,toy,75.00,75.00,N/A,N/A,N/A");
    assert_eq!(lines[2], "A,toy,50.00,50.00,N/A,-25.00,N/A");
    let text = TableRow::to_text(&r.classes, &rows);
    let last: Vec<&str> = text.lines().nth(3).unwrap().split_whitespace().collect();
    assert_eq!(last, ["A", "toy", "50.00", "50.00", "N/A", "-25.00", "N/A"]);
    let widths: Vec<usize> = text.lines().map(|l| l.len()).collect();
    assert_eq!(widths[0], widths[2]);
}

#[test]
fn scatter_pairs_link_originals() {
    let mut y = originals("a");
    y.push(row("a", "i2__rot90", Truth::Inlier, "rot90", 0.7));
    let y = ScoreTable::new(y).unwrap();
    let pairs = scatter_pairs(&y);
    assert_eq!(pairs.len(), 1);
    assert_eq!(
        (pairs[0].score_original, pairs[0].score_transformed),
        (0.4, 0.7)
    );
    assert!((pairs[0].norm_original - 0.375).abs() < 1e-12);
    assert!((pairs[0].norm_transformed - 0.75).abs() < 1e-12);
}
