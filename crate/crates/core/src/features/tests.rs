use proptest::prelude::*;

use super::*;

fn store(rows: &[&[f32]]) -> FeatureStore {
    let dim = rows[0].len();
    let rows = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (format!("r{i}"), r.to_vec()))
        .collect();
    FeatureStore::from_rows(rows, dim, false).unwrap()
}

#[test]
fn adapt_three_four_five() {
    let s = l2_adapt(&store(&[&[3.0, 4.0]])).unwrap();
    assert!(s.adapted());
    assert!((s.row(0)[0] - 0.6).abs() < 1e-7);
    assert!((s.row(0)[1] - 0.8).abs() < 1e-7);
}

#[test]
fn adapt_fixes_unit_vectors_and_rejects_zero() {
    let s = l2_adapt(&store(&[&[0.0, 1.0, 0.0], &[0.6, 0.0, 0.8]])).unwrap();
    assert_eq!(s.row(0), &[0.0, 1.0, 0.0]);
    for (a, b) in s.row(1).iter().zip([0.6, 0.0, 0.8]) {
        assert!((a - b).abs() <= 1e-7);
    }
    match l2_adapt(&store(&[&[1.0, 1.0], &[0.0, 0.0]])) {
        Err(FeatureError::DegenerateFeature { id }) => assert_eq!(id, "r1"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn knn_examples() {
    let train = store(&[&[0.0, 0.0], &[3.0, 4.0]]);
    assert_eq!(knn_score(&train, &[3.0, 4.0], 1).unwrap(), 0.0);
    assert_eq!(knn_score(&train, &[0.0, 1.0], 1).unwrap(), 1.0);
    let two = knn_score(&train, &[0.0, 1.0], 2).unwrap();
    assert!((two - (1.0 + 18f64.sqrt()) / 2.0).abs() < 1e-12);
}

#[test]
fn knn_errors() {
    let train = store(&[&[0.0, 0.0], &[3.0, 4.0]]);
    assert!(matches!(
        knn_score(&train, &[0.0], 1),
        Err(FeatureError::DimMismatch {
            expected: 2,
            actual: 1
        })
    ));
    assert!(matches!(
        knn_score(&train, &[0.0, 0.0], 0),
        Err(FeatureError::InvalidK { .. })
    ));
    assert!(matches!(
        knn_score(&train, &[0.0, 0.0], 3),
        Err(FeatureError::InvalidK { .. })
    ));
    let empty = FeatureStore::new(8, vec![], vec![], false).unwrap();
    assert!(matches!(
        knn_score(&empty, &[0.0; 8], 1),
        Err(FeatureError::InvalidK { k: 1, rows: 0 })
    ));
}

#[test]
fn store_validation() {
    assert!(FeatureStore::new(0, vec![], vec![], false).is_err());
    assert!(FeatureStore::new(2, vec![1.0], vec!["a".into()], false).is_err());
    assert!(FeatureStore::new(1, vec![1.0, 2.0], vec!["a".into(), "a".into()], false).is_err());
    assert!(FeatureStore::new(1, vec![f32::NAN], vec!["a".into()], false).is_err());
    assert!(FeatureStore::new(1, vec![2.0], vec!["a".into()], true).is_err());
    assert!(FeatureStore::new(1, vec![-1.0], vec!["a".into()], true).is_ok());
}

#[test]
fn hand_built_file_decodes() {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"OODF");
    bytes.extend_from_slice(&1u32.to_le_bytes());
    bytes.extend_from_slice(&2u32.to_le_bytes()); // dim
    bytes.extend_from_slice(&2u64.to_le_bytes()); // rows
    bytes.push(0);
    bytes.extend_from_slice(&[0; 7]);
    for v in [1.5f32, -2.0, 0.25, 8.0] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes.extend_from_slice(&2u64.to_le_bytes());
    for id in ["cat_1", "dög"] {
        bytes.extend_from_slice(&(id.len() as u16).to_le_bytes());
        bytes.extend_from_slice(id.as_bytes());
    }
    let s = decode(&bytes).unwrap();
    assert_eq!((s.dim(), s.rows(), s.adapted()), (2, 2, false));
    assert_eq!(s.matrix(), &[1.5, -2.0, 0.25, 8.0]);
    assert_eq!(s.ids(), &["cat_1".to_string(), "dög".to_string()]);
    assert_eq!(s.get("dög"), Some(&[0.25f32, 8.0][..]));
    assert_eq!(encode(&s).unwrap(), bytes);
}

#[test]
fn every_truncation_is_rejected() {
    let s = store(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
    let bytes = encode(&s).unwrap();
    for len in 0..bytes.len() {
        match decode(&bytes[..len]) {
            Err(FeatureError::Format(e)) => assert!(e.offset <= len as u64),
            other => panic!("prefix {len}: {other:?}"),
        }
    }
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(matches!(decode(&extra), Err(FeatureError::Format(_))));
}

#[test]
fn header_errors_carry_offsets() {
    let bytes = encode(&store(&[&[1.0]])).unwrap();
    let offset = |b: &[u8]| match decode(b) {
        Err(FeatureError::Format(e)) => e.offset,
        other => panic!("{other:?}"),
    };
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert_eq!(offset(&bad), 0);
    let mut bad = bytes.clone();
    bad[4] = 2;
    assert_eq!(offset(&bad), 4);
    let mut bad = bytes.clone();
    bad[20] = 7;
    assert_eq!(offset(&bad), 20);
    let mut bad = bytes.clone();
    bad[8..12].copy_from_slice(&0u32.to_le_bytes());
    assert_eq!(offset(&bad), 8);
}

#[test]
fn huge_row_count_is_truncation_not_allocation() {
    let mut bytes = encode(&store(&[&[1.0]])).unwrap();
    bytes[12..20].copy_from_slice(&u64::MAX.to_le_bytes());
    assert!(matches!(decode(&bytes), Err(FeatureError::Format(_))));
}

#[test]
fn empty_store_round_trips() {
    let s = FeatureStore::new(8, vec![], vec![], false).unwrap();
    let back = decode(&encode(&s).unwrap()).unwrap();
    assert_eq!(back, s);
    assert_eq!(encode(&s).unwrap().len(), HEADER_LEN + 8);
}

#[test]
fn adapted_flag_round_trips() {
    let s = l2_adapt(&store(&[&[1.0, 2.0], &[3.0, -1.0]])).unwrap();
    let back = decode(&encode(&s).unwrap()).unwrap();
    assert!(back.adapted());
    assert_eq!(back, s);
}

fn matrix_strategy() -> impl Strategy<Value = (usize, Vec<f32>)> {
    (1usize..6, 1usize..8).prop_flat_map(|(dim, rows)| {
        (
            Just(dim),
            prop::collection::vec(prop_oneof![-100f32..100.0, 0.5f32..2.0], dim * rows),
        )
    })
}

fn from_matrix(dim: usize, matrix: Vec<f32>) -> FeatureStore {
    let ids = (0..matrix.len() / dim).map(|i| format!("id{i}")).collect();
    FeatureStore::new(dim, matrix, ids, false).unwrap()
}

fn max_abs_diff(a: &FeatureStore, b: &FeatureStore) -> f32 {
    a.matrix()
        .iter()
        .zip(b.matrix())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f32::max)
}

proptest! {
    #[test]
    fn adaptation_is_idempotent((dim, m) in matrix_strategy()) {
        let s = from_matrix(dim, m);
        prop_assume!(s.ids().iter().all(|id| norm(s.get(id).unwrap()) > 1e-3));
        let once = l2_adapt(&s).unwrap();
        let twice = l2_adapt(&once).unwrap();
        prop_assert!(max_abs_diff(&once, &twice) <= 1e-6);
    }

    #[test]
    fn adaptation_is_scale_invariant((dim, m) in matrix_strategy(), c in prop_oneof![Just(0.5f32), Just(2.0), Just(10.0), 0.01f32..100.0]) {
        let s = from_matrix(dim, m);
        prop_assume!(s.ids().iter().all(|id| norm(s.get(id).unwrap()) > 1e-3));
        let a = l2_adapt(&s).unwrap();
        let b = l2_adapt(&s.scaled(c).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&a, &b) <= 1e-6);
    }

    #[test]
    fn knn_is_permutation_invariant((dim, m) in matrix_strategy(), q in prop::collection::vec(-100f32..100.0, 5), k in 1usize..4, rot in 0usize..8) {
        let s = from_matrix(dim, m);
        prop_assume!(k <= s.rows());
        let q = &q[..dim.min(5)];
        prop_assume!(q.len() == dim);
        let mut ids: Vec<String> = s.ids().to_vec();
        let n = ids.len();
        ids.rotate_left(rot % n);
        ids.reverse();
        let shuffled = s.select(&ids).unwrap();
        prop_assert_eq!(knn_score(&s, q, k).unwrap(), knn_score(&shuffled, q, k).unwrap());
    }

    #[test]
    fn knn_zero_iff_query_is_a_train_row((dim, m) in matrix_strategy(), pick in 0usize..8) {
        let s = from_matrix(dim, m);
        let row = s.row(pick % s.rows()).to_vec();
        prop_assert_eq!(knn_score(&s, &row, 1).unwrap(), 0.0);
        let mut off = row.clone();
        off[0] += 1.0;
        let d = knn_score(&s, &off, 1).unwrap();
        let coincides = s.matrix().chunks_exact(dim).any(|r| r == off.as_slice());
        prop_assert_eq!(d <= 1e-9, coincides);
    }

    #[test]
    fn round_trip_is_bit_exact(dim in 1usize..40, rows in 0usize..12, seed in any::<u64>()) {
        let key = crate::transforms::rng::Key::new(seed);
        let matrix: Vec<f32> = (0..dim * rows)
            .map(|i| f32::from_bits(key.bits(i as u64) as u32))
            .map(|v| if v.is_finite() { v } else { 0.5 })
            .collect();
        let s = from_matrix(dim, matrix);
        let back = decode(&encode(&s).unwrap()).unwrap();
        let bits = |s: &FeatureStore| s.matrix().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&s));
        prop_assert_eq!(back.ids(), s.ids());
    }
}

#[test]
fn adapted_distance_ranks_like_cosine() {
    let key = crate::transforms::rng::Key::new(3);
    for trial in 0..50u64 {
        let k = key.derive(trial);
        let dim = 6;
        let raw = |base: u64, n: usize| -> FeatureStore {
            let m = (0..n * dim)
                .map(|i| k.normal(base + i as u64) as f32)
                .collect();
            from_matrix(dim, m)
        };
        let train = l2_adapt(&raw(0, 20)).unwrap();
        let queries = l2_adapt(&raw(10_000, 15)).unwrap();
        let mut by_dist: Vec<(f64, usize)> = Vec::new();
        let mut by_cos: Vec<(f64, usize)> = Vec::new();
        for i in 0..queries.rows() {
            let q = queries.row(i);
            by_dist.push((knn_score(&train, q, 1).unwrap(), i));
            let max_cos = (0..train.rows())
                .map(|j| {
                    q.iter()
                        .zip(train.row(j))
                        .map(|(a, b)| (a * b) as f64)
                        .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            by_cos.push((1.0 - max_cos, i));
        }
        by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
        by_cos.sort_by(|a, b| a.0.total_cmp(&b.0));
        let order = |v: &[(f64, usize)]| v.iter().map(|p| p.1).collect::<Vec<_>>();
        assert_eq!(order(&by_dist), order(&by_cos), "trial {trial}");
    }
}
