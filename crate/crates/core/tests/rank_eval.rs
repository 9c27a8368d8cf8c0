use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use texelatt_core::rank_eval::*;
use texelatt_core::Error;

fn values(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn column(pairs: &[(&str, f64)], gamma: f64) -> AttributeColumn<f64> {
    AttributeColumn::new("area", values(pairs), gamma).unwrap()
}

#[test]
fn separated_values_are_ordered() {
    let p = ground_truth_order(&column(&[("a", 1.0), ("b", 5.0)], 1.0)).unwrap();
    assert_eq!(p.ordered, [("b".to_string(), "a".to_string())]);
    assert!(p.unordered.is_empty());
}

#[test]
fn close_values_are_unordered() {
    let p = ground_truth_order(&column(&[("a", 1.0), ("b", 1.5)], 1.0)).unwrap();
    assert!(p.ordered.is_empty());
    assert_eq!(p.unordered, [("a".to_string(), "b".to_string())]);
}

#[test]
fn zero_gamma_orders_distinct_values() {
    let p = ground_truth_order(&column(&[("a", 1.0), ("b", 2.0), ("c", 3.0), ("d", -1.0)], 0.0)).unwrap();
    assert_eq!(p.ordered.len(), 6);
    assert!(p.unordered.is_empty());
}

#[test]
fn order_needs_two_images() {
    assert!(matches!(ground_truth_order(&column(&[("a", 1.0)], 0.0)), Err(Error::CorpusTooSmall { .. })));
}

#[test]
fn column_validates_label_and_gamma() {
    assert!(AttributeColumn::new("size", values(&[]), 0.1).is_err());
    assert!(AttributeColumn::new("area", values(&[]), -0.1).is_err());
    let c = AttributeColumn::with_gamma_fraction("density", values(&[("a", 2.0), ("b", 12.0)]), 0.05).unwrap();
    assert!((c.gamma - 0.5).abs() < 1e-12);
}

#[test]
fn truth_as_prediction_is_perfect() {
    let v = values(&[("a", 1.0), ("b", 1.02), ("c", 3.0), ("d", 7.5)]);
    let col = AttributeColumn::with_gamma_fraction("area", v.clone(), 0.05).unwrap();
    let p = ground_truth_order(&col).unwrap();
    let acc = ranking_accuracy(&v, &p).unwrap();
    assert_eq!(acc.ordered, Some(1.0));
    assert_eq!(acc.combined, 1.0);
    assert_eq!(acc.ordered_pairs + acc.unordered_pairs, 6);
}

#[test]
fn negated_prediction_is_zero() {
    let v = values(&[("a", 1.0), ("b", 2.0), ("c", 3.0)]);
    let p = ground_truth_order(&column(&[("a", 1.0), ("b", 2.0), ("c", 3.0)], 0.0)).unwrap();
    let neg: BTreeMap<String, f64> = v.iter().map(|(k, x)| (k.clone(), -x)).collect();
    let acc = ranking_accuracy(&neg, &p).unwrap();
    assert_eq!(acc.ordered, Some(0.0));
    assert_eq!(acc.combined, 0.0);
}

#[test]
fn missing_prediction_is_an_error() {
    let p = ground_truth_order(&column(&[("a", 1.0), ("b", 2.0)], 0.0)).unwrap();
    assert!(matches!(ranking_accuracy(&values(&[("a", 0.0)]), &p), Err(Error::UnknownImage(_))));
}

#[test]
fn all_unordered_reports_no_ordered_accuracy() {
    let v = values(&[("a", 1.0), ("b", 1.0)]);
    let p = ground_truth_order(&column(&[("a", 1.0), ("b", 1.0)], 0.5)).unwrap();
    let acc = ranking_accuracy(&v, &p).unwrap();
    assert_eq!(acc.ordered, None);
    assert_eq!(acc.combined, 1.0);
}

#[test]
fn random_predictions_score_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ids: Vec<String> = (0..21).map(|i| format!("i{i:02}")).collect();
    let truth: BTreeMap<String, f64> = ids.iter().enumerate().map(|(i, k)| (k.clone(), i as f64)).collect();
    let p = ground_truth_order(&AttributeColumn::new("area", truth, 0.0).unwrap()).unwrap();
    let pairs: Vec<(String, String)> = p.ordered.into_iter().take(200).collect();
    let p = OrderedPairs { ordered: pairs, unordered: Vec::new(), gamma: 0.0 };
    let mut total = 0.0;
    for _ in 0..50 {
        let pred: BTreeMap<String, f64> = ids.iter().map(|k| (k.clone(), rng.random::<f64>())).collect();
        total += ranking_accuracy(&pred, &p).unwrap().ordered.unwrap();
    }
    let mean = total / 50.0;
    assert!((mean - 0.5).abs() <= 0.1, "mean {mean}");
}

#[test]
fn separable_data_is_learned() {
    let x: Vec<Vec<f64>> = (0..40).map(|i| vec![if i < 20 { -1.0 - i as f64 / 10.0 } else { 1.0 + i as f64 / 10.0 }]).collect();
    let y: Vec<bool> = x.iter().map(|r| r[0] > 0.0).collect();
    assert_eq!(train_linear(&x, &y, FOLDS, 3).unwrap(), 1.0);
}

#[test]
fn independent_labels_score_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<Vec<f64>> = (0..200).map(|_| (0..8).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).collect();
    let y: Vec<bool> = (0..200).map(|i| i % 2 == 0).collect();
    let acc = train_linear(&x, &y, FOLDS, 9).unwrap();
    assert!((acc - 0.5).abs() <= 0.12, "accuracy {acc}");
}

#[test]
fn single_class_labels_fail() {
    let x = vec![vec![0.0]; 10];
    assert!(matches!(train_linear(&x, &[true; 10], FOLDS, 0), Err(Error::DegenerateLabels)));
    let y: Vec<bool> = (0..10).map(|i| i == 0).collect();
    assert!(matches!(train_linear(&x, &y, FOLDS, 0), Err(Error::DegenerateLabels)));
}

#[test]
fn ragged_rows_fail() {
    let x = vec![vec![0.0], vec![1.0, 2.0], vec![0.0], vec![1.0]];
    assert!(train_linear(&x, &[true, false, true, false], 2, 0).is_err());
    assert!(train_linear(&x[..2], &[true, false, true], 2, 0).is_err());
}

#[test]
fn folds_are_stratified_and_seeded() {
    let y: Vec<bool> = (0..53).map(|i| i % 3 == 0).collect();
    let f = stratified_folds(&y, 5, 1);
    assert_eq!(f, stratified_folds(&y, 5, 1));
    for k in 0..5 {
        let pos = (0..53).filter(|&i| f[i] == k && y[i]).count();
        let neg = (0..53).filter(|&i| f[i] == k && !y[i]).count();
        assert!((3..=4).contains(&pos), "fold {k} has {pos} positives");
        assert!((7..=8).contains(&neg), "fold {k} has {neg} negatives");
    }
}

#[test]
fn f32_harness_agrees() {
    let x: Vec<Vec<f32>> = (0..30).map(|i| vec![if i < 15 { -1.0 - i as f32 / 10.0 } else { 1.0 + i as f32 / 10.0 }, 0.3]).collect();
    let y: Vec<bool> = x.iter().map(|r| r[0] > 0.0).collect();
    assert_eq!(train_linear(&x, &y, FOLDS, 1).unwrap(), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn increasing_transform_keeps_accuracy(
        truth in prop::collection::vec(-100.0f64..100.0, 2..25),
        noise in prop::collection::vec(-50.0f64..50.0, 25),
        shift in -10.0f64..10.0,
        scale in 0.1f64..10.0,
    ) {
        let ids: Vec<String> = (0..truth.len()).map(|i| format!("i{i:02}")).collect();
        let col = AttributeColumn::new("area", ids.iter().cloned().zip(truth.iter().copied()).collect(), 0.0).unwrap();
        let p = ground_truth_order(&col).unwrap();
        let pred: BTreeMap<String, f64> = ids.iter().zip(&truth).zip(&noise).map(|((k, t), n)| (k.clone(), t + n)).collect();
        let warped: BTreeMap<String, f64> = pred.iter().map(|(k, v)| (k.clone(), (scale * v + shift).powi(3))).collect();
        let a = ranking_accuracy(&pred, &p).unwrap();
        let b = ranking_accuracy(&warped, &p).unwrap();
        prop_assert_eq!(a.ordered, b.ordered);
    }

    #[test]
    fn every_pair_is_classified(v in prop::collection::vec(-5.0f64..5.0, 2..30), gamma in 0.0f64..3.0) {
        let n = v.len();
        let col = AttributeColumn::new("density", v.into_iter().enumerate().map(|(i, x)| (format!("{i}"), x)).collect(), gamma).unwrap();
        let p = ground_truth_order(&col).unwrap();
        prop_assert_eq!(p.ordered.len() + p.unordered.len(), n * (n - 1) / 2);
        for (a, b) in &p.ordered {
            prop_assert!(col.values[a] - col.values[b] > gamma);
        }
        for (a, b) in &p.unordered {
            prop_assert!((col.values[a] - col.values[b]).abs() <= gamma);
        }
    }
}
