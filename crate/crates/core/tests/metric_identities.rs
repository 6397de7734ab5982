mod support;

use bandgcn::eval::{confusion, kfold_split, metrics, roc_auc, ConfusionMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::pairwise_auc;

/// Exact rational check: `value == num / den` with both sides computed from
/// integers; 0/0 is defined as 0.
fn ratio_matches(value: f64, num: u64, den: u64) -> bool {
    if den == 0 {
        value == 0.0
    } else {
        value == num as f64 / den as f64
    }
}

#[test]
fn threshold_metrics_on_10000_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for trial in 0..10_000 {
        let upper = if trial % 10 == 0 { 3 } else { 100_000 };
        let cm = ConfusionMatrix {
            tp: rng.random_range(0..upper),
            fn_: rng.random_range(0..upper),
            fp: rng.random_range(0..upper),
            tn: rng.random_range(0..upper),
        };
        let total = cm.tp + cm.fn_ + cm.fp + cm.tn;
        if total == 0 {
            assert!(metrics(&cm).is_err());
            continue;
        }
        let m = metrics(&cm).unwrap();
        assert_eq!(cm.total(), total);
        assert!(ratio_matches(m.accuracy, cm.tp + cm.tn, total), "{cm:?}");
        assert!(ratio_matches(m.sensitivity, cm.tp, cm.tp + cm.fn_), "{cm:?}");
        assert!(ratio_matches(m.specificity, cm.tn, cm.tn + cm.fp), "{cm:?}");
        assert!(ratio_matches(m.precision, cm.tp, cm.tp + cm.fp), "{cm:?}");
        // F1 = 2TP / (2TP + FP + FN), equal to the harmonic mean of
        // precision and recall
        assert!(ratio_matches(m.f1, 2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn_), "{cm:?}: {}", m.f1);
        assert_eq!((m.accuracy * total as f64).round() as u64, cm.tp + cm.tn);

        let swapped = ConfusionMatrix { tp: cm.tn, tn: cm.tp, fp: cm.fn_, fn_: cm.fp };
        let ms = metrics(&swapped).unwrap();
        assert_eq!(ms.sensitivity, m.specificity);
        assert_eq!(ms.specificity, m.sensitivity);
        assert_eq!(ms.accuracy, m.accuracy);
    }
}

#[test]
fn trapezoid_auc_matches_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..50 {
        let n = 500;
        let truth: Vec<u8> = (0..n).map(|_| (rng.random::<f64>() < 0.3) as u8).collect();
        let scores: Vec<f64> = truth
            .iter()
            .map(|&y| {
                let s = rng.random::<f64>() + 0.4 * y as f64;
                if trial % 2 == 0 { (s * 10.0).round() / 10.0 } else { s }
            })
            .collect();
        let (_, auc) = roc_auc(&scores, &truth).unwrap();
        assert!((auc - pairwise_auc(&scores, &truth)).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn confusion_counts_partition_the_samples(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..300)) {
        let (pred, truth): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let cm = confusion(&pred, &truth).unwrap();
        prop_assert_eq!(cm.total() as usize, pred.len());
        let tp = pred.iter().zip(&truth).filter(|(p, t)| **p == 1 && **t == 1).count() as u64;
        prop_assert_eq!(cm.tp, tp);
    }

    #[test]
    fn auc_invariant_under_monotone_maps(seed in any::<u64>(), n in 4usize..200) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut truth: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        truth[0] = 0;
        truth[1] = 1;
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mapped: Vec<f64> = scores.iter().map(|s| (2.0 * s).exp() + s * s * s).collect();
        let (_, a) = roc_auc(&scores, &truth).unwrap();
        let (_, b) = roc_auc(&mapped, &truth).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn every_index_in_exactly_one_fold(seed in any::<u64>(), n in 5usize..400, k in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<u8> = (0..n).map(|_| (rng.random::<f64>() < 0.2) as u8).collect();
        let plan = kfold_split(&labels, k, seed).unwrap();
        let mut seen = vec![0usize; n];
        for f in 0..k {
            let (train, test) = plan.split(f);
            prop_assert_eq!(train.len() + test.len(), n);
            for &i in &test {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }
}
