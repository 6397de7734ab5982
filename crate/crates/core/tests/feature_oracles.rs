mod support;

use bandgcn::features::{FeatureExtractor, FeatureVector11 as F, FEATURE_NAMES, N_FEATURES};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{oracle, random_frame, reference_scale, Dft, M};

#[test]
fn features_match_definitional_oracles_on_1000_frames() {
    let dft = Dft::new();
    let mut ex = FeatureExtractor::new(M);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0.0f64; N_FEATURES];
    for _ in 0..1000 {
        let y = random_frame(&mut rng);
        let got = ex.frame(&y);
        let want = oracle(&y, &dft);
        for idx in 0..N_FEATURES {
            let tol = if idx == F::SPECTRAL_ENTROPY { 1e-6 } else { 1e-9 };
            let rel = (got.get(idx) - want[idx]).abs() / reference_scale(idx, &y, want[idx]).max(f64::MIN_POSITIVE);
            worst[idx] = worst[idx].max(rel);
            assert!(rel <= tol, "{}: {} vs {} (rel {rel:e})", FEATURE_NAMES[idx], got.get(idx), want[idx]);
        }
    }
    for (name, w) in FEATURE_NAMES.iter().zip(worst) {
        println!("{name:>16}: worst relative error {w:.2e}");
    }
}

#[test]
fn frame_invariants() {
    let mut ex = FeatureExtractor::new(M);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let y = random_frame(&mut rng);
        let f = ex.frame(&y);
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(f.get(F::STD) >= 0.0);
        let v = f.get(F::VARIANCE);
        assert!((v - f.get(F::STD).powi(2)).abs() <= 1e-12 * v.max(f64::MIN_POSITIVE));
        assert_eq!(f.get(F::ACTIVITY), v);
        assert!(lo <= f.get(F::MEAN) && f.get(F::MEAN) <= hi);
        assert!(lo <= f.get(F::MEDIAN) && f.get(F::MEDIAN) <= hi);
        assert_eq!(f.get(F::MAX_AMP), hi);
        let h = f.get(F::SPECTRAL_ENTROPY);
        assert!((0.0..=(M as f64 / 2.0).log2() + 1e-12).contains(&h));
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * scale.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn amplitude_scaling(seed in any::<u64>(), c in 1e-3f64..1e3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = random_frame(&mut rng);
        let scaled: Vec<f64> = y.iter().map(|v| c * v).collect();
        let mut ex = FeatureExtractor::new(M);
        let a = ex.frame(&y);
        let b = ex.frame(&scaled);
        let amp = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for idx in [F::MEAN, F::MEDIAN, F::MAX_AMP] {
            prop_assert!(close(b.get(idx), c * a.get(idx), c * amp), "{}", FEATURE_NAMES[idx]);
        }
        prop_assert!(close(b.get(F::STD), c * a.get(F::STD), c * a.get(F::STD)));
        for idx in [F::VARIANCE, F::ACTIVITY] {
            prop_assert!(close(b.get(idx), c * c * a.get(idx), c * c * a.get(idx)), "{}", FEATURE_NAMES[idx]);
        }
        for idx in [F::SKEWNESS, F::KURTOSIS, F::MOBILITY, F::COMPLEXITY, F::SPECTRAL_ENTROPY] {
            prop_assert!(close(b.get(idx), a.get(idx), a.get(idx).abs().max(1.0)), "{}", FEATURE_NAMES[idx]);
        }
    }

    #[test]
    fn time_reversal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = random_frame(&mut rng);
        let rev: Vec<f64> = y.iter().rev().copied().collect();
        let mut ex = FeatureExtractor::new(M);
        let a = ex.frame(&y);
        let b = ex.frame(&rev);
        let amp = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for idx in 0..N_FEATURES {
            let scale = match idx {
                F::MEAN | F::MEDIAN | F::MAX_AMP => amp,
                F::SKEWNESS => a.get(idx).abs().max(1.0),
                _ => a.get(idx).abs(),
            };
            prop_assert!(close(a.get(idx), b.get(idx), scale), "{}: {} vs {}", FEATURE_NAMES[idx], a.get(idx), b.get(idx));
        }
    }

    #[test]
    fn channel_permutation_permutes_rows(seed in any::<u64>(), channels in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = Array2::from_shape_fn((channels, 6 * M), |_| rng.random::<f64>() - 0.5);
        let mut perm: Vec<usize> = (0..channels).collect();
        for i in (1..channels).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let permuted = samples.select(ndarray::Axis(0), &perm);
        let mut ex = FeatureExtractor::new(M);
        let a = ex.node_features(samples.view(), M as f64).unwrap();
        let b = ex.node_features(permuted.view(), M as f64).unwrap();
        prop_assert_eq!(a.dim(), (channels, 66));
        for (i, &p) in perm.iter().enumerate() {
            prop_assert_eq!(b.row(i), a.row(p));
        }
        let again = ex.node_features(samples.view(), M as f64).unwrap();
        prop_assert_eq!(a, again);
    }
}
