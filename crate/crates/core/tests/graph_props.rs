mod support;

use bandgcn::graphs::{montage_graph, normalize, spectral_radius, validate, EdgeRule};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::jacobi_eigenvalues;

fn random_adjacency(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                a[[i, j]] = 1.0;
                a[[j, i]] = 1.0;
            }
        }
    }
    a
}

/// Circulant graph where each node links to its `k` nearest on each side.
fn circulant(n: usize, k: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, n), |(i, j)| {
        let d = i.abs_diff(j).min(n - i.abs_diff(j));
        (d >= 1 && d <= k) as u8 as f64
    })
}

#[test]
fn montage_graph_passes_validation() {
    let g = montage_graph(EdgeRule::default());
    let report = validate(&g);
    assert!(report.passed(), "{:?}", report.failures);
    assert_eq!(report.components, 1);
    assert!((report.spectral_radius - 1.0).abs() < 1e-9);
    let eig = jacobi_eigenvalues(&g.s);
    let rho = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!((rho - report.spectral_radius).abs() < 1e-9);
}

#[test]
fn complete_graph_closed_form() {
    for n in [2usize, 5, 23] {
        let a = Array2::from_shape_fn((n, n), |(i, j)| (i != j) as u8 as f64);
        let g = normalize(&a).unwrap();
        for v in g.s.iter() {
            assert!((v - 1.0 / n as f64).abs() <= 1e-12);
        }
    }
}

#[test]
fn regular_graphs_are_doubly_stochastic() {
    for (n, k) in [(6, 1), (10, 2), (23, 3), (23, 11)] {
        let g = normalize(&circulant(n, k)).unwrap();
        for i in 0..n {
            assert!((g.s.row(i).sum() - 1.0).abs() <= 1e-12);
            assert!((g.s.column(i).sum() - 1.0).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn eigenvalues_in_unit_interval_and_power_iteration_agrees(seed in any::<u64>(), n in 2usize..24, p in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = normalize(&random_adjacency(n, p, &mut rng)).unwrap();
        let eig = jacobi_eigenvalues(&g.s);
        for &l in &eig {
            prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&l), "eigenvalue {}", l);
        }
        let rho = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!((spectral_radius(&g.s) - rho).abs() < 1e-7, "{} vs {}", spectral_radius(&g.s), rho);
        for i in 0..n {
            prop_assert!(g.s[[i, i]] > 0.0);
            for j in 0..n {
                prop_assert!(g.s[[i, j]] >= 0.0);
                prop_assert!((g.s[[i, j]] - g.s[[j, i]]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn relabeling_commutes_with_normalization(seed in any::<u64>(), n in 2usize..24, p in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_adjacency(n, p, &mut rng);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let pa = Array2::from_shape_fn((n, n), |(i, j)| a[[perm[i], perm[j]]]);
        let s = normalize(&a).unwrap().s;
        let s_perm = normalize(&pa).unwrap().s;
        for i in 0..n {
            for j in 0..n {
                prop_assert!((s_perm[[i, j]] - s[[perm[i], perm[j]]]).abs() <= 1e-15);
            }
        }
    }
}
