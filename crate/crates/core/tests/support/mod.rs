//! Independent reference implementations shared by the property tests and
//! the acceptance harness.
#![allow(dead_code)]

use std::f64::consts::TAU;

use bandgcn::features::{FeatureVector11 as F, N_FEATURES};
use bandgcn::gcn::{backward_batch, batch_loss, forward_batch, GcnConfig, GcnParams};
use bandgcn::graphs::normalize;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

pub const M: usize = 256;

pub struct Dft {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Dft {
    pub fn new() -> Self {
        let cos = (0..M).map(|i| (TAU * i as f64 / M as f64).cos()).collect();
        let sin = (0..M).map(|i| (TAU * i as f64 / M as f64).sin()).collect();
        Self { cos, sin }
    }

    pub fn power(&self, y: &[f64], k: usize) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in y.iter().enumerate() {
            let idx = (j * k) % M;
            re += v * self.cos[idx];
            im -= v * self.sin[idx];
        }
        re * re + im * im
    }
}

pub fn avg(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn pop_var(v: &[f64]) -> f64 {
    let mu = avg(v);
    v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / v.len() as f64
}

pub fn diff(v: &[f64]) -> Vec<f64> {
    (1..v.len()).map(|i| v[i] - v[i - 1]).collect()
}

/// Straight-from-the-definition feature values, in the fixed order.
pub fn oracle(y: &[f64], dft: &Dft) -> [f64; N_FEATURES] {
    let powers: Vec<f64> = (1..=M / 2).map(|k| dft.power(y, k)).collect();
    let total: f64 = powers.iter().sum();
    let entropy = if total == 0.0 {
        0.0
    } else {
        powers
            .iter()
            .map(|p| p / total)
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln() / std::f64::consts::LN_2)
            .sum()
    };

    let mu = avg(y);
    let var = pop_var(y);
    let sigma = var.sqrt();
    let m3 = y.iter().map(|x| (x - mu).powi(3)).sum::<f64>() / M as f64;
    let m4 = y.iter().map(|x| (x - mu).powi(4)).sum::<f64>() / M as f64;
    let (skew, kurt) = if sigma == 0.0 { (0.0, 0.0) } else { (m3 / sigma.powi(3), m4 / (var * var)) };

    let d1 = diff(y);
    let d2 = diff(&d1);
    let mob = |a: &[f64], b: &[f64]| {
        let vb = pop_var(b);
        if vb == 0.0 {
            0.0
        } else {
            (pop_var(a) / vb).sqrt()
        }
    };
    let mobility = mob(&d1, y);
    let complexity = if mobility == 0.0 { 0.0 } else { mob(&d2, &d1) / mobility };

    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = (sorted[M / 2 - 1] + sorted[M / 2]) / 2.0;
    let max = *sorted.last().unwrap();

    [entropy, var, mobility, complexity, kurt, skew, sigma, max, var, median, mu]
}

pub fn random_frame(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let scale = 10f64.powf(rng.random_range(-3.0..3.0));
    let offset = rng.random_range(-2.0..2.0) * scale;
    match rng.random_range(0..4) {
        0 => (0..M).map(|_| offset + scale * rng.random_range(-1.0..1.0)).collect(),
        1 => {
            let n = Normal::new(offset, scale).unwrap();
            (0..M).map(|_| n.sample(rng)).collect()
        }
        2 => {
            let f = rng.random_range(0.5..60.0);
            let ph = rng.random_range(0.0..TAU);
            (0..M)
                .map(|j| {
                    let noise: f64 = StandardNormal.sample(rng);
                    offset + scale * ((TAU * f * j as f64 / M as f64 + ph).sin() + 0.1 * noise)
                })
                .collect()
        }
        _ => {
            // heavy-tailed: sparse spikes on a small background
            (0..M)
                .map(|_| {
                    let base: f64 = StandardNormal.sample(rng);
                    let spike = if rng.random::<f64>() < 0.02 { 20.0 } else { 0.0 };
                    offset + scale * (0.1 * base + spike)
                })
                .collect()
        }
    }
}

/// Magnitude against which a feature's rounding error is judged. Location
/// features are compared to the size of the samples, since their value can
/// sit near zero while the inputs do not.
pub fn reference_scale(idx: usize, y: &[f64], value: f64) -> f64 {
    let amp = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match idx {
        F::MEAN | F::MEDIAN | F::MAX_AMP => value.abs().max(amp),
        F::SKEWNESS => value.abs().max(1.0),
        _ => value.abs(),
    }
}

pub const FS: f64 = 256.0;

pub fn sine(freq: f64, n: usize, phase: f64) -> Vec<f64> {
    (0..n).map(|j| (TAU * freq * j as f64 / FS + phase).sin()).collect()
}

/// Amplitude of the `freq` component over the middle half of `y`, by a
/// least-squares fit of sin and cos.
pub fn steady_amplitude(y: &[f64], freq: f64) -> f64 {
    let (a, b) = (y.len() / 4, 3 * y.len() / 4);
    let (mut ss, mut cc, mut sc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (j, v) in y.iter().enumerate().take(b).skip(a) {
        let w = TAU * freq * j as f64 / FS;
        let (s, c) = w.sin_cos();
        ss += s * s;
        cc += c * c;
        sc += s * c;
        ys += v * s;
        yc += v * c;
    }
    let det = ss * cc - sc * sc;
    let p = (ys * cc - yc * sc) / det;
    let q = (yc * ss - ys * sc) / det;
    p.hypot(q)
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix.
pub fn jacobi_eigenvalues(m: &Array2<f64>) -> Vec<f64> {
    let mut a = m.clone();
    let n = a.nrows();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[[i, j]].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[[i, i]]).collect()
}

pub fn pairwise_auc(scores: &[f64], truth: &[u8]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &yi) in truth.iter().enumerate() {
        if yi != 1 {
            continue;
        }
        for (j, &yj) in truth.iter().enumerate() {
            if yj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

pub fn random_s(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < 0.5 {
                a[[i, j]] = 1.0;
                a[[j, i]] = 1.0;
            }
        }
    }
    normalize(&a).unwrap().s
}

pub fn model(dims: &[usize], seed: u64) -> GcnParams {
    let mut p = GcnParams::init(&GcnConfig {
        layer_dims: dims.to_vec(),
        seed,
        ..GcnConfig::default()
    })
    .unwrap();
    // non-zero bias so its gradient is exercised away from the init point
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5);
    p.readout_b.mapv_inplace(|_| rng.random_range(-0.5..0.5));
    p
}

pub fn loss_at(p: &GcnParams, s: &Array2<f64>, x: &Array2<f64>, n: usize, y: &[u8]) -> f64 {
    batch_loss(&forward_batch(p, s.view(), x.view(), n).unwrap(), y).unwrap()
}

/// Worst relative error between analytic and central-difference gradients,
/// or `None` when some pre-activation sits too close to the ReLU kink for
/// finite differences to be meaningful.
pub fn gradient_check(dims: &[usize], n: usize, batch: usize, seed: u64) -> Option<f64> {
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = random_s(n, &mut rng);
    let x = Array2::from_shape_fn((batch * n, dims[0]), |_| rng.random_range(-1.0..1.0));
    let y: Vec<u8> = (0..batch).map(|_| rng.random_range(0..2)).collect();
    let params = model(dims, seed);
    let cache = forward_batch(&params, s.view(), x.view(), n).unwrap();
    if cache.pre_activations.iter().flatten().any(|z| z.abs() < 1e-3) {
        return None;
    }
    let grads = backward_batch(&params, &cache, &y).unwrap();

    let mut worst = 0.0f64;
    let n_tensors = params.tensors().len();
    for t in 0..n_tensors {
        for i in 0..params.tensors()[t].len() {
            let mut plus = params.clone();
            plus.tensors_mut()[t][i] += h;
            let mut minus = params.clone();
            minus.tensors_mut()[t][i] -= h;
            let numeric = (loss_at(&plus, &s, &x, n, &y) - loss_at(&minus, &s, &x, n, &y)) / (2.0 * h);
            let analytic = grads.tensors()[t][i];
            let rel = (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    Some(worst)
}

pub fn run_restarts(dims: &[usize], batch: usize, restarts: usize) -> f64 {
    let mut worst = 0.0f64;
    let mut done = 0;
    let mut seed = 0u64;
    while done < restarts {
        seed += 1;
        if let Some(w) = gradient_check(dims, 4, batch, seed) {
            worst = worst.max(w);
            done += 1;
        }
        assert!(seed < 20 * restarts as u64, "too many kink rejections");
    }
    worst
}

