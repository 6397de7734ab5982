//! Seeded k-fold assignment, stratified by label where possible.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::check_binary;
use super::EvalError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    /// Fold of each sample.
    pub fold_of: Vec<usize>,
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
}

impl CvPlan {
    pub fn len(&self) -> usize {
        self.fold_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_of.is_empty()
    }

    /// `(train, test)` indices for one fold, each ascending.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.len()).partition(|&i| self.fold_of[i] != fold)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffles each class, then deals indices round-robin, continuing the
/// deal from one class into the next so fold sizes differ by at most one.
/// A class with fewer than `k` members falls back to an unstratified deal.
pub fn kfold_split(labels: &[u8], k: usize, seed: u64) -> Result<CvPlan, EvalError> {
    check_binary(labels)?;
    let n = labels.len();
    if k < 2 || n < k {
        return Err(EvalError::TooFewSamples { n, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        classes[l as usize].push(i);
    }
    let stratified = classes.iter().all(|c| c.len() >= k);
    if !stratified {
        log::warn!(
            "class sizes {:?} below k = {k}; folds are not stratified",
            classes.iter().map(Vec::len).collect::<Vec<_>>()
        );
        classes = vec![(0..n).collect()];
    }
    let mut fold_of = vec![0; n];
    let mut dealt = 0;
    for class in &mut classes {
        class.shuffle(&mut rng);
        for &i in class.iter() {
            fold_of[i] = dealt % k;
            dealt += 1;
        }
    }
    Ok(CvPlan {
        fold_of,
        k,
        seed,
        stratified,
    })
}

/// Seeded stratified two-way split; returns `(train, test)` ascending.
pub fn stratified_holdout(labels: &[u8], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    check_binary(labels)?;
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(EvalError::InvalidFraction(train_fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let n_train = (idx.len() as f64 * train_fraction).round() as usize;
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
