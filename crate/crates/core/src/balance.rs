//! Minority oversampling by interpolation towards nearest minority neighbours.

use ndarray::{Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::features::SegmentFeatureMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum BalanceError {
    #[error("dataset has a single class (label {0})")]
    SingleClass(u8),
    #[error("need more than k = {k} minority rows, found {found}")]
    TooFewMinority { k: usize, found: usize },
    #[error("{rows} feature rows but {labels} labels")]
    Misaligned { rows: usize, labels: usize },
    #[error("label {0} is not binary")]
    NonBinary(u8),
}

/// Origin of a dataset row. Synthetic rows record the two real rows and the
/// interpolation weight, so they can be replayed exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Real,
    Synthetic { base: usize, neighbor: usize, lambda: f64 },
}

/// Flattened window features with binary labels, index-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    pub x: Array2<f64>,
    pub y: Vec<u8>,
    pub provenance: Vec<Provenance>,
}

impl FeatureDataset {
    pub fn new(x: Array2<f64>, y: Vec<u8>) -> Result<Self, BalanceError> {
        if x.nrows() != y.len() {
            return Err(BalanceError::Misaligned {
                rows: x.nrows(),
                labels: y.len(),
            });
        }
        if let Some(&bad) = y.iter().find(|&&l| l > 1) {
            return Err(BalanceError::NonBinary(bad));
        }
        let provenance = vec![Provenance::Real; y.len()];
        Ok(Self { x, y, provenance })
    }

    pub fn from_segments(rows: &[SegmentFeatureMatrix]) -> Result<Self, BalanceError> {
        let dim = rows.first().map_or(0, |r| r.node_features.len());
        let mut x = Array2::zeros((rows.len(), dim));
        for (mut dst, r) in x.rows_mut().into_iter().zip(rows) {
            dst.assign(&ndarray::ArrayView1::from(r.node_features.as_slice().expect("standard layout")));
        }
        Self::new(x, rows.iter().map(|r| r.label).collect())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// (negatives, positives)
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.y.iter().filter(|&&l| l == 1).count();
        (self.y.len() - pos, pos)
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            x: self.x.select(Axis(0), indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            provenance: vec![Provenance::Real; indices.len()],
        }
    }

    pub fn n_synthetic(&self) -> usize {
        self.provenance
            .iter()
            .filter(|p| matches!(p, Provenance::Synthetic { .. }))
            .count()
    }
}

fn sq_dist(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the `k` rows nearest to row `i` (Euclidean), excluding `i`.
/// Equal distances go to the lower index.
pub fn knn_minority(x_min: ArrayView2<f64>, i: usize, k: usize) -> Result<Vec<usize>, BalanceError> {
    let n = x_min.nrows();
    if k >= n {
        return Err(BalanceError::TooFewMinority { k, found: n });
    }
    let query = x_min.row(i);
    let mut dists: Vec<(f64, usize)> = (0..n)
        .filter(|&j| j != i)
        .map(|j| (sq_dist(query, x_min.row(j)), j))
        .collect();
    let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dists.len() {
        dists.select_nth_unstable_by(k, by_key);
        dists.truncate(k);
    }
    dists.sort_by(by_key);
    Ok(dists.into_iter().map(|(_, j)| j).collect())
}

/// Oversamples the minority class to parity with the majority.
///
/// Base rows are taken round-robin over the minority rows in dataset order;
/// for each, a neighbour is drawn uniformly among its `k` nearest and
/// `lambda ~ U[0, 1)`. Input rows are kept unchanged, synthetic rows are
/// appended after them.
pub fn smote(dataset: &FeatureDataset, k: usize, seed: u64) -> Result<FeatureDataset, BalanceError> {
    let (neg, pos) = dataset.class_counts();
    if neg == 0 || pos == 0 {
        return Err(BalanceError::SingleClass(if pos == 0 { 0 } else { 1 }));
    }
    let (minority_label, n_min, n_maj) = if pos <= neg { (1u8, pos, neg) } else { (0u8, neg, pos) };
    if n_min <= k {
        return Err(BalanceError::TooFewMinority { k, found: n_min });
    }
    let needed = n_maj - n_min;
    let minority: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.y[i] == minority_label).collect();
    let x_min = dataset.x.select(Axis(0), &minority);

    let mut neighbors: Vec<Option<Vec<usize>>> = vec![None; n_min];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = dataset.dim();
    let mut x = Array2::zeros((dataset.len() + needed, dim));
    x.slice_mut(ndarray::s![..dataset.len(), ..]).assign(&dataset.x);
    let mut y = dataset.y.clone();
    let mut provenance = dataset.provenance.clone();

    for s in 0..needed {
        let b = s % n_min;
        if neighbors[b].is_none() {
            neighbors[b] = Some(knn_minority(x_min.view(), b, k)?);
        }
        let nn_local = neighbors[b].as_ref().expect("filled above")[rng.random_range(0..k)];
        let lambda: f64 = rng.random();
        let base_row = x_min.row(b);
        let nn_row = x_min.row(nn_local);
        let mut dst = x.row_mut(dataset.len() + s);
        for ((d, &a), &c) in dst.iter_mut().zip(base_row.iter()).zip(nn_row.iter()) {
            *d = a + lambda * (c - a);
        }
        y.push(minority_label);
        provenance.push(Provenance::Synthetic {
            base: minority[b],
            neighbor: minority[nn_local],
            lambda,
        });
    }
    Ok(FeatureDataset { x, y, provenance })
}
