//! Graph convolutional window classifier: `H ← ReLU(S·H·Θ)` per layer,
//! node-mean readout, linear softmax head, trained full-batch with Adam.

mod adam;
mod checkpoint;
mod model;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{Checkpoint, TensorRecord, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use model::{backward, backward_batch, batch_loss, forward, forward_batch, loss, propagate, softmax, ForwardCache, GcnParams};

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::balance::FeatureDataset;
use crate::features::SegmentFeatureMatrix;
use crate::graphs::EegGraph;

#[derive(Debug, Error, PartialEq)]
pub enum GcnError {
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("{what}: expected shape {expected:?}, found {found:?}")]
    Shape {
        what: &'static str,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("non-finite value in model input")]
    NonFiniteInput,
    #[error("label {0} out of range")]
    InvalidLabel(u8),
    #[error("cache does not match the parameters")]
    StaleCache,
    #[error("non-finite gradient {value} in {tensor}[{index}]")]
    NonFiniteGradient { tensor: String, index: usize, value: f64 },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set has only label {0}")]
    SingleClass(u8),
    #[error("loss became non-finite at epoch {0}")]
    Diverged(usize),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint was trained on graph {expected}, current graph is {found}")]
    FingerprintMismatch { expected: String, found: String },
    #[error("checkpoint band is {expected}, requested {found}")]
    BandMismatch { expected: String, found: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GcnConfig {
    /// Input width, hidden widths, class count. `[d0, 2]` means no graph layers.
    pub layer_dims: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for GcnConfig {
    fn default() -> Self {
        Self {
            layer_dims: vec![crate::features::NODE_FEATURE_DIM, 64, 32, 2],
            learning_rate: 0.01,
            epochs: 500,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl GcnConfig {
    pub fn validate(&self) -> Result<(), GcnError> {
        let bad = |m: String| Err(GcnError::InvalidConfig(m));
        if self.layer_dims.len() < 2 {
            return bad(format!("layer_dims needs at least input and output, got {:?}", self.layer_dims));
        }
        if self.layer_dims.contains(&0) {
            return bad(format!("zero width in layer_dims {:?}", self.layer_dims));
        }
        if self.layer_dims.last() != Some(&2) {
            return bad(format!("last layer width must be 2, got {:?}", self.layer_dims));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must lie in [0, 1), got {b}"));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: GcnParams,
    /// Full-batch loss at the start of each epoch.
    pub loss_history: Vec<f64>,
}

/// Full-batch Adam on flattened `n_nodes x d_0` rows of `data`.
pub fn train(data: &FeatureDataset, graph: &EegGraph, config: &GcnConfig) -> Result<TrainedModel, GcnError> {
    config.validate()?;
    if data.is_empty() {
        return Err(GcnError::EmptyTrainingSet);
    }
    match data.class_counts() {
        (0, _) => return Err(GcnError::SingleClass(1)),
        (_, 0) => return Err(GcnError::SingleClass(0)),
        _ => {}
    }
    let n = graph.n_nodes();
    let d0 = config.layer_dims[0];
    if data.dim() != n * d0 {
        return Err(GcnError::Shape {
            what: "training rows",
            expected: vec![data.len(), n * d0],
            found: vec![data.len(), data.dim()],
        });
    }
    let stacked = data.x.to_shape((data.len() * n, d0)).expect("row-major features");
    let s = graph.s.view();

    let mut params = GcnParams::init(config)?;
    let mut state = AdamState::new(&params);
    let mut loss_history = Vec::with_capacity(config.epochs);
    let mut cache = forward_batch(&params, s, stacked.view(), n)?;
    for epoch in 0..config.epochs {
        let loss = batch_loss(&cache, &data.y)?;
        if !loss.is_finite() {
            return Err(GcnError::Diverged(epoch));
        }
        loss_history.push(loss);
        let grads = backward_batch(&params, &cache, &data.y)?;
        adam_step(&mut params, &grads, &mut state, config)?;
        if epoch % 50 == 0 {
            log::debug!("epoch {epoch}: loss {loss:.6}");
        }
        if epoch + 1 < config.epochs {
            let first = cache.into_first_stage();
            cache = model::forward_first_stage(&params, s, first, n);
        }
    }
    Ok(TrainedModel { params, loss_history })
}

/// Seizure label from a probability pair; an exact tie is non-seizure.
pub fn label_from_probabilities(p: ArrayView1<f64>) -> u8 {
    (p[1] > p[0]) as u8
}

/// Label and seizure probability for one window.
pub fn predict(params: &GcnParams, graph: &EegGraph, features: &SegmentFeatureMatrix) -> Result<(u8, f64), GcnError> {
    let (p, _) = forward(params, graph.s.view(), features.node_features.view())?;
    Ok((label_from_probabilities(p.view()), p[1]))
}

/// Probability pairs for flattened rows, evaluated in bounded chunks.
pub fn predict_proba(params: &GcnParams, graph: &EegGraph, rows: ArrayView2<f64>) -> Result<ndarray::Array2<f64>, GcnError> {
    const CHUNK: usize = 512;
    let n = graph.n_nodes();
    let d0 = params.input_dim();
    if rows.ncols() != n * d0 {
        return Err(GcnError::Shape {
            what: "rows",
            expected: vec![rows.nrows(), n * d0],
            found: rows.shape().to_vec(),
        });
    }
    let mut out = ndarray::Array2::zeros((rows.nrows(), params.n_classes()));
    for start in (0..rows.nrows()).step_by(CHUNK) {
        let end = (start + CHUNK).min(rows.nrows());
        let chunk = rows.slice(ndarray::s![start..end, ..]);
        let stacked = chunk.to_shape(((end - start) * n, d0)).expect("reshape");
        let cache = forward_batch(params, graph.s.view(), stacked.view(), n)?;
        out.slice_mut(ndarray::s![start..end, ..]).assign(&cache.probabilities);
    }
    Ok(out)
}
