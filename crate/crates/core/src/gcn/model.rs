//! Parameters, the batched forward pass and its analytic gradient.
//!
//! A batch of graphs is stacked node-wise into one `(batch * n_nodes, dim)`
//! matrix, so each layer's feature transform is a single matrix product.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{GcnConfig, GcnError};

#[derive(Debug, Clone, PartialEq)]
pub struct GcnParams {
    /// `Θ^(k)`, shape `d_{k-1} x d_k`.
    pub layers: Vec<Array2<f64>>,
    pub readout_w: Array2<f64>,
    pub readout_b: Array1<f64>,
}

impl GcnParams {
    /// He-normal weights (`N(0, 2 / fan_in)`) drawn in layer order, zero bias.
    pub fn init(config: &GcnConfig) -> Result<Self, GcnError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut draw = |rows: usize, cols: usize| {
            let scale = (2.0 / rows as f64).sqrt();
            Array2::from_shape_simple_fn((rows, cols), || {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale
            })
        };
        let dims = &config.layer_dims;
        let n_layers = dims.len() - 2;
        let layers = (0..n_layers).map(|k| draw(dims[k], dims[k + 1])).collect();
        let readout_w = draw(dims[n_layers], dims[n_layers + 1]);
        Ok(Self {
            layers,
            readout_w,
            readout_b: Array1::zeros(dims[n_layers + 1]),
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self.layers.iter().map(|l| Array2::zeros(l.raw_dim())).collect(),
            readout_w: Array2::zeros(self.readout_w.raw_dim()),
            readout_b: Array1::zeros(self.readout_b.raw_dim()),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().unwrap_or(&self.readout_w).nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.readout_b.len()
    }

    pub fn tensor_names(&self) -> Vec<String> {
        (1..=self.layers.len())
            .map(|k| format!("theta_{k}"))
            .chain(["readout_w".to_string(), "readout_b".to_string()])
            .collect()
    }

    pub fn shapes(&self) -> Vec<Vec<usize>> {
        self.layers
            .iter()
            .map(|l| l.shape().to_vec())
            .chain([self.readout_w.shape().to_vec(), self.readout_b.shape().to_vec()])
            .collect()
    }

    /// Row-major views of every tensor, in `tensor_names` order.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .map(|l| l.as_slice().expect("standard layout"))
            .chain([
                self.readout_w.as_slice().expect("standard layout"),
                self.readout_b.as_slice().expect("standard layout"),
            ])
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .map(|l| l.as_slice_mut().expect("standard layout"))
            .chain([
                self.readout_w.as_slice_mut().expect("standard layout"),
                self.readout_b.as_slice_mut().expect("standard layout"),
            ])
            .collect()
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.shapes() == other.shapes()
    }
}

/// Everything the backward pass needs from one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub n_nodes: usize,
    pub batch: usize,
    pub s: Array2<f64>,
    /// `S·H^(k-1)` per layer. A model without graph layers keeps `X` here.
    pub propagated: Vec<Array2<f64>>,
    pub pre_activations: Vec<Array2<f64>>,
    pub activations: Vec<Array2<f64>>,
    /// Node-mean of the last representation, `(batch, d_L)`.
    pub pooled: Array2<f64>,
    pub logits: Array2<f64>,
    pub probabilities: Array2<f64>,
}

impl ForwardCache {
    /// Hands back the first-stage input so it can be reused next epoch.
    pub(crate) fn into_first_stage(mut self) -> Array2<f64> {
        self.propagated.swap_remove(0)
    }
}

/// `S` applied to every stacked graph in `h`.
pub fn propagate(s: ArrayView2<f64>, h: ArrayView2<f64>, n_nodes: usize) -> Array2<f64> {
    let (rows, d) = h.dim();
    let batch = rows / n_nodes;
    if batch == 1 {
        return s.dot(&h);
    }
    let stacked = h.to_shape((batch, n_nodes, d)).expect("rows divisible by n_nodes");
    let node_major = stacked.permuted_axes([1, 0, 2]);
    let node_major = node_major.to_shape((n_nodes, batch * d)).expect("contiguous copy");
    let mixed = s.dot(&node_major).into_shape_with_order((n_nodes, batch, d)).expect("shape");
    let back = mixed.permuted_axes([1, 0, 2]);
    back.to_shape((rows, d)).expect("contiguous copy").into_owned()
}

pub fn softmax(logits: ArrayView1<f64>) -> Array1<f64> {
    let max = logits.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let e = logits.mapv(|v| (v - max).exp());
    let z = e.sum();
    e / z
}

fn log_sum_exp(logits: ArrayView1<f64>) -> f64 {
    let max = logits.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    max + logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `-ln p_label`.
pub fn loss(probabilities: ArrayView1<f64>, label: u8) -> f64 {
    -probabilities[label as usize].ln()
}

/// Mean cross-entropy of a batch, evaluated from logits via log-sum-exp.
pub fn batch_loss(cache: &ForwardCache, labels: &[u8]) -> Result<f64, GcnError> {
    check_labels(labels, cache.batch, cache.logits.ncols())?;
    let total: f64 = cache
        .logits
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(row, &y)| log_sum_exp(row) - row[y as usize])
        .sum();
    Ok(total / cache.batch as f64)
}

fn check_labels(labels: &[u8], batch: usize, n_classes: usize) -> Result<(), GcnError> {
    if labels.len() != batch {
        return Err(GcnError::Shape {
            what: "labels",
            expected: vec![batch],
            found: vec![labels.len()],
        });
    }
    if let Some(&bad) = labels.iter().find(|&&y| y as usize >= n_classes) {
        return Err(GcnError::InvalidLabel(bad));
    }
    Ok(())
}

fn check_inputs(params: &GcnParams, s: ArrayView2<f64>, x: ArrayView2<f64>, n_nodes: usize) -> Result<(), GcnError> {
    if s.dim() != (n_nodes, n_nodes) {
        return Err(GcnError::Shape {
            what: "propagation matrix",
            expected: vec![n_nodes, n_nodes],
            found: s.shape().to_vec(),
        });
    }
    if n_nodes == 0 || !x.nrows().is_multiple_of(n_nodes) || x.nrows() == 0 || x.ncols() != params.input_dim() {
        return Err(GcnError::Shape {
            what: "node features",
            expected: vec![n_nodes, params.input_dim()],
            found: x.shape().to_vec(),
        });
    }
    if x.iter().chain(s.iter()).any(|v| !v.is_finite()) {
        return Err(GcnError::NonFiniteInput);
    }
    Ok(())
}

/// Probabilities and cache for one graph, `x` being `n_nodes x d_0`.
pub fn forward(params: &GcnParams, s: ArrayView2<f64>, x: ArrayView2<f64>) -> Result<(Array1<f64>, ForwardCache), GcnError> {
    let cache = forward_batch(params, s, x, x.nrows())?;
    Ok((cache.probabilities.row(0).to_owned(), cache))
}

/// Forward pass over graphs stacked as `(batch * n_nodes, d_0)`.
pub fn forward_batch(params: &GcnParams, s: ArrayView2<f64>, x: ArrayView2<f64>, n_nodes: usize) -> Result<ForwardCache, GcnError> {
    check_inputs(params, s, x, n_nodes)?;
    let first = if params.layers.is_empty() {
        x.to_owned()
    } else {
        propagate(s, x, n_nodes)
    };
    Ok(forward_first_stage(params, s, first, n_nodes))
}

/// Forward pass given the first-stage tensor (`S·X`, or `X` without graph
/// layers). Training reuses it across epochs.
pub(crate) fn forward_first_stage(params: &GcnParams, s: ArrayView2<f64>, first: Array2<f64>, n_nodes: usize) -> ForwardCache {
    let batch = first.nrows() / n_nodes;
    let mut propagated = Vec::with_capacity(params.layers.len().max(1));
    let mut pre_activations = Vec::with_capacity(params.layers.len());
    let mut activations: Vec<Array2<f64>> = Vec::with_capacity(params.layers.len());
    propagated.push(first);
    for (k, theta) in params.layers.iter().enumerate() {
        if k > 0 {
            let h = activations.last().expect("previous layer");
            propagated.push(propagate(s, h.view(), n_nodes));
        }
        let z = propagated[k].dot(theta);
        activations.push(z.mapv(|v| v.max(0.0)));
        pre_activations.push(z);
    }
    let last = activations.last().unwrap_or(&propagated[0]);
    let d = last.ncols();
    let pooled = last
        .to_shape((batch, n_nodes, d))
        .expect("stacked layout")
        .mean_axis(Axis(1))
        .expect("n_nodes > 0");
    let logits = pooled.dot(&params.readout_w) + &params.readout_b;
    let mut probabilities = logits.clone();
    for mut row in probabilities.rows_mut() {
        let p = softmax(row.view());
        row.assign(&p);
    }
    ForwardCache {
        n_nodes,
        batch,
        s: s.to_owned(),
        propagated,
        pre_activations,
        activations,
        pooled,
        logits,
        probabilities,
    }
}

/// Gradient of `-ln p_label` for a single-graph cache.
pub fn backward(params: &GcnParams, cache: &ForwardCache, label: u8) -> Result<GcnParams, GcnError> {
    backward_batch(params, cache, &[label])
}

/// Gradient of the mean batch cross-entropy. ReLU uses subgradient 0 at 0.
pub fn backward_batch(params: &GcnParams, cache: &ForwardCache, labels: &[u8]) -> Result<GcnParams, GcnError> {
    check_labels(labels, cache.batch, params.n_classes())?;
    let n_layers = params.layers.len();
    if cache.pre_activations.len() != n_layers
        || cache.pooled.ncols() != params.readout_w.nrows()
        || cache.logits.ncols() != params.n_classes()
    {
        return Err(GcnError::StaleCache);
    }
    for (z, theta) in cache.pre_activations.iter().zip(&params.layers) {
        if z.ncols() != theta.ncols() {
            return Err(GcnError::StaleCache);
        }
    }

    let n = cache.n_nodes;
    let mut grads = params.zeros_like();
    let mut dlogits = cache.probabilities.clone();
    for (mut row, &y) in dlogits.rows_mut().into_iter().zip(labels) {
        row[y as usize] -= 1.0;
    }
    dlogits /= cache.batch as f64;
    grads.readout_w = cache.pooled.t().dot(&dlogits);
    grads.readout_b = dlogits.sum_axis(Axis(0));
    if n_layers == 0 {
        return Ok(grads);
    }

    let dpooled = dlogits.dot(&params.readout_w.t()) / n as f64;
    let d_last = dpooled.ncols();
    let mut dh = Array2::zeros((cache.batch * n, d_last));
    for (b, row) in dpooled.rows().into_iter().enumerate() {
        dh.slice_mut(s![b * n..(b + 1) * n, ..]).assign(&row.broadcast((n, d_last)).expect("broadcast"));
    }
    for k in (0..n_layers).rev() {
        Zip::from(&mut dh).and(&cache.pre_activations[k]).for_each(|g, &z| {
            if z <= 0.0 {
                *g = 0.0;
            }
        });
        grads.layers[k] = cache.propagated[k].t().dot(&dh);
        if k > 0 {
            let dp = dh.dot(&params.layers[k].t());
            dh = propagate(cache.s.t(), dp.view(), n);
        }
    }
    Ok(grads)
}
