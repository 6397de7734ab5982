//! Adam with bias correction. The stabilizer sits inside the square root:
//! `θ ← θ − η · m̂ / sqrt(v̂ + ε)`.

use super::{GcnConfig, GcnError, GcnParams};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: GcnParams,
    pub v: GcnParams,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &GcnParams) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }
}

/// One update. Non-finite gradients reject the step and leave everything untouched.
pub fn adam_step(params: &mut GcnParams, grads: &GcnParams, state: &mut AdamState, config: &GcnConfig) -> Result<(), GcnError> {
    if !params.same_shape(grads) || !params.same_shape(&state.m) || !params.same_shape(&state.v) {
        return Err(GcnError::Shape {
            what: "gradients",
            expected: params.shapes().concat(),
            found: grads.shapes().concat(),
        });
    }
    for (name, g) in grads.tensor_names().into_iter().zip(grads.tensors()) {
        if let Some((index, &value)) = g.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GcnError::NonFiniteGradient { tensor: name, index, value });
        }
    }

    state.t += 1;
    let t = state.t as f64;
    let (b1, b2) = (config.beta1, config.beta2);
    let c1 = 1.0 - b1.powf(t);
    let c2 = 1.0 - b2.powf(t);
    let lr = config.learning_rate;
    let eps = config.epsilon;
    let tensors = params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.m.tensors_mut())
        .zip(state.v.tensors_mut());
    for (((theta, g), m), v) in tensors {
        for i in 0..theta.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            theta[i] -= lr * m_hat / (v_hat + eps).sqrt();
        }
    }
    Ok(())
}
