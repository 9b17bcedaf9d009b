//! Reference methods: diagonal AdaGrad, plain SGD and Adam.

use crate::error::{check_dim, Result};

use super::state::OptimizerState;

/// Diagonal AdaGrad with fixed numerator: `x_i ← x_i − γ g_i / √(Σ_t g_{i,t}²)`.
///
/// Accumulated sums live in `state.coords[i].alpha`. Coordinates whose sum is
/// still zero take a zero step.
pub fn step_adagrad(state: &mut OptimizerState, g: &[f64], gamma: f64) -> Result<()> {
    check_dim(state.dim(), g.len())?;
    check_dim(state.dim(), state.coords.len())?;
    for ((x, coord), &gi) in state.x.iter_mut().zip(&mut state.coords).zip(g) {
        coord.gamma = gamma;
        coord.alpha += gi * gi;
        *x -= coord.step_size() * gi;
    }
    finish(state, g);
    Ok(())
}

pub fn step_sgd(state: &mut OptimizerState, g: &[f64], lr: f64) -> Result<()> {
    check_dim(state.dim(), g.len())?;
    for (x, &gi) in state.x.iter_mut().zip(g) {
        *x -= lr * gi;
    }
    finish(state, g);
    Ok(())
}

fn finish(state: &mut OptimizerState, g: &[f64]) {
    state.z.copy_from_slice(&state.x);
    state.g_prev.copy_from_slice(g);
    state.k += 1;
    state.record_iterate();
}

/// First and second moment estimates for Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamMoments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamMoments {
    pub fn new(dim: usize) -> Self {
        Self {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with bias-corrected moments. Returns the mean per-coordinate step size
/// `lr / (√v̂ + ε)` of this step.
pub fn step_adam(
    state: &mut OptimizerState,
    moments: &mut AdamMoments,
    g: &[f64],
    params: &AdamParams,
) -> Result<f64> {
    check_dim(state.dim(), g.len())?;
    check_dim(state.dim(), moments.m.len())?;
    moments.t += 1;
    let t = moments.t as i32;
    let bc1 = 1.0 - params.beta1.powi(t);
    let bc2 = 1.0 - params.beta2.powi(t);
    let mut step_sum = 0.0;
    for i in 0..g.len() {
        let gi = g[i];
        moments.m[i] = params.beta1 * moments.m[i] + (1.0 - params.beta1) * gi;
        moments.v[i] = params.beta2 * moments.v[i] + (1.0 - params.beta2) * gi * gi;
        let m_hat = moments.m[i] / bc1;
        let v_hat = moments.v[i] / bc2;
        let step = params.lr / (v_hat.sqrt() + params.eps);
        step_sum += step;
        state.x[i] -= step * m_hat;
    }
    finish(state, g);
    Ok(if g.is_empty() {
        0.0
    } else {
        step_sum / g.len() as f64
    })
}
