//! Convex objectives with seeded stochastic gradient oracles.
//!
//! A [`Problem`] exposes the exact loss `f(x)`, a stochastic gradient
//! `∇f(x, ξ)` whose randomness is fully determined by an explicit
//! [`SeedState`], and the optimum `f*` when it is known.

use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use crate::data::{epoch_batches, Dataset};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_for, stream};

/// Randomness for a sequence of gradient draws: a run seed plus the index of
/// the next draw. Minibatch problems cache the current epoch's batches.
#[derive(Debug, Clone)]
pub struct SeedState {
    pub seed: u64,
    pub draw: u64,
    epoch_cache: Option<(u64, Vec<Vec<usize>>)>,
}

impl SeedState {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            draw: 0,
            epoch_cache: None,
        }
    }

    pub fn at(seed: u64, draw: u64) -> Self {
        Self {
            seed,
            draw,
            epoch_cache: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientSample {
    pub grad: Vec<f64>,
    /// `f(x, ξ)` for the same `ξ`.
    pub loss: f64,
}

pub trait Problem: Send + Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    /// Draws `∇f(x, ξ)` and advances `state` by one draw.
    fn sample(&self, x: &[f64], state: &mut SeedState) -> GradientSample;

    fn loss_full(&self, x: &[f64]) -> f64;

    /// Exact (sub)gradient of [`Problem::loss_full`].
    fn gradient_full(&self, x: &[f64]) -> Vec<f64>;

    fn f_star(&self) -> Option<f64> {
        None
    }

    fn accuracy(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// True when [`Problem::sample`] ignores its seed.
    fn is_deterministic(&self) -> bool;

    /// Draws per pass over the data, for minibatch problems.
    fn draws_per_epoch(&self) -> Option<usize> {
        None
    }

    /// False at points where the objective is not differentiable.
    fn is_smooth_at(&self, _x: &[f64]) -> bool {
        true
    }

    fn grad_sample(&self, x: &[f64], state: &mut SeedState) -> Vec<f64> {
        self.sample(x, state).grad
    }
}

/// `f(x) = |x|` in one dimension. The subgradient at `0` is `0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AbsValue;

pub fn abs_value() -> AbsValue {
    AbsValue
}

impl Problem for AbsValue {
    fn name(&self) -> String {
        "abs".into()
    }

    fn dim(&self) -> usize {
        1
    }

    fn sample(&self, x: &[f64], state: &mut SeedState) -> GradientSample {
        state.draw += 1;
        GradientSample {
            grad: self.gradient_full(x),
            loss: self.loss_full(x),
        }
    }

    fn loss_full(&self, x: &[f64]) -> f64 {
        x[0].abs()
    }

    fn gradient_full(&self, x: &[f64]) -> Vec<f64> {
        let g = if x[0] > 0.0 {
            1.0
        } else if x[0] < 0.0 {
            -1.0
        } else {
            0.0
        };
        vec![g]
    }

    fn f_star(&self) -> Option<f64> {
        Some(0.0)
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn is_smooth_at(&self, x: &[f64]) -> bool {
        x[0] != 0.0
    }
}

/// `f(x) = ½ Σ dᵢ xᵢ²`, with optional additive Gaussian gradient noise.
#[derive(Debug, Clone)]
pub struct Quadratic {
    diag: Vec<f64>,
    noise_std: f64,
}

pub fn quadratic(diag: Vec<f64>, noise_std: f64) -> Result<Quadratic> {
    if diag.is_empty() {
        return Err(Error::InvalidParam(
            "quadratic needs at least one coordinate".into(),
        ));
    }
    if let Some(d) = diag.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(Error::InvalidParam(format!(
            "quadratic diagonal entries must be positive, got {d}"
        )));
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "noise_std must be nonnegative, got {noise_std}"
        )));
    }
    Ok(Quadratic { diag, noise_std })
}

impl Quadratic {
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }
}

impl Problem for Quadratic {
    fn name(&self) -> String {
        "quadratic".into()
    }

    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn sample(&self, x: &[f64], state: &mut SeedState) -> GradientSample {
        let mut grad = self.gradient_full(x);
        let mut loss = self.loss_full(x);
        if self.noise_std > 0.0 {
            let mut rng = rng_for(state.seed, &[stream::NOISE, state.draw]);
            for (g, xi) in grad.iter_mut().zip(x) {
                let noise: f64 = StandardNormal.sample(&mut rng);
                let noise = self.noise_std * noise;
                *g += noise;
                loss += noise * xi;
            }
        }
        state.draw += 1;
        GradientSample { grad, loss }
    }

    fn loss_full(&self, x: &[f64]) -> f64 {
        0.5 * self
            .diag
            .iter()
            .zip(x)
            .map(|(d, xi)| d * xi * xi)
            .sum::<f64>()
    }

    fn gradient_full(&self, x: &[f64]) -> Vec<f64> {
        self.diag.iter().zip(x).map(|(d, xi)| d * xi).collect()
    }

    fn f_star(&self) -> Option<f64> {
        Some(0.0)
    }

    fn is_deterministic(&self) -> bool {
        self.noise_std == 0.0
    }
}

/// A constant objective; every gradient is zero.
#[derive(Debug, Clone)]
pub struct Constant {
    pub dim: usize,
    pub value: f64,
}

pub fn constant(dim: usize, value: f64) -> Constant {
    Constant { dim, value }
}

impl Problem for Constant {
    fn name(&self) -> String {
        "constant".into()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, _x: &[f64], state: &mut SeedState) -> GradientSample {
        state.draw += 1;
        GradientSample {
            grad: vec![0.0; self.dim],
            loss: self.value,
        }
    }

    fn loss_full(&self, _x: &[f64]) -> f64 {
        self.value
    }

    fn gradient_full(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.dim]
    }

    fn f_star(&self) -> Option<f64> {
        Some(self.value)
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// Binary logistic regression without bias or regularization,
/// `f(w) = (1/N) Σ log(1 + exp(−yⱼ⟨w, xⱼ⟩))`.
///
/// Stochastic gradients are minibatch means; batches come from a fresh
/// seeded permutation each epoch, without replacement inside an epoch.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    data: Arc<Dataset>,
    batch_size: usize,
}

pub fn logistic_regression(data: Arc<Dataset>, batch_size: usize) -> Result<LogisticRegression> {
    if data.is_empty() {
        return Err(Error::Dataset(
            "logistic regression on an empty dataset".into(),
        ));
    }
    if batch_size == 0 {
        return Err(Error::InvalidParam("batch_size must be at least 1".into()));
    }
    if let Some(e) = data
        .examples
        .iter()
        .find(|e| e.label != 1.0 && e.label != -1.0)
    {
        return Err(Error::Dataset(format!(
            "logistic regression needs labels in {{-1, +1}}, found {}",
            e.label
        )));
    }
    Ok(LogisticRegression { data, batch_size })
}

/// `log(1 + eᵗ)` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl LogisticRegression {
    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    /// Mean loss and gradient over the examples in `batch`.
    pub fn batch_loss_grad(&self, w: &[f64], batch: &[usize]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.data.dim];
        let mut loss = 0.0;
        for &j in batch {
            let e = &self.data.examples[j];
            let margin = e.label * e.dot(w);
            loss += softplus(-margin);
            e.axpy(-e.label * sigmoid(-margin), &mut grad);
        }
        let n = batch.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        (loss / n, grad)
    }

    fn num_batches(&self) -> usize {
        self.data.len().div_ceil(self.batch_size)
    }
}

impl Problem for LogisticRegression {
    fn name(&self) -> String {
        "logistic".into()
    }

    fn dim(&self) -> usize {
        self.data.dim
    }

    fn sample(&self, w: &[f64], state: &mut SeedState) -> GradientSample {
        let nb = self.num_batches() as u64;
        let epoch = state.draw / nb;
        let index = (state.draw % nb) as usize;
        let stale = state.epoch_cache.as_ref().is_none_or(|(e, _)| *e != epoch);
        if stale {
            let seed = derive_seed(state.seed, &[stream::EPOCH, epoch]);
            state.epoch_cache =
                Some((epoch, epoch_batches(self.data.len(), self.batch_size, seed)));
        }
        let (_, batches) = state.epoch_cache.as_ref().expect("filled above");
        let (loss, grad) = self.batch_loss_grad(w, &batches[index]);
        state.draw += 1;
        GradientSample { grad, loss }
    }

    fn loss_full(&self, w: &[f64]) -> f64 {
        let total: f64 = self
            .data
            .examples
            .iter()
            .map(|e| softplus(-e.label * e.dot(w)))
            .sum();
        total / self.data.len() as f64
    }

    fn gradient_full(&self, w: &[f64]) -> Vec<f64> {
        let all: Vec<usize> = (0..self.data.len()).collect();
        self.batch_loss_grad(w, &all).1
    }

    /// Fraction of examples with `sign⟨w, x⟩ = y`, predicting `+1` at zero.
    fn accuracy(&self, w: &[f64]) -> Option<f64> {
        let correct = self
            .data
            .examples
            .iter()
            .filter(|e| {
                let pred = if e.dot(w) >= 0.0 { 1.0 } else { -1.0 };
                pred == e.label
            })
            .count();
        Some(correct as f64 / self.data.len() as f64)
    }

    fn is_deterministic(&self) -> bool {
        self.batch_size >= self.data.len()
    }

    fn draws_per_epoch(&self) -> Option<usize> {
        Some(self.num_batches())
    }
}
