use crate::error::{Error, Result};

use super::coord::CoordState;

/// Mutable state of one optimizer run.
///
/// The diagonal stepper keeps one [`CoordState`] per coordinate; the scalar
/// stepper keeps exactly one. Baselines reuse `x`, the running average and
/// (for AdaGrad) the accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub x: Vec<f64>,
    /// Auxiliary (pre-momentum) iterate.
    pub z: Vec<f64>,
    /// Previous direction `m_{k-1}`; zero before the first step.
    pub m_prev: Vec<f64>,
    /// Previous gradient `g_{k-1}`; zero before the first step.
    pub g_prev: Vec<f64>,
    pub coords: Vec<CoordState>,
    pub k: u64,
    pub x_avg: Vec<f64>,
    pub avg_count: u64,
}

impl OptimizerState {
    /// Per-coordinate state, `α = 0`, `γ = gamma0`.
    pub fn diagonal(x0: Vec<f64>, gamma0: f64) -> Self {
        let coords = vec![CoordState::new(gamma0); x0.len()];
        Self::with_coords(x0, coords)
    }

    /// A single shared `(γ, α)` pair.
    pub fn scalar(x0: Vec<f64>, gamma0: f64) -> Self {
        Self::with_coords(x0, vec![CoordState::new(gamma0)])
    }

    fn with_coords(x0: Vec<f64>, coords: Vec<CoordState>) -> Self {
        let d = x0.len();
        Self {
            z: x0.clone(),
            x_avg: x0.clone(),
            x: x0,
            m_prev: vec![0.0; d],
            g_prev: vec![0.0; d],
            coords,
            k: 0,
            avg_count: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Folds the current `x` into the running mean of `x₀ … x_k`.
    pub(crate) fn record_iterate(&mut self) {
        self.avg_count += 1;
        let n = self.avg_count as f64;
        for (avg, &xi) in self.x_avg.iter_mut().zip(&self.x) {
            *avg += (xi - *avg) / n;
        }
    }

    /// Mean of all iterates from `x₀` through the current one.
    pub fn averaged_iterate(&self) -> Result<Vec<f64>> {
        if self.k == 0 {
            return Err(Error::Contract(
                "averaged iterate requested before any step".into(),
            ));
        }
        Ok(self.x_avg.clone())
    }
}
