//! Optimizers behind one single-step interface.
//!
//! The free functions ([`step_scalar`], [`step_diagonal`], [`step_adagrad`],
//! [`step_sgd`], [`step_adam`]) operate on an explicit [`OptimizerState`].
//! [`Optimizer`] wraps them with their hyper-parameters and feasible set so
//! drivers can treat every method alike.

mod baselines;
mod coord;
mod domain;
mod gradagrad;
mod params;
mod state;
mod trace;

pub use baselines::{step_adagrad, step_adam, step_sgd, AdamMoments, AdamParams};
pub use coord::{
    accumulate_positive, apply_reparam, clip_negative_v, compute_v_coord, compute_v_scalar,
    preconditioner_entry, Branch, CoordState,
};
pub use domain::{project, Domain};
pub use gradagrad::{step_diagonal, step_scalar};
pub use params::{HyperParams, Mode, DEFAULT_R_FIXED, PRACTICAL_D_INF};
pub use state::OptimizerState;
pub use trace::{CoordRecord, StepTrace};

use crate::error::{check_dim, Error, Result};

/// Learning-rate summary of the current state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LrStats {
    pub gamma_mean: Option<f64>,
    pub gamma_max: Option<f64>,
    pub alpha_mean: Option<f64>,
    pub alpha_max: Option<f64>,
    /// Mean effective step size `A⁻¹` over coordinates.
    pub ainv_mean: f64,
}

impl LrStats {
    fn from_coords(coords: &[CoordState], ainv_mean: f64) -> Self {
        let n = coords.len().max(1) as f64;
        let fold = |f: fn(&CoordState) -> f64| {
            let (sum, max) = coords
                .iter()
                .map(f)
                .fold((0.0, f64::NEG_INFINITY), |(s, m), v| (s + v, m.max(v)));
            (Some(sum / n), Some(max))
        };
        let (gamma_mean, gamma_max) = fold(|c| c.gamma);
        let (alpha_mean, alpha_max) = fold(|c| c.alpha);
        Self {
            gamma_mean,
            gamma_max,
            alpha_mean,
            alpha_max,
            ainv_mean,
        }
    }
}

/// A stateful first-order method.
pub trait Optimizer: Send {
    fn name(&self) -> &'static str;

    fn state(&self) -> &OptimizerState;

    /// Consumes gradient `g` taken at the current iterate. GradaGrad variants
    /// return their per-step trace; baselines return `None`.
    fn step(&mut self, g: &[f64]) -> Result<Option<StepTrace>>;

    fn lr_stats(&self) -> LrStats;

    fn x(&self) -> &[f64] {
        &self.state().x
    }

    fn averaged_iterate(&self) -> Result<Vec<f64>> {
        self.state().averaged_iterate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    /// Diagonal GradaGrad.
    GradaGrad,
    /// Scalar GradaGrad.
    GradaGradScalar,
    AdaGrad,
    Sgd,
    Adam,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 5] = [
        OptimizerKind::GradaGrad,
        OptimizerKind::GradaGradScalar,
        OptimizerKind::AdaGrad,
        OptimizerKind::Sgd,
        OptimizerKind::Adam,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OptimizerKind::GradaGrad => "gradagrad",
            OptimizerKind::GradaGradScalar => "gradagrad-scalar",
            OptimizerKind::AdaGrad => "adagrad",
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown optimizer `{s}`")))
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

/// Method plus hyper-parameters. For the baselines `params.gamma0` is the
/// learning rate (AdaGrad's fixed numerator, SGD's and Adam's step size).
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    pub params: HyperParams,
}

impl OptimizerSpec {
    pub fn new(kind: OptimizerKind, params: HyperParams) -> Self {
        Self { kind, params }
    }

    pub fn gradagrad(params: HyperParams) -> Self {
        Self::new(OptimizerKind::GradaGrad, params)
    }

    pub fn adagrad(gamma: f64) -> Self {
        Self::new(
            OptimizerKind::AdaGrad,
            HyperParams::default().with_gamma0(gamma),
        )
    }

    pub fn build(&self, x0: Vec<f64>, domain: Domain) -> Result<Box<dyn Optimizer>> {
        self.params.validate()?;
        if let Domain::Box { lower, .. } = &domain {
            check_dim(x0.len(), lower.len())?;
        }
        let gamma0 = self.params.gamma0;
        Ok(match self.kind {
            OptimizerKind::GradaGrad => Box::new(DiagonalGradaGrad {
                state: OptimizerState::diagonal(x0, gamma0),
                params: self.params.clone(),
                domain,
            }),
            OptimizerKind::GradaGradScalar => {
                if !domain.is_unconstrained() {
                    return Err(Error::Config(
                        "scalar GradaGrad does not support a constrained domain".into(),
                    ));
                }
                Box::new(ScalarGradaGrad {
                    state: OptimizerState::scalar(x0, gamma0),
                    params: self.params.clone(),
                })
            }
            OptimizerKind::AdaGrad | OptimizerKind::Sgd => Box::new(Baseline {
                kind: self.kind,
                state: OptimizerState::diagonal(x0, gamma0),
                lr: gamma0,
                domain,
            }),
            OptimizerKind::Adam => Box::new(Adam {
                moments: AdamMoments::new(x0.len()),
                state: OptimizerState::diagonal(x0, gamma0),
                params: AdamParams {
                    lr: gamma0,
                    ..AdamParams::default()
                },
                last_step_mean: 0.0,
                domain,
            }),
        })
    }
}

#[derive(Debug, Clone)]
pub struct DiagonalGradaGrad {
    pub state: OptimizerState,
    pub params: HyperParams,
    pub domain: Domain,
}

impl Optimizer for DiagonalGradaGrad {
    fn name(&self) -> &'static str {
        OptimizerKind::GradaGrad.as_str()
    }

    fn state(&self) -> &OptimizerState {
        &self.state
    }

    fn step(&mut self, g: &[f64]) -> Result<Option<StepTrace>> {
        step_diagonal(&mut self.state, g, &self.params, &self.domain).map(Some)
    }

    fn lr_stats(&self) -> LrStats {
        let coords = &self.state.coords;
        let ainv =
            coords.iter().map(CoordState::step_size).sum::<f64>() / coords.len().max(1) as f64;
        LrStats::from_coords(coords, ainv)
    }
}

#[derive(Debug, Clone)]
pub struct ScalarGradaGrad {
    pub state: OptimizerState,
    pub params: HyperParams,
}

impl Optimizer for ScalarGradaGrad {
    fn name(&self) -> &'static str {
        OptimizerKind::GradaGradScalar.as_str()
    }

    fn state(&self) -> &OptimizerState {
        &self.state
    }

    fn step(&mut self, g: &[f64]) -> Result<Option<StepTrace>> {
        step_scalar(&mut self.state, g, &self.params).map(Some)
    }

    fn lr_stats(&self) -> LrStats {
        let coords = &self.state.coords;
        LrStats::from_coords(coords, coords[0].step_size())
    }
}

#[derive(Debug, Clone)]
struct Baseline {
    kind: OptimizerKind,
    state: OptimizerState,
    lr: f64,
    domain: Domain,
}

impl Optimizer for Baseline {
    fn name(&self) -> &'static str {
        self.kind.as_str()
    }

    fn state(&self) -> &OptimizerState {
        &self.state
    }

    fn step(&mut self, g: &[f64]) -> Result<Option<StepTrace>> {
        match self.kind {
            OptimizerKind::AdaGrad => step_adagrad(&mut self.state, g, self.lr)?,
            _ => step_sgd(&mut self.state, g, self.lr)?,
        }
        project_baseline(&mut self.state, &self.domain)?;
        Ok(None)
    }

    fn lr_stats(&self) -> LrStats {
        match self.kind {
            OptimizerKind::AdaGrad => {
                let coords = &self.state.coords;
                let ainv = coords.iter().map(CoordState::step_size).sum::<f64>()
                    / coords.len().max(1) as f64;
                LrStats::from_coords(coords, ainv)
            }
            _ => LrStats {
                ainv_mean: self.lr,
                ..LrStats::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
struct Adam {
    state: OptimizerState,
    moments: AdamMoments,
    params: AdamParams,
    last_step_mean: f64,
    domain: Domain,
}

impl Optimizer for Adam {
    fn name(&self) -> &'static str {
        OptimizerKind::Adam.as_str()
    }

    fn state(&self) -> &OptimizerState {
        &self.state
    }

    fn step(&mut self, g: &[f64]) -> Result<Option<StepTrace>> {
        self.last_step_mean = step_adam(&mut self.state, &mut self.moments, g, &self.params)?;
        project_baseline(&mut self.state, &self.domain)?;
        Ok(None)
    }

    fn lr_stats(&self) -> LrStats {
        LrStats {
            ainv_mean: self.last_step_mean,
            ..LrStats::default()
        }
    }
}

// The running average already absorbed the unprojected point; redo the fold
// with the projected one.
fn project_baseline(state: &mut OptimizerState, domain: &Domain) -> Result<()> {
    if domain.is_unconstrained() {
        return Ok(());
    }
    let n = state.avg_count as f64;
    let before = state.x.clone();
    domain.project_in_place(&mut state.x)?;
    for ((avg, new), old) in state.x_avg.iter_mut().zip(&state.x).zip(&before) {
        *avg += (new - old) / n;
    }
    state.z.copy_from_slice(&state.x);
    Ok(())
}
