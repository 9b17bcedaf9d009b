//! Per-coordinate arithmetic shared by the scalar and diagonal steppers.
//!
//! Each coordinate keeps a numerator `γ` and an accumulator `α`; its
//! preconditioner entry is `A = √α / γ` and the effective step size is
//! `A⁻¹ = γ / √α`. A step computes a signed increment `v`. Nonnegative `v`
//! is added to `α` as in AdaGrad. Negative `v` is clipped and then absorbed
//! by growing `γ` while `α` stays put, which raises the step size.

use crate::error::{Error, Result};

use super::params::{HyperParams, Mode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordState {
    pub gamma: f64,
    pub alpha: f64,
}

impl CoordState {
    pub fn new(gamma0: f64) -> Self {
        Self {
            gamma: gamma0,
            alpha: 0.0,
        }
    }

    /// Effective step size `γ/√α`, or zero for a coordinate that has not
    /// accumulated anything yet.
    pub fn step_size(&self) -> f64 {
        if self.alpha > 0.0 {
            self.gamma / self.alpha.sqrt()
        } else {
            0.0
        }
    }
}

/// Which arm of the update a coordinate took on a given step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// First step; `v₀ = G∞²` (theory) or `g₀²` (practical).
    Init,
    /// `γ` has reached `D∞`; plain AdaGrad accumulation.
    Capped,
    Positive,
    Negative,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Init => "init",
            Branch::Capped => "capped",
            Branch::Positive => "positive",
            Branch::Negative => "negative",
        }
    }

    /// Whether `α` absorbs `v` on this branch.
    pub fn accumulates(&self) -> bool {
        !matches!(self, Branch::Negative)
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "init" => Ok(Branch::Init),
            "capped" => Ok(Branch::Capped),
            "positive" => Ok(Branch::Positive),
            "negative" => Ok(Branch::Negative),
            other => Err(Error::Contract(format!("unknown branch `{other}`"))),
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

/// `‖g‖² − ρ⟨g, g_prev⟩` for the scalar variant.
pub fn compute_v_scalar(g: &[f64], g_prev: &[f64], rho: f64) -> Result<f64> {
    crate::error::check_dim(g.len(), g_prev.len())?;
    let (sq, inner) = g
        .iter()
        .zip(g_prev)
        .fold((0.0, 0.0), |(sq, inner), (&a, &b)| {
            (sq + a * a, inner + a * b)
        });
    Ok(sq - rho * inner)
}

/// Selects the branch for coordinate `i` at step `k` and returns the raw `v`.
///
/// `v = 0` counts as positive.
pub fn compute_v_coord(
    g_i: f64,
    m_prev_i: f64,
    k: u64,
    gamma_i: f64,
    params: &HyperParams,
) -> (f64, Branch) {
    if k == 0 {
        let v = match params.mode {
            Mode::Theory => params.g_inf * params.g_inf,
            Mode::Practical => g_i * g_i,
        };
        (v, Branch::Init)
    } else if gamma_i >= params.d_inf {
        (g_i * g_i, Branch::Capped)
    } else {
        let v = g_i * g_i - params.rho * g_i * m_prev_i;
        let branch = if v >= 0.0 {
            Branch::Positive
        } else {
            Branch::Negative
        };
        (v, branch)
    }
}

/// Clips a negative `v` from below at `−r·α`.
///
/// With `r_fixed` absent, `r = (ρ·m_prev/g)² − 1`, the largest value that
/// keeps `g²/A_{k+1} − ρ·g·m_prev/A_k ≤ 0`. Returns `(v_clipped, r)`.
pub fn clip_negative_v(
    v: f64,
    g_i: f64,
    m_prev_i: f64,
    rho: f64,
    alpha_i: f64,
    r_fixed: Option<f64>,
) -> Result<(f64, f64)> {
    if !(v < 0.0) {
        return Err(Error::Contract(format!("clip called with v = {v} >= 0")));
    }
    if !(alpha_i > 0.0) {
        return Err(Error::Contract(format!(
            "negative v with unbootstrapped accumulator (alpha = {alpha_i})"
        )));
    }
    let r = match r_fixed {
        Some(r) => r,
        None => {
            let ratio = rho * m_prev_i / g_i;
            ratio * ratio - 1.0
        }
    };
    Ok((v.max(-r * alpha_i), r))
}

/// `γ·√(1 − v/α)`: the numerator that keeps the step size unchanged when the
/// accumulator is notionally shifted to `α − v`. The caller applies any cap.
pub fn apply_reparam(gamma: f64, alpha: f64, v: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Contract(format!("reparam with alpha = {alpha}")));
    }
    if v > 0.0 {
        return Err(Error::Contract(format!("reparam with v = {v} > 0")));
    }
    Ok(gamma * (1.0 - v / alpha).sqrt())
}

pub fn accumulate_positive(alpha: f64, v: f64) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::Contract(format!(
            "accumulate called with v = {v}; negative v must be clipped and reparameterized"
        )));
    }
    Ok(alpha + v)
}

/// `A = √α / γ`. Errors on an unbootstrapped coordinate (`α = 0`), for which
/// callers take a zero step instead.
pub fn preconditioner_entry(coord: &CoordState) -> Result<f64> {
    if coord.alpha > 0.0 {
        Ok(coord.alpha.sqrt() / coord.gamma)
    } else {
        Err(Error::Contract(
            "unbootstrapped coordinate (alpha = 0)".into(),
        ))
    }
}
