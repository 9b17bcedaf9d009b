use crate::error::{Error, Result};

/// Default `D∞` in practical mode. Large enough to never bind in practice.
pub const PRACTICAL_D_INF: f64 = 1e10;

/// Fixed clip parameter used by the scalar variant when none is given.
pub const DEFAULT_R_FIXED: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `v₀ = G∞²` for every coordinate, `γ` capped at a finite `D∞`.
    Theory,
    /// `v₀ = g₀²`; the cap defaults to [`PRACTICAL_D_INF`].
    Practical,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theory" => Ok(Mode::Theory),
            "practical" => Ok(Mode::Practical),
            other => Err(Error::InvalidParam(format!("unknown mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Mode::Theory => "theory",
            Mode::Practical => "practical",
        })
    }
}

/// Tunables shared by the scalar and diagonal GradaGrad steppers.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    /// Initial numerator `γ₀`.
    pub gamma0: f64,
    /// Weight `ρ` on the consecutive-gradient inner product.
    pub rho: f64,
    /// Momentum `β ∈ [0, 1)`.
    pub beta: f64,
    /// Element-wise gradient bound `G∞`; seeds `α` at step 0 in theory mode.
    pub g_inf: f64,
    /// Cap `D∞` on every `γ`.
    pub d_inf: f64,
    /// Fixed clip parameter `r` for the scalar variant. `None` selects the
    /// adaptive `r = (ρ⟨g_prev, g⟩ / ‖g‖²)² − 1`.
    pub r_fixed: Option<f64>,
    pub mode: Mode,
}

impl Default for HyperParams {
    /// `γ₀ = 1`, `ρ = 2`, no momentum, practical mode.
    fn default() -> Self {
        Self {
            gamma0: 1.0,
            rho: 2.0,
            beta: 0.0,
            g_inf: 1.0,
            d_inf: PRACTICAL_D_INF,
            r_fixed: Some(DEFAULT_R_FIXED),
            mode: Mode::Practical,
        }
    }
}

impl HyperParams {
    pub fn theory(gamma0: f64, rho: f64, beta: f64, g_inf: f64, d_inf: f64) -> Self {
        Self {
            gamma0,
            rho,
            beta,
            g_inf,
            d_inf,
            r_fixed: None,
            mode: Mode::Theory,
        }
    }

    pub fn with_gamma0(mut self, gamma0: f64) -> Self {
        self.gamma0 = gamma0;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_r_fixed(mut self, r: Option<f64>) -> Self {
        self.r_fixed = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return bad(format!("gamma0 must be positive, got {}", self.gamma0));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return bad(format!("rho must be nonnegative, got {}", self.rho));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return bad(format!("beta must lie in [0, 1), got {}", self.beta));
        }
        if !(self.g_inf > 0.0 && self.g_inf.is_finite()) {
            return bad(format!("g_inf must be positive, got {}", self.g_inf));
        }
        if !(self.d_inf > 0.0) {
            return bad(format!("d_inf must be positive, got {}", self.d_inf));
        }
        if let Some(r) = self.r_fixed {
            if !(r >= 0.0 && r.is_finite()) {
                return bad(format!("r must be nonnegative, got {r}"));
            }
        }
        if self.mode == Mode::Theory && self.gamma0 > self.d_inf {
            return bad(format!(
                "theory mode requires gamma0 <= d_inf ({} > {})",
                self.gamma0, self.d_inf
            ));
        }
        Ok(())
    }
}
