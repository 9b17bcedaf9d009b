use super::coord::Branch;

/// What one coordinate did on one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordRecord {
    /// Gradient entry. For the scalar variant this is `‖g‖`.
    pub g: f64,
    pub v_raw: f64,
    pub v_clipped: f64,
    pub branch: Branch,
    /// Clip parameter, only on the negative branch.
    pub r: Option<f64>,
    pub gamma: f64,
    pub alpha: f64,
    /// Preconditioner entry `√α/γ` after the step (zero while `α = 0`).
    pub a: f64,
}

/// Per-step record emitted by the GradaGrad steppers.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub k: u64,
    pub coords: Vec<CoordRecord>,
    /// Sampled loss at the point the gradient was taken, when known.
    pub f_sample: Option<f64>,
}
