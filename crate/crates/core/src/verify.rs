//! Executable checks of GradaGrad's identities and inequalities.
//!
//! Trace checks read only what a [`StepTrace`] records, so they work equally
//! on live runs and on traces loaded from CSV. Preconditioner entries are
//! recomputed as `√α/γ` from the recorded `γ` and `α` rather than taken from
//! the `a` column; the column itself is checked by
//! [`check_monotone_and_cap`].

use rand::Rng;

use crate::error::{Error, Result};
use crate::optim::{
    step_diagonal, Branch, CoordRecord, Domain, HyperParams, Mode, OptimizerKind, OptimizerSpec,
    OptimizerState, StepTrace,
};
use crate::problems::{Problem, SeedState};
use crate::seed::{derive_seed, rng_for, stream};

/// Relative tolerance for per-step identities and inequalities.
pub const STEP_TOL: f64 = 1e-12;
/// Relative tolerance for the momentum identity on `z`.
pub const MOMENTUM_TOL: f64 = 1e-10;
pub const FINITE_DIFF_TOL: f64 = 1e-5;
pub const FINITE_DIFF_H: f64 = 1e-6;
/// Largest acceptable `e(factor·n)/e(n)` in the convergence-trend check.
pub const TREND_RATIO: f64 = 0.75;
pub const TREND_FACTOR: u64 = 4;
/// Below this suboptimality the trend check is vacuous.
pub const TREND_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Largest normalized violation found (0 when none).
    pub worst_violation: f64,
    pub tolerance: f64,
    /// `(step, coordinate)` of the worst violation.
    pub location: Option<(u64, usize)>,
    pub details: String,
}

impl CheckReport {
    fn from_worst(name: &str, worst: Worst, tolerance: f64, details: String) -> Self {
        Self {
            name: name.to_string(),
            passed: worst.value <= tolerance,
            worst_violation: worst.value,
            tolerance,
            location: worst.location,
            details,
        }
    }

    fn vacuous(name: &str, tolerance: f64, details: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: true,
            worst_violation: 0.0,
            tolerance,
            location: None,
            details: details.into(),
        }
    }
}

/// Running maximum with its location. NaN counts as an infinite violation.
#[derive(Debug, Clone, Copy)]
struct Worst {
    value: f64,
    location: Option<(u64, usize)>,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            location: None,
        }
    }

    fn update(&mut self, value: f64, k: u64, i: usize) {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        if value > self.value {
            self.value = value;
            self.location = Some((k, i));
        }
    }
}

fn precond(rec: &CoordRecord) -> f64 {
    rec.alpha.sqrt() / rec.gamma
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Iterates `(previous record, record, k, i)` over consecutive traces.
fn pairs<'a>(
    traces: &'a [StepTrace],
) -> impl Iterator<Item = Result<(Option<&'a CoordRecord>, &'a CoordRecord, u64, usize)>> + 'a {
    traces.iter().enumerate().flat_map(move |(t, trace)| {
        let prev = if t > 0 { Some(&traces[t - 1]) } else { None };
        let consecutive =
            prev.is_none_or(|p| p.k + 1 == trace.k && p.coords.len() == trace.coords.len());
        trace.coords.iter().enumerate().map(move |(i, rec)| {
            if !consecutive {
                return Err(Error::Contract(format!(
                    "trace step {} does not follow step {}",
                    trace.k,
                    prev.map_or(0, |p| p.k)
                )));
            }
            Ok((prev.map(|p| &p.coords[i]), rec, trace.k, i))
        })
    })
}

/// `g²/A_{k+1} − ρ·g·m_prev/A_k ≤ 0` on every negative-branch coordinate-step.
///
/// `ρ·g·m_prev` is recovered as `g² − v_raw`, which holds on the negative
/// branch of both variants. The violation is the signed left-hand side over
/// `max(1, |terms|)`; only runs with the adaptive clip are guaranteed to pass.
pub fn check_errnegativity(traces: &[StepTrace]) -> Result<CheckReport> {
    const NAME: &str = "errnegativity";
    let mut worst = Worst::new();
    let mut negatives = 0usize;
    for item in pairs(traces) {
        let (prev, rec, k, i) = item?;
        if rec.branch != Branch::Negative {
            continue;
        }
        let prev = prev.ok_or_else(|| {
            Error::Contract(format!(
                "negative branch at step {k} without a preceding step"
            ))
        })?;
        negatives += 1;
        let g2 = rec.g * rec.g;
        let growth = g2 / precond(rec);
        let correlation = (g2 - rec.v_raw) / precond(prev);
        let scale = 1f64.max(growth.abs()).max(correlation.abs());
        worst.update((growth - correlation) / scale, k, i);
    }
    let details = if negatives == 0 {
        "vacuous: no negative-branch steps".to_string()
    } else {
        format!("{negatives} negative-branch coordinate-steps")
    };
    Ok(CheckReport::from_worst(NAME, worst, STEP_TOL, details))
}

/// Both sides of the `ρ = 1` accumulator identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaIdentity {
    /// Accumulated `g₀² + Σ (g_k² − g_k g_{k−1})`.
    pub lhs: f64,
    /// `½g₀² + ½g_n² + ½Σ (g_{k+1} − g_k)²`.
    pub rhs: f64,
    /// First `k` with `v_k < 0`, where the identity's premise fails.
    pub negative_at: Option<usize>,
}

impl AlphaIdentity {
    pub fn holds(&self) -> bool {
        (self.lhs - self.rhs).abs() <= STEP_TOL * (1.0 + self.lhs.abs())
    }

    pub fn report(&self) -> CheckReport {
        const NAME: &str = "alpha-identity-rho1";
        if let Some(k) = self.negative_at {
            return CheckReport::vacuous(NAME, STEP_TOL, format!("precondition: v_{k} < 0"));
        }
        let worst = Worst {
            value: (self.lhs - self.rhs).abs() / (1.0 + self.lhs.abs()),
            location: None,
        };
        CheckReport::from_worst(
            NAME,
            worst,
            STEP_TOL,
            format!("lhs={} rhs={}", self.lhs, self.rhs),
        )
    }
}

/// Evaluates both sides of the `ρ = 1` identity for a scalar gradient
/// sequence. An empty sequence gives `0 = 0`.
pub fn check_alpha_identity_rho1(gs: &[f64]) -> AlphaIdentity {
    let Some(&first) = gs.first() else {
        return AlphaIdentity {
            lhs: 0.0,
            rhs: 0.0,
            negative_at: None,
        };
    };
    let mut lhs = first * first;
    let mut negative_at = None;
    for (k, w) in gs.windows(2).enumerate() {
        let v = w[1] * w[1] - w[1] * w[0];
        if v < 0.0 && negative_at.is_none() {
            negative_at = Some(k + 1);
        }
        lhs += v;
    }
    let last = gs[gs.len() - 1];
    let diffs: f64 = gs.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    let rhs = 0.5 * first * first + 0.5 * last * last + 0.5 * diffs;
    AlphaIdentity {
        lhs,
        rhs,
        negative_at,
    }
}

/// Runs diagonal GradaGrad (practical mode, `β = 0`, unconstrained) with the
/// given `rho` next to AdaGrad and reports the largest relative iterate gap.
/// With `rho = 0` the two must agree.
pub fn check_adagrad_equivalence_rho(
    problem: &dyn Problem,
    x0: &[f64],
    steps: u64,
    gamma: f64,
    rho: f64,
) -> Result<CheckReport> {
    const NAME: &str = "adagrad-equivalence";
    if !problem.is_deterministic() {
        return Err(Error::Contract(format!(
            "{NAME} needs a deterministic problem, `{}` is stochastic",
            problem.name()
        )));
    }
    let params = HyperParams {
        gamma0: gamma,
        rho,
        beta: 0.0,
        mode: Mode::Practical,
        ..HyperParams::default()
    };
    let mut grada = OptimizerSpec::gradagrad(params).build(x0.to_vec(), Domain::Unconstrained)?;
    let mut ada = OptimizerSpec::adagrad(gamma).build(x0.to_vec(), Domain::Unconstrained)?;
    let (mut sa, mut sb) = (SeedState::new(0), SeedState::new(0));
    let mut worst = Worst::new();
    for k in 0..steps {
        let ga = problem.grad_sample(grada.x(), &mut sa);
        let gb = problem.grad_sample(ada.x(), &mut sb);
        grada.step(&ga)?;
        ada.step(&gb)?;
        for (i, (a, b)) in grada.x().iter().zip(ada.x()).enumerate() {
            worst.update(rel_diff(*a, *b), k, i);
        }
    }
    Ok(CheckReport::from_worst(
        NAME,
        worst,
        STEP_TOL,
        format!("{steps} steps, gamma={gamma}, rho={rho}"),
    ))
}

pub fn check_adagrad_equivalence(
    problem: &dyn Problem,
    x0: &[f64],
    steps: u64,
    gamma: f64,
) -> Result<CheckReport> {
    check_adagrad_equivalence_rho(problem, x0, steps, gamma, 0.0)
}

/// Compares [`Problem::gradient_full`] with central differences of
/// [`Problem::loss_full`]. Error per coordinate is
/// `|analytic − numeric| / max(|analytic|, |numeric|, 1e-4)`.
pub fn check_finite_diff(problem: &dyn Problem, point: &[f64], h: f64) -> Result<CheckReport> {
    const NAME: &str = "finite-diff";
    if !(h > 0.0) {
        return Err(Error::InvalidParam(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    crate::error::check_dim(problem.dim(), point.len())?;
    let mut probe = point.to_vec();
    for i in 0..point.len() {
        for delta in [-h, h] {
            probe[i] = point[i] + delta;
            if !problem.is_smooth_at(&probe) {
                return Ok(CheckReport::vacuous(
                    NAME,
                    FINITE_DIFF_TOL,
                    "skipped: nonsmooth point",
                ));
            }
        }
        probe[i] = point[i];
    }
    if !problem.is_smooth_at(point) {
        return Ok(CheckReport::vacuous(
            NAME,
            FINITE_DIFF_TOL,
            "skipped: nonsmooth point",
        ));
    }
    let analytic = problem.gradient_full(point);
    let mut worst = Worst::new();
    for i in 0..point.len() {
        probe[i] = point[i] + h;
        let up = problem.loss_full(&probe);
        probe[i] = point[i] - h;
        let down = problem.loss_full(&probe);
        probe[i] = point[i];
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[i].abs().max(numeric.abs()).max(1e-4);
        worst.update((analytic[i] - numeric).abs() / scale, 0, i);
    }
    Ok(CheckReport::from_worst(
        NAME,
        worst,
        FINITE_DIFF_TOL,
        format!("central differences, h={h}"),
    ))
}

/// Mean suboptimality of the averaged iterate after `n_small` and
/// `factor·n_small` steps, over `seeds` runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendMeasurement {
    pub e_small: f64,
    pub e_large: f64,
}

impl TrendMeasurement {
    pub fn ratio(&self) -> f64 {
        self.e_large / self.e_small
    }
}

pub fn measure_trend(
    problem: &dyn Problem,
    spec: &OptimizerSpec,
    x0: &[f64],
    n_small: u64,
    factor: u64,
    seeds: u64,
    master_seed: u64,
) -> Result<TrendMeasurement> {
    let f_star = problem
        .f_star()
        .ok_or_else(|| Error::Contract(format!("`{}` has no known optimum", problem.name())))?;
    let mut e_small = 0.0;
    let mut e_large = 0.0;
    for s in 0..seeds {
        let mut opt = spec.build(x0.to_vec(), Domain::Unconstrained)?;
        let mut state = SeedState::new(derive_seed(master_seed, &[stream::REPLICATE, s]));
        for k in 1..=n_small * factor {
            let g = problem.grad_sample(opt.x(), &mut state);
            opt.step(&g)?;
            if k == n_small {
                e_small += problem.loss_full(&opt.averaged_iterate()?) - f_star;
            }
        }
        e_large += problem.loss_full(&opt.averaged_iterate()?) - f_star;
    }
    Ok(TrendMeasurement {
        e_small: e_small / seeds as f64,
        e_large: e_large / seeds as f64,
    })
}

/// Asserts `e(factor·n)/e(n) ≤ 0.75` for the averaged iterate, averaging
/// `e` over `seeds ≥ 10` runs. Requires `n_small ≥ 1000`.
pub fn check_convergence_trend(
    problem: &dyn Problem,
    spec: &OptimizerSpec,
    x0: &[f64],
    n_small: u64,
    factor: u64,
    seeds: u64,
    master_seed: u64,
) -> Result<CheckReport> {
    const NAME: &str = "convergence-trend";
    if n_small < 1000 || seeds < 10 || factor < 2 {
        return Err(Error::Contract(format!(
            "{NAME} needs n_small >= 1000, seeds >= 10 and factor >= 2 \
             (got {n_small}, {seeds}, {factor})"
        )));
    }
    let m = measure_trend(problem, spec, x0, n_small, factor, seeds, master_seed)?;
    if m.e_small < TREND_FLOOR {
        return Ok(CheckReport::vacuous(
            NAME,
            TREND_RATIO,
            format!("vacuous: e({n_small}) = {:e} already converged", m.e_small),
        ));
    }
    let ratio = m.ratio();
    let worst = Worst {
        value: if ratio.is_nan() { f64::INFINITY } else { ratio },
        location: None,
    };
    Ok(CheckReport::from_worst(
        NAME,
        worst,
        TREND_RATIO,
        format!(
            "e({n_small})={:e} e({})={:e} ratio={ratio:.4} threshold={TREND_RATIO}",
            m.e_small,
            n_small * factor,
            m.e_large
        ),
    ))
}

/// Monotone `α` and `γ`, `γ ≤ D∞`, `a = √α/γ`, and branch bookkeeping:
/// `α` moves only on accumulating branches, `γ` only on the negative one,
/// `v_clipped = v_raw` off the negative branch and `negative ⟺ v_raw < 0`
/// outside init/capped. Structural violations score 1.
pub fn check_monotone_and_cap(traces: &[StepTrace], d_inf: Option<f64>) -> Result<CheckReport> {
    const NAME: &str = "monotone-cap";
    let mut worst = Worst::new();
    for item in pairs(traces) {
        let (prev, rec, k, i) = item?;
        worst.update(rel_diff(rec.a, precond(rec)), k, i);
        if let Some(d) = d_inf {
            worst.update((rec.gamma - d) / d, k, i);
        }
        let negative = rec.branch == Branch::Negative;
        let structural = (negative != (rec.v_raw < 0.0)
            && matches!(rec.branch, Branch::Positive | Branch::Negative))
            || (!negative && rec.v_clipped != rec.v_raw)
            || (!negative && rec.r.is_some());
        if structural {
            worst.update(1.0, k, i);
        }
        if let Some(prev) = prev {
            worst.update((prev.alpha - rec.alpha) / prev.alpha.max(1.0), k, i);
            worst.update((prev.gamma - rec.gamma) / prev.gamma.max(1.0), k, i);
            if negative && rec.alpha != prev.alpha {
                worst.update(1.0, k, i);
            }
            if !negative && rec.gamma != prev.gamma {
                worst.update(1.0, k, i);
            }
        }
    }
    Ok(CheckReport::from_worst(
        NAME,
        worst,
        STEP_TOL,
        format!("{} steps", traces.len()),
    ))
}

/// `γ_{k+1}/√(α_k − v_clipped) = γ_k/√α_k` on negative steps where the
/// `D∞` cap did not bind.
pub fn check_reparam_invariance(traces: &[StepTrace], d_inf: Option<f64>) -> Result<CheckReport> {
    const NAME: &str = "reparam";
    let mut worst = Worst::new();
    let mut checked = 0usize;
    for item in pairs(traces) {
        let (prev, rec, k, i) = item?;
        if rec.branch != Branch::Negative || d_inf.is_some_and(|d| rec.gamma >= d) {
            continue;
        }
        let Some(prev) = prev else { continue };
        checked += 1;
        let after = rec.gamma / (prev.alpha - rec.v_clipped).sqrt();
        let before = prev.gamma / prev.alpha.sqrt();
        worst.update(rel_diff(after, before), k, i);
    }
    let details = if checked == 0 {
        "vacuous: no uncapped negative steps".to_string()
    } else {
        format!("{checked} uncapped negative coordinate-steps")
    };
    Ok(CheckReport::from_worst(NAME, worst, STEP_TOL, details))
}

/// Full iterate history of a diagonal GradaGrad run.
#[derive(Debug, Clone, Default)]
pub struct MomentumRun {
    pub beta: f64,
    pub unconstrained: bool,
    /// `x_0 … x_n`.
    pub xs: Vec<Vec<f64>>,
    /// `z_0 … z_n`.
    pub zs: Vec<Vec<f64>>,
    /// `m_0 … m_{n−1}`.
    pub ms: Vec<Vec<f64>>,
    /// `A_1 … A_n`.
    pub precond: Vec<Vec<f64>>,
    /// `g_0 … g_{n−1}`.
    pub gs: Vec<Vec<f64>>,
}

/// Runs diagonal GradaGrad for `steps` steps and records its history.
pub fn record_momentum_run(
    problem: &dyn Problem,
    params: &HyperParams,
    domain: &Domain,
    x0: &[f64],
    steps: u64,
    seed: u64,
) -> Result<MomentumRun> {
    params.validate()?;
    let mut state = OptimizerState::diagonal(x0.to_vec(), params.gamma0);
    let mut seeds = SeedState::new(seed);
    let mut run = MomentumRun {
        beta: params.beta,
        unconstrained: domain.is_unconstrained(),
        xs: vec![state.x.clone()],
        zs: vec![state.z.clone()],
        ..MomentumRun::default()
    };
    for _ in 0..steps {
        let g = problem.grad_sample(&state.x, &mut seeds);
        let trace = step_diagonal(&mut state, &g, params, domain)?;
        run.xs.push(state.x.clone());
        run.zs.push(state.z.clone());
        run.ms.push(state.m_prev.clone());
        run.precond.push(trace.coords.iter().map(|c| c.a).collect());
        run.gs.push(g);
    }
    Ok(run)
}

/// `z_k = (x_k − β x_{k−1})/(1 − β)` for `k ≥ 1` (tolerance 1e-10),
/// `m_k = A_{k+1}(x_k − x_{k+1})` (1e-12), and `m_k = g_k` when `β = 0`
/// on an unconstrained domain (1e-12). Tolerances are relative to the
/// magnitude of the iterates involved, which bounds the rounding in the
/// differences.
pub fn check_momentum_identities(run: &MomentumRun) -> CheckReport {
    const NAME: &str = "momentum";
    let beta = run.beta;
    let mut worst = Worst::new();
    for k in 1..run.xs.len() {
        let (x, x_prev, z) = (&run.xs[k], &run.xs[k - 1], &run.zs[k]);
        for i in 0..x.len() {
            let implied = (x[i] - beta * x_prev[i]) / (1.0 - beta);
            let scale = 1f64.max(x[i].abs()).max(x_prev[i].abs()).max(z[i].abs()) / (1.0 - beta);
            // Normalize to STEP_TOL so one report can carry both tolerances.
            worst.update(
                (implied - z[i]).abs() / scale * (STEP_TOL / MOMENTUM_TOL),
                k as u64,
                i,
            );
        }
    }
    for k in 0..run.ms.len() {
        let (m, a, x, x_next) = (&run.ms[k], &run.precond[k], &run.xs[k], &run.xs[k + 1]);
        for i in 0..m.len() {
            let scale = 1f64
                .max(m[i].abs())
                .max(a[i] * x[i].abs().max(x_next[i].abs()));
            worst.update(
                (m[i] - a[i] * (x[i] - x_next[i])).abs() / scale,
                k as u64,
                i,
            );
            if beta == 0.0 && run.unconstrained && a[i] > 0.0 {
                let g = run.gs[k][i];
                let scale = 1f64
                    .max(g.abs())
                    .max(a[i] * x[i].abs().max(x_next[i].abs()));
                worst.update((m[i] - g).abs() / scale, k as u64, i);
            }
        }
    }
    CheckReport::from_worst(
        NAME,
        worst,
        STEP_TOL,
        format!("{} steps, beta={beta}", run.ms.len()),
    )
}

/// Gradient sequences that frequently repeat, reverse or rescale the
/// previous direction, so every branch gets exercised.
pub fn fuzz_gradient(rng: &mut impl Rng, prev: &[f64], out: &mut [f64]) {
    for (o, &p) in out.iter_mut().zip(prev) {
        let magnitude = 10f64.powf(rng.gen_range(-3.0..2.0));
        *o = match rng.gen_range(0..6) {
            0 => 0.0,
            1 | 2 => p * rng.gen_range(0.05..1.5) + magnitude * rng.gen_range(-0.05..0.05),
            3 => -p * rng.gen_range(0.1..1.0),
            _ => magnitude * rng.gen_range(-1.0..1.0),
        };
    }
}

/// Drives `kind` (diagonal or scalar GradaGrad) with fuzzed gradients and
/// returns every step's trace.
pub fn fuzz_traces(
    kind: OptimizerKind,
    params: &HyperParams,
    domain: &Domain,
    dim: usize,
    steps: u64,
    seed: u64,
) -> Result<Vec<StepTrace>> {
    let mut rng = rng_for(seed, &[stream::FUZZ]);
    let x0: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut opt = OptimizerSpec::new(kind, params.clone()).build(x0, domain.clone())?;
    let mut g = vec![0.0; dim];
    let mut prev = vec![0.0; dim];
    let mut traces = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        fuzz_gradient(&mut rng, &prev, &mut g);
        let trace = opt
            .step(&g)?
            .ok_or_else(|| Error::Contract(format!("{kind} does not emit traces")))?;
        traces.push(trace);
        prev.copy_from_slice(&g);
    }
    Ok(traces)
}
