//! GradaGrad steppers: the scalar variant (one shared learning rate, fixed or
//! adaptive clip) and the diagonal variant with momentum, projection, the
//! `G∞` initialization and the `D∞` cap.

use crate::error::{check_dim, Error, Result};

use super::coord::{
    accumulate_positive, apply_reparam, clip_negative_v, compute_v_coord, compute_v_scalar, Branch,
};
use super::domain::Domain;
use super::params::HyperParams;
use super::state::OptimizerState;
use super::trace::{CoordRecord, StepTrace};

/// One step of scalar GradaGrad, `x ← x − (γ/√α)·g`.
///
/// `v = ‖g‖² − ρ⟨g, g_prev⟩`. The clip uses `params.r_fixed` when set and the
/// adaptive `r` otherwise. `γ` is not capped. While `α = 0` (every gradient
/// so far was zero) the step is zero.
pub fn step_scalar(
    state: &mut OptimizerState,
    g: &[f64],
    params: &HyperParams,
) -> Result<StepTrace> {
    check_dim(state.dim(), g.len())?;
    if state.coords.len() != 1 {
        return Err(Error::Contract(format!(
            "scalar stepper needs one coordinate state, found {}",
            state.coords.len()
        )));
    }
    let k = state.k;
    let sq_norm: f64 = g.iter().map(|v| v * v).sum();
    let norm = sq_norm.sqrt();
    let v_raw = compute_v_scalar(g, &state.g_prev, params.rho)?;

    let coord = &mut state.coords[0];
    let (v_clipped, r, branch) = if v_raw >= 0.0 {
        coord.alpha = accumulate_positive(coord.alpha, v_raw)?;
        let branch = if k == 0 {
            Branch::Init
        } else {
            Branch::Positive
        };
        (v_raw, None, branch)
    } else {
        // ⟨g_prev, g⟩/‖g‖ plays the role of m_prev so that the shared clip
        // yields r = (ρ⟨g_prev, g⟩/‖g‖²)² − 1.
        let inner: f64 = g.iter().zip(&state.g_prev).map(|(a, b)| a * b).sum();
        let (v_clipped, r) = clip_negative_v(
            v_raw,
            norm,
            inner / norm,
            params.rho,
            coord.alpha,
            params.r_fixed,
        )?;
        coord.gamma = apply_reparam(coord.gamma, coord.alpha, v_clipped)?;
        (v_clipped, Some(r), Branch::Negative)
    };
    let coord = *coord;
    let step = coord.step_size();
    let a = if coord.alpha > 0.0 {
        coord.alpha.sqrt() / coord.gamma
    } else {
        0.0
    };

    for (x, &gi) in state.x.iter_mut().zip(g) {
        *x -= step * gi;
    }
    state.z.copy_from_slice(&state.x);
    state.g_prev.copy_from_slice(g);
    state.m_prev.copy_from_slice(g);
    state.k += 1;
    state.record_iterate();

    Ok(StepTrace {
        k,
        coords: vec![CoordRecord {
            g: norm,
            v_raw,
            v_clipped,
            branch,
            r,
            gamma: coord.gamma,
            alpha: coord.alpha,
            a,
        }],
        f_sample: None,
    })
}

/// One step of diagonal GradaGrad with momentum and projection.
///
/// Per coordinate the branch is chosen by [`compute_v_coord`]; negative
/// increments are clipped with the adaptive `r`, absorbed into `γ` and `γ` is
/// capped at `D∞`. Then
/// `z ← proj(z − A⁻¹g)`, `x ← βx + (1−β)z`, `m ← A(x_old − x)`.
pub fn step_diagonal(
    state: &mut OptimizerState,
    g: &[f64],
    params: &HyperParams,
    domain: &Domain,
) -> Result<StepTrace> {
    let d = state.dim();
    check_dim(d, g.len())?;
    check_dim(d, state.coords.len())?;
    let k = state.k;
    let mut records = Vec::with_capacity(d);
    let mut precond = Vec::with_capacity(d);

    for i in 0..d {
        let gi = g[i];
        let mi = state.m_prev[i];
        let coord = &mut state.coords[i];
        let (v_raw, branch) = compute_v_coord(gi, mi, k, coord.gamma, params);
        let (v_clipped, r) = if branch.accumulates() {
            coord.alpha = accumulate_positive(coord.alpha, v_raw)?;
            (v_raw, None)
        } else {
            let (v_clipped, r) = clip_negative_v(v_raw, gi, mi, params.rho, coord.alpha, None)?;
            coord.gamma = apply_reparam(coord.gamma, coord.alpha, v_clipped)?.min(params.d_inf);
            (v_clipped, Some(r))
        };
        let a = if coord.alpha > 0.0 {
            coord.alpha.sqrt() / coord.gamma
        } else {
            0.0
        };
        state.z[i] -= coord.step_size() * gi;
        precond.push(a);
        records.push(CoordRecord {
            g: gi,
            v_raw,
            v_clipped,
            branch,
            r,
            gamma: coord.gamma,
            alpha: coord.alpha,
            a,
        });
    }

    domain.project_in_place(&mut state.z)?;
    let beta = params.beta;
    for i in 0..d {
        let x_old = state.x[i];
        let x_new = beta * x_old + (1.0 - beta) * state.z[i];
        state.m_prev[i] = precond[i] * (x_old - x_new);
        state.x[i] = x_new;
    }
    state.g_prev.copy_from_slice(g);
    state.k += 1;
    state.record_iterate();

    Ok(StepTrace {
        k,
        coords: records,
        f_sample: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::params::Mode;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    #[test]
    fn scalar_two_steps_by_hand() {
        let params = HyperParams::default().with_r_fixed(Some(1.0));
        let mut s = OptimizerState::scalar(vec![0.0], 1.0);

        let t0 = step_scalar(&mut s, &[3.0], &params).unwrap();
        assert_eq!(t0.coords[0].v_raw, 9.0);
        assert_eq!(s.coords[0].alpha, 9.0);
        assert_eq!(t0.coords[0].a, 3.0);
        assert_eq!(s.x, vec![-1.0]);

        let t1 = step_scalar(&mut s, &[3.0], &params).unwrap();
        let c = t1.coords[0];
        assert_eq!(
            (c.v_raw, c.v_clipped, c.branch),
            (-9.0, -9.0, Branch::Negative)
        );
        assert!(rel(s.coords[0].gamma, 2f64.sqrt()) < 1e-15);
        assert_eq!(s.coords[0].alpha, 9.0);
        assert!(rel(c.a, 3.0 / 2f64.sqrt()) < 1e-15);
        assert!(rel(s.x[0], -1.0 - 2f64.sqrt()) < 1e-15);
    }

    #[test]
    fn scalar_zero_gradient_after_motion_is_neutral() {
        let params = HyperParams::default();
        let mut s = OptimizerState::scalar(vec![0.0, 1.0], 1.0);
        step_scalar(&mut s, &[1.0, -2.0], &params).unwrap();
        let before = s.clone();
        let t = step_scalar(&mut s, &[0.0, 0.0], &params).unwrap();
        assert_eq!(t.coords[0].v_raw, 0.0);
        assert_eq!(t.coords[0].branch, Branch::Positive);
        assert_eq!(s.coords, before.coords);
        assert_eq!(s.x, before.x);
    }

    #[test]
    fn scalar_zero_gradient_bootstrap() {
        let params = HyperParams::default();
        let mut s = OptimizerState::scalar(vec![2.0], 1.0);
        let t = step_scalar(&mut s, &[0.0], &params).unwrap();
        assert_eq!(s.x, vec![2.0]);
        assert_eq!(s.coords[0].alpha, 0.0);
        assert_eq!(t.coords[0].a, 0.0);
        assert!(s.x[0].is_finite());
    }

    #[test]
    fn scalar_adaptive_r_matches_closed_form() {
        let params = HyperParams::default().with_r_fixed(None);
        let mut s = OptimizerState::scalar(vec![0.0, 0.0], 1.0);
        step_scalar(&mut s, &[1.0, 0.0], &params).unwrap();
        let t = step_scalar(&mut s, &[1.0, 0.0], &params).unwrap();
        // r = (ρ⟨g_prev,g⟩/‖g‖²)² − 1 = 3.
        assert!(rel(t.coords[0].r.unwrap(), 3.0) < 1e-15);
    }

    #[test]
    fn diagonal_first_step_theory_mode() {
        let params = HyperParams::theory(1.0, 2.0, 0.0, 1.0, 10.0);
        let mut s = OptimizerState::diagonal(vec![0.0, 0.0], 1.0);
        let t = step_diagonal(&mut s, &[1.0, 0.0], &params, &Domain::Unconstrained).unwrap();
        let v: Vec<f64> = t.coords.iter().map(|c| c.v_raw).collect();
        assert_eq!(v, vec![1.0, 1.0]);
        assert!(t.coords.iter().all(|c| c.branch == Branch::Init));
        assert_eq!(
            s.coords.iter().map(|c| c.alpha).collect::<Vec<_>>(),
            vec![1.0, 1.0]
        );
        assert_eq!(
            t.coords.iter().map(|c| c.a).collect::<Vec<_>>(),
            vec![1.0, 1.0]
        );
        assert_eq!(s.x, vec![-1.0, 0.0]);
        assert_eq!(s.z, s.x);
        assert_eq!(s.m_prev, vec![1.0, 0.0]);
    }

    #[test]
    fn diagonal_capped_coordinate_is_adagrad() {
        let params = HyperParams::theory(0.5, 2.0, 0.0, 1.0, 0.5);
        let mut s = OptimizerState::diagonal(vec![0.0], 0.5);
        step_diagonal(&mut s, &[2.0], &params, &Domain::Unconstrained).unwrap();
        let alpha = s.coords[0].alpha;
        let t = step_diagonal(&mut s, &[2.0], &params, &Domain::Unconstrained).unwrap();
        assert_eq!(t.coords[0].branch, Branch::Capped);
        assert_eq!(t.coords[0].v_raw, 4.0);
        assert_eq!(s.coords[0].alpha, alpha + 4.0);
    }

    #[test]
    fn diagonal_cap_binds_on_growth() {
        let params = HyperParams::theory(1.0, 2.0, 0.0, 1.0, 1.2);
        let mut s = OptimizerState::diagonal(vec![0.0], 1.0);
        step_diagonal(&mut s, &[1.0], &params, &Domain::Unconstrained).unwrap();
        let t = step_diagonal(&mut s, &[1.0], &params, &Domain::Unconstrained).unwrap();
        assert_eq!(t.coords[0].branch, Branch::Negative);
        assert_eq!(s.coords[0].gamma, 1.2);
        let t = step_diagonal(&mut s, &[1.0], &params, &Domain::Unconstrained).unwrap();
        assert_eq!(t.coords[0].branch, Branch::Capped);
    }

    #[test]
    fn diagonal_without_momentum_direction_is_gradient() {
        let params = HyperParams::default();
        let mut s = OptimizerState::diagonal(vec![0.3, -0.2, 1.0], 1.0);
        let gs = [[0.5, -1.0, 0.25], [0.4, 1.0, 0.0], [-0.3, 0.7, 0.25]];
        for g in &gs {
            step_diagonal(&mut s, g, &params, &Domain::Unconstrained).unwrap();
            for (m, gi) in s.m_prev.iter().zip(g) {
                assert!((m - gi).abs() <= 1e-14, "{m} vs {gi}");
            }
            assert_eq!(s.x, s.z);
        }
    }

    #[test]
    fn diagonal_projection_keeps_iterates_feasible() {
        let params = HyperParams::default().with_beta(0.5);
        let domain = Domain::cube(2, -0.1, 0.1).unwrap();
        let mut s = OptimizerState::diagonal(vec![0.0, 0.0], 1.0);
        for _ in 0..20 {
            step_diagonal(&mut s, &[1.0, -1.0], &params, &domain).unwrap();
            assert!(domain.contains(&s.z));
            assert!(domain.contains(&s.x));
        }
    }

    #[test]
    fn practical_mode_skips_zero_coordinates() {
        let params = HyperParams {
            mode: Mode::Practical,
            ..HyperParams::default()
        };
        let mut s = OptimizerState::diagonal(vec![1.0, 1.0], 1.0);
        step_diagonal(&mut s, &[0.0, 1.0], &params, &Domain::Unconstrained).unwrap();
        assert_eq!(s.x[0], 1.0);
        assert_eq!(s.coords[0].alpha, 0.0);
        step_diagonal(&mut s, &[2.0, 1.0], &params, &Domain::Unconstrained).unwrap();
        assert_eq!(s.coords[0].alpha, 4.0);
        assert_eq!(s.x[0], 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let mut s = OptimizerState::diagonal(vec![0.0; 2], 1.0);
        let p = HyperParams::default();
        assert!(step_diagonal(&mut s, &[1.0], &p, &Domain::Unconstrained).is_err());
        let mut s = OptimizerState::scalar(vec![0.0; 2], 1.0);
        assert!(step_scalar(&mut s, &[1.0, 2.0, 3.0], &p).is_err());
    }
}
