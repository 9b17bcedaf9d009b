//! Poor initial learning rate on f(x) = |x|.
//!
//! Starts at x₀ = 1 with γ₀ = 1e-3, far too small for AdaGrad to reach the
//! minimum in a few hundred steps. GradaGrad (ρ = 2) grows its step size
//! while consecutive gradients agree, overshoots, then settles.
//!
//!     cargo run --example abs_value_adaptation [steps]

use gradagrad::optim::{Domain, HyperParams, OptimizerKind, OptimizerSpec};
use gradagrad::problems::{abs_value, Problem, SeedState};

fn main() -> gradagrad::Result<()> {
    let steps: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(500);
    let problem = abs_value();
    let params = HyperParams::default().with_gamma0(1e-3).with_rho(2.0);

    println!("method,step,x,step_size,subopt");
    for kind in [OptimizerKind::GradaGrad, OptimizerKind::AdaGrad] {
        let mut opt =
            OptimizerSpec::new(kind, params.clone()).build(vec![1.0], Domain::Unconstrained)?;
        let mut seeds = SeedState::new(0);
        for k in 1..=steps {
            let g = problem.grad_sample(opt.x(), &mut seeds);
            opt.step(&g)?;
            if k <= 40 || k % 50 == 0 {
                println!(
                    "{kind},{k},{:.6e},{:.6e},{:.6e}",
                    opt.x()[0],
                    opt.lr_stats().ainv_mean,
                    problem.loss_full(opt.x())
                );
            }
        }
        eprintln!(
            "{kind:>10}: |x_{steps}| = {:.3e}",
            problem.loss_full(opt.x())
        );
    }
    Ok(())
}
