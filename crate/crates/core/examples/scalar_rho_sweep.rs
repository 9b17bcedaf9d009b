//! Sensitivity of the scalar variant to ρ on a noisy ill-conditioned
//! quadratic, with both clip rules.
//!
//!     cargo run --release --example scalar_rho_sweep

use gradagrad::bench::{run_on, Budget, ProblemSpec, RunConfig};
use gradagrad::optim::{HyperParams, OptimizerKind, OptimizerSpec};
use gradagrad::problems::quadratic;

fn main() -> gradagrad::Result<()> {
    let diag = vec![10.0, 1.0, 0.1, 0.01];
    let problem = quadratic(diag.clone(), 0.3)?;
    println!("clip,rho,final_loss,avg_iterate_loss");
    for (clip, r) in [("r=1", Some(1.0)), ("adaptive", None)] {
        for rho in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let params = HyperParams::default()
                .with_rho(rho)
                .with_gamma0(0.1)
                .with_r_fixed(r);
            let mut config = RunConfig::new(
                ProblemSpec::Quadratic {
                    diag: diag.clone(),
                    noise_std: 0.3,
                },
                OptimizerSpec::new(OptimizerKind::GradaGradScalar, params),
                Budget::Steps(5000),
            );
            config.x0 = Some(vec![1.0; diag.len()]);
            config.seeds = 10;
            let s = run_on(&config, &problem)?.record.summary;
            println!("{clip},{rho},{:.6e},{:.6e}", s.final_loss, s.final_avg_loss);
        }
    }
    Ok(())
}
