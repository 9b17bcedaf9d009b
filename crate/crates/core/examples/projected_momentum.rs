//! Box-constrained GradaGrad with momentum, checking the primal averaging
//! identities along the way.
//!
//! The quadratic's minimizer (the origin) lies outside `[0.5, 2]⁴`, so the
//! iterates converge to the corner `0.5·1`.
//!
//!     cargo run --example projected_momentum

use gradagrad::optim::{Domain, HyperParams};
use gradagrad::problems::quadratic;
use gradagrad::verify::{check_momentum_identities, record_momentum_run};

fn main() -> gradagrad::Result<()> {
    let problem = quadratic(vec![1.0, 2.0, 4.0, 8.0], 0.1)?;
    let domain = Domain::cube(4, 0.5, 2.0)?;
    let x0 = vec![2.0; 4];
    println!("beta,step,x0,x1,x2,x3,in_box");
    for beta in [0.0, 0.5, 0.9] {
        let params = HyperParams::theory(0.5, 2.0, beta, 20.0, 1.5);
        let run = record_momentum_run(&problem, &params, &domain, &x0, 400, 5)?;
        for (k, x) in run.xs.iter().enumerate().filter(|(k, _)| k % 50 == 0) {
            println!(
                "{beta},{k},{:.5},{:.5},{:.5},{:.5},{}",
                x[0],
                x[1],
                x[2],
                x[3],
                domain.contains(x)
            );
        }
        let report = check_momentum_identities(&run);
        eprintln!(
            "beta={beta}: {} passed={} worst={:.2e}",
            report.name, report.passed, report.worst_violation
        );
    }
    Ok(())
}
