//! Averaged-iterate suboptimality on a noisy quadratic.
//!
//! For each n in a doubling schedule, averages f(x̄_n) − f* over seeds.
//! A rate of O(1/√n) shows up as a slope of about −½ in log-log and as
//! e(4n)/e(n) near 0.5.
//!
//!     cargo run --release --example convergence_rate

use gradagrad::optim::{HyperParams, OptimizerKind, OptimizerSpec};
use gradagrad::problems::quadratic;
use gradagrad::verify::{check_convergence_trend, measure_trend, TREND_FACTOR};

fn main() -> gradagrad::Result<()> {
    let problem = quadratic(vec![1.0, 0.5, 2.0, 0.25], 1.0)?;
    let x0 = vec![1.0; 4];
    let seeds = 10;

    for kind in [OptimizerKind::GradaGrad, OptimizerKind::AdaGrad] {
        let spec = OptimizerSpec::new(kind, HyperParams::default());
        println!("{kind}");
        println!("{:>8} {:>12} {:>12} {:>8}", "n", "e(n)", "e(4n)", "ratio");
        for n in [250, 500, 1000, 2000, 4000] {
            let m = measure_trend(&problem, &spec, &x0, n, TREND_FACTOR, seeds, 7)?;
            println!(
                "{n:>8} {:>12.4e} {:>12.4e} {:>8.3}",
                m.e_small,
                m.e_large,
                m.ratio()
            );
        }
        let report = check_convergence_trend(&problem, &spec, &x0, 2000, TREND_FACTOR, seeds, 7)?;
        println!("check: passed={} {}\n", report.passed, report.details);
    }
    Ok(())
}
