//! Plugging a user-defined objective into the optimizers.
//!
//! Robust regression with the Huber loss on synthetic data; the stochastic
//! gradient uses one random row per draw.
//!
//!     cargo run --example custom_problem

use gradagrad::optim::{Domain, HyperParams, OptimizerKind, OptimizerSpec};
use gradagrad::problems::{GradientSample, Problem, SeedState};
use gradagrad::seed::rng_for;
use gradagrad::verify::{check_finite_diff, FINITE_DIFF_H};
use rand::Rng;

struct Huber {
    rows: Vec<(Vec<f64>, f64)>,
    delta: f64,
}

impl Huber {
    fn new(n: usize, dim: usize, seed: u64) -> Self {
        let mut rng = rng_for(seed, &[]);
        let truth: Vec<f64> = (0..dim).map(|i| (i as f64 + 1.0).recip()).collect();
        let rows = (0..n)
            .map(|_| {
                let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let outlier = if rng.gen_bool(0.05) { 20.0 } else { 0.0 };
                let b = a.iter().zip(&truth).map(|(a, t)| a * t).sum::<f64>() + outlier;
                (a, b)
            })
            .collect();
        Self { rows, delta: 1.0 }
    }

    fn row(&self, x: &[f64], i: usize) -> (f64, f64) {
        let (a, b) = &self.rows[i];
        let r = a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() - b;
        if r.abs() <= self.delta {
            (0.5 * r * r, r)
        } else {
            (
                self.delta * (r.abs() - 0.5 * self.delta),
                self.delta * r.signum(),
            )
        }
    }
}

impl Problem for Huber {
    fn name(&self) -> String {
        "huber".into()
    }

    fn dim(&self) -> usize {
        self.rows[0].0.len()
    }

    fn sample(&self, x: &[f64], state: &mut SeedState) -> GradientSample {
        let i = rng_for(state.seed, &[state.draw]).gen_range(0..self.rows.len());
        state.draw += 1;
        let (loss, slope) = self.row(x, i);
        GradientSample {
            grad: self.rows[i].0.iter().map(|a| slope * a).collect(),
            loss,
        }
    }

    fn loss_full(&self, x: &[f64]) -> f64 {
        (0..self.rows.len()).map(|i| self.row(x, i).0).sum::<f64>() / self.rows.len() as f64
    }

    fn gradient_full(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        for (i, (a, _)) in self.rows.iter().enumerate() {
            let slope = self.row(x, i).1 / self.rows.len() as f64;
            g.iter_mut().zip(a).for_each(|(g, a)| *g += slope * a);
        }
        g
    }

    fn is_deterministic(&self) -> bool {
        false
    }
}

fn main() -> gradagrad::Result<()> {
    let problem = Huber::new(500, 6, 3);
    let report = check_finite_diff(&problem, &[0.3; 6], FINITE_DIFF_H)?;
    println!(
        "gradient check: passed={} worst={:.2e}",
        report.passed, report.worst_violation
    );

    for kind in [
        OptimizerKind::GradaGrad,
        OptimizerKind::AdaGrad,
        OptimizerKind::Sgd,
    ] {
        let spec = OptimizerSpec::new(kind, HyperParams::default().with_gamma0(0.05));
        let mut opt = spec.build(vec![0.0; problem.dim()], Domain::Unconstrained)?;
        let mut seeds = SeedState::new(11);
        for _ in 0..5000 {
            let g = problem.grad_sample(opt.x(), &mut seeds);
            opt.step(&g)?;
        }
        println!(
            "{kind:>10}: loss {:.5}, averaged iterate {:.5}",
            problem.loss_full(opt.x()),
            problem.loss_full(&opt.averaged_iterate()?)
        );
    }
    Ok(())
}
