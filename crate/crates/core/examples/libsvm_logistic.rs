//! Untuned GradaGrad against grid-tuned baselines on LIBSVM data.
//!
//! Each baseline's learning rate is chosen on a power-of-two grid by mean
//! training accuracy over the last 10 epochs, averaged over 10 seeds.
//! GradaGrad runs once with γ₀ = 1, ρ = 2.
//!
//!     cargo run --release --example libsvm_logistic [file.libsvm ...]
//!
//! Without arguments it uses the bundled fixtures.

use std::path::PathBuf;
use std::sync::Arc;

use gradagrad::bench::{
    grid, powers_of_two, run_on, Budget, GridParam, GridSpec, ProblemSpec, RunConfig,
};
use gradagrad::data::{load_binary_dataset, LabelRule};
use gradagrad::optim::{HyperParams, OptimizerKind, OptimizerSpec};
use gradagrad::problems::logistic_regression;

const EPOCHS: u64 = 30;
const BATCH: usize = 16;
const SEEDS: u64 = 10;

fn main() -> gradagrad::Result<()> {
    let mut files: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if files.is_empty() {
        let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
        files = vec![
            fixtures.join("two_blobs.libsvm"),
            fixtures.join("sparse_planted.libsvm"),
        ];
    }

    for path in files {
        let data = Arc::new(load_binary_dataset(&path, LabelRule::Auto)?);
        let problem = logistic_regression(data.clone(), BATCH)?;
        println!(
            "{}: {} examples, {} features",
            path.display(),
            data.len(),
            data.dim
        );
        let config = |kind| {
            let mut c = RunConfig::new(
                ProblemSpec::Logistic {
                    dataset: path.clone(),
                },
                OptimizerSpec::new(kind, HyperParams::default()),
                Budget::Epochs(EPOCHS),
            );
            c.batch_size = BATCH;
            c.seeds = SEEDS;
            c.seed = 2022;
            c
        };

        let grada = run_on(&config(OptimizerKind::GradaGrad), &problem)?;
        let grada_acc = grada.record.trailing_accuracy(10).unwrap_or(f64::NAN);
        println!("  {:<10} untuned        acc {:.4}", "gradagrad", grada_acc);

        let spec = GridSpec {
            param: GridParam::Gamma0,
            values: powers_of_two(-10, 4),
        };
        for kind in [
            OptimizerKind::AdaGrad,
            OptimizerKind::Sgd,
            OptimizerKind::Adam,
        ] {
            let g = grid(&config(kind), &spec, &problem)?;
            let best = g.best();
            println!(
                "  {:<10} lr={:<12} acc {:.4}  (gap {:+.2} pp)",
                kind.as_str(),
                best.value,
                best.metric,
                100.0 * (grada_acc - best.metric)
            );
        }
    }
    Ok(())
}
