//! Learning-rate grid for AdaGrad on a LIBSVM fixture, written as CSV.
//!
//!     cargo run --release --example grid_search > grid.csv

use std::path::PathBuf;

use gradagrad::bench::schema::write_grid;
use gradagrad::bench::{grid, powers_of_two, Budget, GridParam, GridSpec, ProblemSpec, RunConfig};
use gradagrad::optim::{HyperParams, OptimizerKind, OptimizerSpec};

fn main() -> gradagrad::Result<()> {
    let dataset = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/sparse_planted.libsvm");
    let problem_spec = ProblemSpec::Logistic { dataset };
    let mut config = RunConfig::new(
        problem_spec.clone(),
        OptimizerSpec::new(OptimizerKind::AdaGrad, HyperParams::default()),
        Budget::Epochs(20),
    );
    config.batch_size = 16;
    config.seeds = 5;
    let problem = problem_spec.build(config.batch_size)?;
    let spec = GridSpec {
        param: GridParam::Gamma0,
        values: powers_of_two(-8, 4),
    };
    let result = grid(&config, &spec, problem.as_ref())?;
    write_grid(&result, std::io::stdout().lock())?;
    eprintln!(
        "best lr {} ({:.4})",
        result.best().value,
        result.best().metric
    );
    Ok(())
}
